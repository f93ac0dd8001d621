#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mcb {

using Rng = std::mt19937_64;

/// Independent stream for (master seed, stream index). Every replication of a
/// simulation draws from its own stream, so results do not depend on how
/// replications are spread over workers.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x6d63626fU};
  return Rng(seq);
}

/// Uniform on [0,1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Exponential(rate) by inverse CDF.
inline double exponential(Rng& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

}  // namespace mcb
