#pragma once

// General-state-space transition kernels.
//
// A kernel samples the next state from the current one using a caller-owned
// Rng. One-dimensional kernels may also expose their transition law as an
// absolutely continuous density plus an atom at the current state (the
// Metropolis rejection mass). The drift/minorization verifiers and the
// continuous coupling need that density form.

#include <array>
#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "mcbound/errors.hpp"
#include "mcbound/intervals.hpp"
#include "mcbound/random.hpp"

namespace mcb {

template <class K>
concept SamplingKernel = requires(const K& k, const typename K::State& s, Rng& rng) {
  { k.sample(s, rng) } -> std::same_as<typename K::State>;
};

/// Kernel on (a subset of) the real line with P(x,dy) = density(x,y) dy +
/// atom(x) delta_x(dy). support(x) bounds the y-range carrying all but 1e-12
/// of the continuous mass; kinks(x) lists y where density(x,.) is not smooth.
/// source_support(z) / source_kinks(z) describe density(., z) as a function of
/// the starting point, for use in convolutions.
template <class K>
concept DensityKernel =
    SamplingKernel<K> && std::same_as<typename K::State, double> &&
    requires(const K& k, double x, double y) {
      { k.density(x, y) } -> std::convertible_to<double>;
      { k.atom(x) } -> std::convertible_to<double>;
      { k.support(x) } -> std::same_as<Interval>;
      { k.kinks(x) } -> std::same_as<std::vector<double>>;
      { k.source_support(y) } -> std::same_as<Interval>;
      { k.source_kinks(y) } -> std::same_as<std::vector<double>>;
    };

template <class K>
concept HasTarget = requires(const K& k, const typename K::State& s) {
  { k.log_target(s) } -> std::convertible_to<double>;
};

// ---------------------------------------------------------------------------

/// Chain on [0, inf): from x, an equal mixture of Exponential(2) and the
/// half-normal with scale x+1. P(x,dy) >= e^{-2y} dy for every x.
class HalflineMixture {
 public:
  using State = double;

  double sample(double x, Rng& rng) const {
    check(x);
    if (uniform01(rng) < 0.5) return exponential(rng, 2.0);
    return std::abs(standard_normal(rng)) * (x + 1.0);
  }

  double density(double x, double y) const {
    check(x);
    if (y < 0) return 0.0;
    const double s = x + 1.0;
    return std::exp(-2.0 * y) +
           std::exp(-y * y / (2.0 * s * s)) / (std::sqrt(2.0 * std::numbers::pi) * s);
  }

  double atom(double x) const {
    check(x);
    return 0.0;
  }

  Interval support(double x) const {
    check(x);
    // Exponential tail e^{-2T}/2 and half-normal tail beyond 7.5 sd are < 1e-12.
    return {0.0, std::max(14.0, 7.5 * (x + 1.0))};
  }
  std::vector<double> kinks(double) const { return {}; }
  Interval source_support(double) const { return {0.0, std::numeric_limits<double>::infinity()}; }
  std::vector<double> source_kinks(double) const { return {}; }

  /// Overlap measure nu(y) = 2 e^{-2y} with weight 1/2.
  static double nu_density(double y) { return y < 0 ? 0.0 : 2.0 * std::exp(-2.0 * y); }
  static double nu_sample(Rng& rng) { return exponential(rng, 2.0); }
  static constexpr double epsilon = 0.5;

 private:
  static void check(double x) {
    if (!(x >= 0)) throw InvalidArgument("half-line kernel state must be >= 0");
  }
};

// ---------------------------------------------------------------------------

/// Random-walk Metropolis for the Laplace target e^{-|x|}: propose
/// Uniform[x-2, x+2], accept with min(1, e^{|x|-|y|}).
class RwmLaplace {
 public:
  using State = double;
  static constexpr double half_width = 2.0;

  double log_target(double x) const { return -std::abs(x); }

  double acceptance(double x, double y) const {
    return std::min(1.0, std::exp(std::abs(x) - std::abs(y)));
  }

  double sample(double x, Rng& rng) const {
    const double y = uniform(rng, x - half_width, x + half_width);
    if (uniform01(rng) < acceptance(x, y)) return y;
    return x;
  }

  double density(double x, double y) const {
    if (std::abs(y - x) > half_width) return 0.0;
    return acceptance(x, y) / (2.0 * half_width);
  }

  /// Rejection mass, in closed form:
  /// (1/4)[1 + e^{-2} + (|x| < 1 ? 1 - 2|x| + e^{2|x|-2} : 0)].
  double atom(double x) const {
    const double a = std::abs(x);
    double r = 1.0 + std::exp(-2.0);
    if (a < 1.0) r += 1.0 - 2.0 * a + std::exp(2.0 * a - 2.0);
    return r / 4.0;
  }

  Interval support(double x) const { return {x - half_width, x + half_width}; }
  std::vector<double> kinks(double x) const { return {0.0, std::abs(x), -std::abs(x)}; }
  Interval source_support(double z) const { return {z - half_width, z + half_width}; }
  std::vector<double> source_kinks(double z) const { return {0.0, std::abs(z), -std::abs(z)}; }

  /// Normalized target CDF.
  static double target_cdf(double x) {
    return x < 0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
  }
  /// Exact draw from the normalized target.
  static double sample_target(Rng& rng) {
    const double e = exponential(rng, 1.0);
    return uniform01(rng) < 0.5 ? -e : e;
  }
};

// ---------------------------------------------------------------------------

/// Independence Metropolis for three points in the unit square with
/// unnormalized density exp(-C sum ||x_i|| - D sum_{i<j} ||x_i - x_j||^{-1}).
/// The state is (x11, x12, x21, x22, x31, x32); proposals are uniform on
/// [0,1]^6. Coincident points have density 0.
class PointProcessMetropolis {
 public:
  using State = std::array<double, 6>;

  PointProcessMetropolis(double c, double d) : c_(c), d_(d) {
    if (!(c > 0) || !(d > 0)) throw InvalidArgument("point-process C and D must be positive");
  }

  double c() const { return c_; }
  double d() const { return d_; }

  double log_target(const State& x) const {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s -= c_ * std::hypot(x[2 * i], x[2 * i + 1]);
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        const double r = std::hypot(x[2 * i] - x[2 * j], x[2 * i + 1] - x[2 * j + 1]);
        if (r == 0.0) return -std::numeric_limits<double>::infinity();
        s -= d_ / r;
      }
    }
    return s;
  }

  double acceptance(const State& x, const State& y) const {
    const double lx = valid_log_target(x);
    const double ly = log_target(y);
    if (std::isinf(ly)) return 0.0;
    return ly >= lx ? 1.0 : std::exp(ly - lx);
  }

  /// Density of the continuous part w.r.t. Lebesgue measure on [0,1]^6.
  double density(const State& x, const State& y) const {
    for (double v : y)
      if (v < 0.0 || v > 1.0) return 0.0;
    return acceptance(x, y);
  }

  static State propose(Rng& rng) {
    State y;
    for (auto& v : y) v = uniform01(rng);
    return y;
  }

  State sample(const State& x, Rng& rng) const {
    const double lx = valid_log_target(x);
    const State y = propose(rng);
    const double ly = log_target(y);
    if (std::isinf(ly)) return x;
    if (ly >= lx || uniform01(rng) < std::exp(ly - lx)) return y;
    return x;
  }

  /// Monte Carlo estimate of the overlap of P(x,.) and P(x2,.), i.e.
  /// the integral of min(density(x,.), density(x2,.)), with its standard error.
  std::pair<double, double> estimate_overlap(const State& x, const State& x2, std::size_t samples,
                                             Rng& rng) const {
    double s = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const State y = propose(rng);
      const double v = std::min(acceptance(x, y), acceptance(x2, y));
      s += v;
      s2 += v * v;
    }
    const double n = static_cast<double>(samples);
    const double mean = s / n;
    return {mean, std::sqrt(std::max(0.0, s2 / n - mean * mean) / n)};
  }

 private:
  double valid_log_target(const State& x) const {
    const double l = log_target(x);
    if (std::isinf(l)) throw InvalidArgument("point-process state has coincident particles");
    return l;
  }

  double c_;
  double d_;
};

/// Closed-form one-step minorization constant for the point-process chain:
/// 0.48 * exp(-4.25 C - 9.88 D).
inline double lemma1_epsilon(double c, double d) {
  if (!(c > 0) || !(d > 0)) throw InvalidArgument("C and D must be positive");
  return 0.48 * std::exp(-4.25 * c - 9.88 * d);
}

}  // namespace mcb
