#pragma once

// Monte Carlo simulation of the minorization coupling.
//
// Two copies start from X_0 ~ mu_0 and X'_0 ~ pi. While they differ and both
// sit in the small set at an n0-lattice time, a coin with P(heads) = eps
// decides between a common draw from the overlap measure and independent
// residual draws n0 steps ahead. Away from the small set both chains take
// independent single steps. Once equal they move together.
//
// Statistics are recorded on the n0-lattice. Replication r draws from stream
// r of the master seed, and replications are aggregated in fixed chunks merged
// in index order, so results are bit-identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mcbound/errors.hpp"
#include "mcbound/finite_chain.hpp"
#include "mcbound/intervals.hpp"
#include "mcbound/kernels.hpp"
#include "mcbound/minorization.hpp"
#include "mcbound/random.hpp"
#include "mcbound/verification.hpp"

namespace mcb {

struct CouplingConfig {
  std::uint64_t n_max = 0;
  std::uint64_t replications = 1;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
  /// Record every `record_stride`-th lattice time.
  std::uint64_t record_stride = 1;
  /// When false a replication stops once coupled; marginal statistics are
  /// then not reported.
  bool track_after_coupling = true;
  /// Number of leading replications whose full trajectories are kept.
  std::uint64_t trajectory_dump = 0;

  void validate() const {
    if (replications == 0) throw InvalidArgument("replications must be >= 1");
    if (workers == 0) throw InvalidArgument("workers must be >= 1");
    if (record_stride == 0) throw InvalidArgument("record stride must be >= 1");
  }
};

struct TrajectoryRow {
  std::uint64_t replication = 0;
  std::uint64_t n = 0;
  std::string x;
  std::string x_prime;
  bool coupled = false;
};

struct CouplingTimeSummary {
  std::uint64_t coupled = 0;   // replications that coupled by n_max
  std::uint64_t censored = 0;  // replications still apart at n_max
  double mean = 0.0;           // over coupled replications
  double median = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
};

struct EmpiricalTv {
  double value = 0.0;
  double se = 0.0;
};

struct CouplingResult {
  std::string mode;
  unsigned n0 = 1;
  double epsilon = 0.0;
  std::uint64_t replications = 0;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;

  std::vector<std::uint64_t> times;
  std::vector<std::uint64_t> noncoupled;
  std::vector<double> p_noncoupled;
  std::vector<double> se_noncoupled;
  /// Mean number of coin flips (visits of C x C while apart) before time n.
  std::vector<double> mean_small_set_visits;

  bool has_marginals = false;
  // Finite chains: occupation counts of X_n and X'_n, and TV of X_n to pi.
  std::size_t num_states = 0;
  std::vector<std::vector<std::uint64_t>> x_counts;
  std::vector<std::vector<std::uint64_t>> x_prime_counts;
  std::vector<EmpiricalTv> tv_to_reference;
  // TV between the pooled empirical laws of X_n and X'_n. Bounded by the
  // empirical non-coupling frequency replication by replication.
  std::vector<double> tv_between_copies;
  // Continuous chains with an observable f: mean and SE of f(X_n).
  std::vector<double> observable_mean;
  std::vector<double> observable_se;

  CouplingTimeSummary coupling_time;
  std::vector<TrajectoryRow> trajectories;
};

/// Half the L1 distance between empirical frequencies and `reference`, with a
/// delete-one jackknife standard error.
inline EmpiricalTv empirical_tv(std::span<const std::uint64_t> counts,
                                std::span<const double> reference) {
  if (counts.size() != reference.size()) throw InvalidArgument("counts/reference size mismatch");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw InvalidArgument("no samples");
  const double n = static_cast<double>(total);
  auto tv_of = [&](std::size_t drop, double denom) {
    double s = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double c = static_cast<double>(counts[i]) - (i == drop ? 1.0 : 0.0);
      s += std::abs(c / denom - reference[i]);
    }
    return 0.5 * s;
  };
  EmpiricalTv out;
  out.value = tv_of(counts.size(), n);
  if (total < 2) return out;
  // Leave-one-out values depend only on the state dropped.
  std::vector<double> loo(counts.size(), 0.0);
  double mean = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    loo[k] = tv_of(k, n - 1.0);
    mean += static_cast<double>(counts[k]) * loo[k];
  }
  mean /= n;
  double var = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    const double d = loo[k] - mean;
    var += static_cast<double>(counts[k]) * d * d;
  }
  out.se = std::sqrt((n - 1.0) / n * var);
  return out;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> cumulative(std::span<const Rational> probs) {
  std::vector<double> c(probs.size());
  Rational acc = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    c[i] = to_double(acc);
  }
  if (!c.empty()) c.back() = 1.0;
  return c;
}

inline StateIndex draw(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<StateIndex>(it - cdf.begin());
}

}  // namespace detail

/// Coupling of a finite chain driven by an exact minorization certificate.
class FiniteCouplingModel {
 public:
  using State = StateIndex;

  FiniteCouplingModel(const StochasticMatrix& p, const MinorizationCert& cert, const ProbVector& mu0)
      : n_(p.size()), n0_(static_cast<unsigned>(cert.n0)), eps_(to_double(cert.epsilon)),
        uniform_(cert.variant == MinorizationVariant::uniform), pi_(mcb::stationary(p)) {
    if (mu0.size() != n_ || cert.block.size() != n_)
      throw InvalidArgument("distribution/matrix dimension mismatch");
    if (cert.epsilon <= 0 || cert.epsilon > 1) throw MathError("certificate epsilon outside (0,1]");
    in_c_.assign(n_, false);
    for (auto s : cert.small_set) in_c_.at(s) = true;
    pi_double_ = pi_.to_double();
    for (std::size_t i = 0; i < n_; ++i) step_.push_back(detail::cumulative(p.row(i)));
    initial_ = detail::cumulative(mu0.entries());
    stationary_ = detail::cumulative(pi_.entries());

    // Tables are indexed by row i (uniform) or by the ordered pair (i, j) (pseudo).
    if (uniform_) {
      nu_.push_back(detail::cumulative(cert.nu->entries()));
      residual_.resize(n_);
      for (std::size_t i = 0; i < n_; ++i)
        if (in_c_[i]) residual_[i] = residual_row(cert, i, *cert.nu);
    } else {
      nu_.resize(n_ * n_);
      residual_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
          if (i == j || !in_c_[i] || !in_c_[j]) continue;
          const ProbVector nu = overlap_measure(cert, i, j);
          nu_[i * n_ + j] = detail::cumulative(nu.entries());
          residual_[i * n_ + j] = residual_row(cert, i, nu);
        }
      }
    }
  }

  unsigned n0() const { return n0_; }
  double epsilon() const { return eps_; }
  std::size_t num_states() const { return n_; }
  bool covers_whole_space() const {
    return std::all_of(in_c_.begin(), in_c_.end(), [](bool b) { return b; });
  }
  const std::vector<double>& reference() const { return pi_double_; }
  const ProbVector& stationary_law() const { return pi_; }

  State initial(Rng& rng) const { return detail::draw(initial_, rng); }
  State stationary(Rng& rng) const { return detail::draw(stationary_, rng); }
  State step(State x, Rng& rng) const { return detail::draw(step_[x], rng); }
  bool in_small_set(State x) const { return in_c_[x]; }
  State overlap(State x, State y, Rng& rng) const {
    return detail::draw(nu_[uniform_ ? 0 : x * n_ + y], rng);
  }
  State residual(State x, State y, Rng& rng) const {
    return detail::draw(residual_[uniform_ ? x : x * n_ + y], rng);
  }
  static std::string label(State x) { return std::to_string(x + 1); }
  std::size_t index(State x) const { return x; }

 private:
  // (P^n0(i,.) - eps nu) / (1 - eps), checked exactly for negativity.
  static std::vector<double> residual_row(const MinorizationCert& cert, StateIndex i,
                                          const ProbVector& nu) {
    if (cert.epsilon == 1) return {};
    const std::size_t n = nu.size();
    std::vector<Rational> r(n);
    for (std::size_t z = 0; z < n; ++z) {
      r[z] = (cert.block(i, z) - cert.epsilon * nu[z]) / (1 - cert.epsilon);
      if (r[z] < 0) {
        throw MathError("invalid certificate: negative residual mass in row " + std::to_string(i + 1));
      }
    }
    return detail::cumulative(r);
  }

  std::size_t n_;
  unsigned n0_;
  double eps_;
  bool uniform_;
  ProbVector pi_;
  std::vector<bool> in_c_;
  std::vector<double> pi_double_;
  std::vector<std::vector<double>> step_;
  std::vector<double> initial_, stationary_;
  std::vector<std::vector<double>> nu_, residual_;
};

/// Minorization P^{n0}(x,.) >= eps nu(.) for x in a small set of the line.
struct ContinuousCert {
  IntervalSet small_set = IntervalSet::whole_line();
  unsigned n0 = 1;
  double epsilon = 0.0;
  std::function<double(double)> nu_density;
  std::function<double(Rng&)> nu_sample;
};

/// Draws from pi approximately by running the kernel `steps` times from `start`.
template <SamplingKernel K>
std::function<typename K::State(Rng&)> burn_in_sampler(K kernel, typename K::State start,
                                                       std::uint64_t steps) {
  return [kernel, start, steps](Rng& rng) {
    auto x = start;
    for (std::uint64_t k = 0; k < steps; ++k) x = kernel.sample(x, rng);
    return x;
  };
}

/// Coupling of a one-dimensional density kernel. Residual draws use rejection
/// from P^{n0}(x,.), accepting z with probability 1 - eps nu(z) / p^{n0}(x,z).
template <DensityKernel K>
class KernelCouplingModel {
 public:
  using State = double;

  KernelCouplingModel(K kernel, ContinuousCert cert, std::function<double(Rng&)> initial,
                      std::function<double(Rng&)> stationary,
                      std::function<double(double)> observable = {})
      : kernel_(std::move(kernel)), cert_(std::move(cert)), initial_(std::move(initial)),
        stationary_(std::move(stationary)), observable_(std::move(observable)) {
    if (!(cert_.epsilon > 0) || cert_.epsilon > 1) throw MathError("certificate epsilon outside (0,1]");
    if (cert_.n0 != 1 && cert_.n0 != 2) throw InvalidArgument("continuous coupling supports n0 = 1 or 2");
    if (!cert_.nu_density || !cert_.nu_sample) throw InvalidArgument("certificate needs nu density and sampler");
  }

  unsigned n0() const { return cert_.n0; }
  double epsilon() const { return cert_.epsilon; }
  bool covers_whole_space() const { return cert_.small_set.is_whole_line(); }
  bool has_observable() const { return static_cast<bool>(observable_); }
  double observe(double x) const { return observable_(x); }

  double initial(Rng& rng) const { return initial_(rng); }
  double stationary(Rng& rng) const { return stationary_(rng); }
  double step(double x, Rng& rng) const { return kernel_.sample(x, rng); }
  bool in_small_set(double x) const { return cert_.small_set.contains(x); }
  double overlap(double, double, Rng& rng) const { return cert_.nu_sample(rng); }

  double residual(double x, double, Rng& rng) const {
    for (int attempt = 0; attempt < 1'000'000; ++attempt) {
      double z = x;
      for (unsigned k = 0; k < cert_.n0; ++k) z = kernel_.sample(z, rng);
      const double u = uniform01(rng);
      if (z == x) return z;  // atom: nu carries no atoms
      const double nu = cert_.nu_density(z);
      if (nu == 0.0) return z;
      const double p = block_density(kernel_, cert_.n0, x, z).value;
      const double ratio = cert_.epsilon * nu / p;
      if (ratio > 1.0 + 1e-9) {
        std::ostringstream msg;
        msg << "invalid certificate: residual density negative at x=" << x << ", z=" << z;
        throw MathError(msg.str());
      }
      if (u >= ratio) return z;
    }
    throw MathError("residual rejection sampler did not terminate");
  }

  static std::string label(double x) {
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
  }

 private:
  K kernel_;
  ContinuousCert cert_;
  std::function<double(Rng&)> initial_;
  std::function<double(Rng&)> stationary_;
  std::function<double(double)> observable_;
};

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

namespace detail {

template <class M>
concept FiniteModel = requires(const M& m, typename M::State s) {
  { m.index(s) } -> std::convertible_to<std::size_t>;
  { m.num_states() } -> std::convertible_to<std::size_t>;
};

template <class M>
concept ObservableModel = requires(const M& m, typename M::State s) {
  { m.observe(s) } -> std::convertible_to<double>;
  { m.has_observable() } -> std::convertible_to<bool>;
};

struct Chunk {
  std::vector<std::uint64_t> noncoupled;
  std::vector<std::uint64_t> visits;
  std::vector<std::uint64_t> x_counts, y_counts;  // [record * states + s]
  std::vector<double> obs_sum, obs_sq;
  std::vector<std::int64_t> coupling_times;       // -1 when censored
  std::vector<TrajectoryRow> trajectories;
};

inline constexpr std::uint64_t kChunkSize = 64;

template <class M>
void simulate_replication(const M& model, const CouplingConfig& cfg, std::uint64_t rep,
                          std::size_t states, bool observable, Chunk& out) {
  Rng rng = make_stream(cfg.master_seed, rep);
  const unsigned n0 = model.n0();
  const std::uint64_t rec_period = static_cast<std::uint64_t>(n0) * cfg.record_stride;
  const bool dump = rep < cfg.trajectory_dump;

  auto x = model.initial(rng);
  auto y = model.stationary(rng);
  bool coupled = (x == y);
  std::int64_t coupling_time = coupled ? 0 : -1;
  std::uint64_t visits = 0;
  std::uint64_t t = 0;

  auto record = [&](std::uint64_t k) {
    if (!coupled) ++out.noncoupled[k];
    out.visits[k] += visits;
    if constexpr (FiniteModel<M>) {
      ++out.x_counts[k * states + model.index(x)];
      ++out.y_counts[k * states + model.index(y)];
    }
    if constexpr (ObservableModel<M>) {
      if (observable) {
        const double f = model.observe(x);
        out.obs_sum[k] += f;
        out.obs_sq[k] += f * f;
      }
    }
  };
  auto dump_row = [&] {
    if (dump) out.trajectories.push_back({rep, t, M::label(x), M::label(y), coupled});
  };

  record(0);
  dump_row();
  while (t < cfg.n_max) {
    if (coupled) {
      x = model.step(x, rng);
      y = x;
      t += 1;
    } else if (t % n0 == 0 && model.in_small_set(x) && model.in_small_set(y)) {
      ++visits;
      if (uniform01(rng) < model.epsilon()) {
        x = model.overlap(x, y, rng);
        y = x;
      } else {
        const auto nx = model.residual(x, y, rng);
        const auto ny = model.residual(y, x, rng);
        x = nx;
        y = ny;
      }
      t += n0;
    } else {
      x = model.step(x, rng);
      y = model.step(y, rng);
      t += 1;
    }
    if (!coupled && x == y) {
      coupled = true;
      coupling_time = static_cast<std::int64_t>(t);
    }
    if (t > cfg.n_max) break;
    if (t % rec_period == 0) {
      record(t / rec_period);
      dump_row();
    } else if (dump && t % n0 == 0) {
      dump_row();
    }
    if (coupled && !cfg.track_after_coupling) break;
  }
  out.coupling_times.push_back(coupling_time);
}

template <class M>
CouplingResult run_coupling(const M& model, const CouplingConfig& cfg, std::string mode) {
  cfg.validate();
  const unsigned n0 = model.n0();
  const std::uint64_t records = cfg.n_max / (static_cast<std::uint64_t>(n0) * cfg.record_stride) + 1;
  std::size_t states = 0;
  if constexpr (FiniteModel<M>) states = model.num_states();
  bool observable = false;
  if constexpr (ObservableModel<M>) observable = model.has_observable();

  CouplingResult res;
  res.mode = std::move(mode);
  res.n0 = n0;
  res.epsilon = model.epsilon();
  res.replications = cfg.replications;
  res.master_seed = cfg.master_seed;
  res.workers = cfg.workers;
  res.num_states = states;
  res.has_marginals = cfg.track_after_coupling && (states > 0 || observable);

  Chunk total;
  total.noncoupled.assign(records, 0);
  total.visits.assign(records, 0);
  total.x_counts.assign(records * states, 0);
  total.y_counts.assign(records * states, 0);
  total.obs_sum.assign(observable ? records : 0, 0.0);
  total.obs_sq.assign(observable ? records : 0, 0.0);

  const std::uint64_t chunks = (cfg.replications + kChunkSize - 1) / kChunkSize;
  auto make_chunk = [&] {
    Chunk c;
    c.noncoupled.assign(records, 0);
    c.visits.assign(records, 0);
    c.x_counts.assign(records * states, 0);
    c.y_counts.assign(records * states, 0);
    c.obs_sum.assign(observable ? records : 0, 0.0);
    c.obs_sq.assign(observable ? records : 0, 0.0);
    return c;
  };
  auto merge = [&](Chunk& c) {
    for (std::uint64_t k = 0; k < records; ++k) {
      total.noncoupled[k] += c.noncoupled[k];
      total.visits[k] += c.visits[k];
    }
    for (std::size_t i = 0; i < c.x_counts.size(); ++i) {
      total.x_counts[i] += c.x_counts[i];
      total.y_counts[i] += c.y_counts[i];
    }
    for (std::size_t i = 0; i < c.obs_sum.size(); ++i) {
      total.obs_sum[i] += c.obs_sum[i];
      total.obs_sq[i] += c.obs_sq[i];
    }
    total.coupling_times.insert(total.coupling_times.end(), c.coupling_times.begin(),
                                c.coupling_times.end());
    total.trajectories.insert(total.trajectories.end(), c.trajectories.begin(), c.trajectories.end());
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(cfg.workers, chunks));
  for (std::uint64_t wave = 0; wave < chunks; wave += workers) {
    const std::uint64_t wave_end = std::min(chunks, wave + workers);
    std::vector<Chunk> out(wave_end - wave);
    std::vector<std::exception_ptr> errors(out.size());
    auto work = [&](std::uint64_t c) {
      try {
        Chunk ch = make_chunk();
        const std::uint64_t begin = c * kChunkSize;
        const std::uint64_t end = std::min(cfg.replications, begin + kChunkSize);
        for (std::uint64_t r = begin; r < end; ++r)
          simulate_replication(model, cfg, r, states, observable, ch);
        out[c - wave] = std::move(ch);
      } catch (...) {
        errors[c - wave] = std::current_exception();
      }
    };
    if (out.size() == 1) {
      work(wave);
    } else {
      std::vector<std::thread> pool;
      for (std::uint64_t c = wave; c < wave_end; ++c) pool.emplace_back(work, c);
      for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (auto& ch : out) merge(ch);
  }

  const double reps = static_cast<double>(cfg.replications);
  for (std::uint64_t k = 0; k < records; ++k) {
    res.times.push_back(k * n0 * cfg.record_stride);
    res.noncoupled.push_back(total.noncoupled[k]);
    const double p = static_cast<double>(total.noncoupled[k]) / reps;
    res.p_noncoupled.push_back(p);
    res.se_noncoupled.push_back(std::sqrt(p * (1.0 - p) / reps));
    res.mean_small_set_visits.push_back(static_cast<double>(total.visits[k]) / reps);
  }
  if (res.has_marginals && states > 0) {
    if constexpr (FiniteModel<M>) {
      for (std::uint64_t k = 0; k < records; ++k) {
        const auto xb = total.x_counts.begin() + static_cast<long>(k * states);
        const auto yb = total.y_counts.begin() + static_cast<long>(k * states);
        res.x_counts.emplace_back(xb, xb + static_cast<long>(states));
        res.x_prime_counts.emplace_back(yb, yb + static_cast<long>(states));
        res.tv_to_reference.push_back(empirical_tv(res.x_counts.back(), model.reference()));
        double l1 = 0.0;
        for (std::size_t i = 0; i < states; ++i)
          l1 += std::abs(static_cast<double>(xb[static_cast<long>(i)]) -
                         static_cast<double>(yb[static_cast<long>(i)]));
        res.tv_between_copies.push_back(0.5 * l1 / reps);
      }
    }
  }
  if (res.has_marginals && observable) {
    for (std::uint64_t k = 0; k < records; ++k) {
      const double m = total.obs_sum[k] / reps;
      const double var = std::max(0.0, total.obs_sq[k] / reps - m * m);
      res.observable_mean.push_back(m);
      res.observable_se.push_back(std::sqrt(var / reps));
    }
  }

  std::vector<double> times;
  for (auto t : total.coupling_times) {
    if (t < 0)
      ++res.coupling_time.censored;
    else
      times.push_back(static_cast<double>(t));
  }
  res.coupling_time.coupled = times.size();
  if (!times.empty()) {
    std::sort(times.begin(), times.end());
    double s = 0.0;
    for (double t : times) s += t;
    res.coupling_time.mean = s / static_cast<double>(times.size());
    auto q = [&](double p) {
      const auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(times.size()))) - 1;
      return times[std::min(idx, times.size() - 1)];
    };
    res.coupling_time.median = q(0.5);
    res.coupling_time.q90 = q(0.9);
    res.coupling_time.q99 = q(0.99);
  }
  res.trajectories = std::move(total.trajectories);
  return res;
}

}  // namespace detail

/// Uniform (whole-space) minorization coupling.
template <class M>
CouplingResult run_uniform_coupling(const M& model, const CouplingConfig& cfg) {
  if (!model.covers_whole_space())
    throw InvalidArgument("uniform coupling needs a certificate on the whole state space");
  return detail::run_coupling(model, cfg, "uniform");
}

/// Small-set coupling: coin flips only when both chains are in C at lattice
/// times, independent single steps otherwise.
template <class M>
CouplingResult run_small_set_coupling(const M& model, const CouplingConfig& cfg) {
  return detail::run_coupling(model, cfg, "small_set");
}

}  // namespace mcb
