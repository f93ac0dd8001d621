#pragma once

// Analytic convergence bounds from minorization and drift constants.
//
//   uniform minorization:  ||L(X_n) - pi|| <= (1 - eps)^floor(n / n0)
//   drift + minorization:  ||L(X_n) - pi|| <= (1 - eps)^j + alpha^-n B^(j-1) E_pi h(x, Z)
//
// The drift bound is evaluated in log space; alpha^-n underflows long before
// the n values of interest.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mcbound/bound_report.hpp"
#include "mcbound/errors.hpp"
#include "mcbound/intervals.hpp"
#include "mcbound/verification.hpp"

namespace mcb {

inline constexpr std::uint64_t kDefaultStepCap = 1'000'000'000ULL;

inline double theorem1_bound(double epsilon, std::uint64_t n0, std::uint64_t n) {
  if (!(epsilon > 0) || epsilon > 1) throw InvalidArgument("epsilon must lie in (0, 1]");
  if (n0 == 0) throw InvalidArgument("n0 must be at least 1");
  return std::pow(1.0 - epsilon, static_cast<double>(n / n0));
}

/// Smallest n >= 0 with bound(n) < delta, for a bound that is non-increasing
/// in n. Doubling to bracket, then bisection.
inline std::uint64_t steps_to_threshold(const std::function<double(std::uint64_t)>& bound,
                                        double delta, std::uint64_t cap = kDefaultStepCap) {
  if (!(delta > 0) || !(delta < 1)) throw InvalidArgument("delta must lie in (0, 1)");
  if (bound(0) < delta) return 0;
  std::uint64_t lo = 0, hi = 1;  // bound(lo) >= delta
  while (!(bound(hi) < delta)) {
    if (hi >= cap) {
      std::ostringstream msg;
      msg << "bound does not fall below " << delta << " within " << cap << " steps";
      throw MathError(msg.str());
    }
    lo = hi;
    hi = std::min(cap, hi * 2);
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (bound(mid) < delta)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Theorem-1 curve for n = 0..n_max plus the threshold crossing.
inline BoundReport theorem1_report(double epsilon, std::uint64_t n0, std::uint64_t n_max,
                                   double delta) {
  BoundReport r;
  r.kind = "theorem1";
  for (std::uint64_t n = 0; n <= n_max; ++n) r.add_point(n, theorem1_bound(epsilon, n0, n));
  r.threshold = delta;
  const auto n_star =
      steps_to_threshold([&](std::uint64_t n) { return theorem1_bound(epsilon, n0, n); }, delta);
  r.crossing = Crossing{n_star, std::nullopt, theorem1_bound(epsilon, n0, n_star)};
  return r;
}

// ---------------------------------------------------------------------------
// Drift conditions
// ---------------------------------------------------------------------------

/// PV <= lambda V + b 1_C.
struct UnivariateDrift {
  std::function<double(double)> v;
  IntervalSet small_set;
  double lambda = 0.0;
  double b = 0.0;

  void validate() const {
    if (!(lambda > 0) || !(lambda < 1)) throw InvalidArgument("drift lambda must lie in (0, 1)");
    if (!(b >= 0) || !std::isfinite(b)) throw InvalidArgument("drift b must be finite and >= 0");
  }
};

/// P-bar h <= h / alpha off C x C.
struct BivariateDrift {
  std::function<double(double, double)> h;
  IntervalSet small_set;
  double alpha = 1.0;
};

/// E_pi V <= b / (1 - lambda).
inline double stationary_moment_bound(double lambda, double b) {
  if (!(lambda > 0) || !(lambda < 1)) throw InvalidArgument("drift lambda must lie in (0, 1)");
  return b / (1.0 - lambda);
}

/// h(x,y) = (V(x) + V(y)) / 2 with alpha^-1 = lambda + b / (d + 1), where
/// d = inf of V off the small set. Requires d > b/(1-lambda) - 1.
inline BivariateDrift bivariate_from_univariate(const UnivariateDrift& uni, double d) {
  uni.validate();
  const double needed = uni.b / (1.0 - uni.lambda) - 1.0;
  if (!(d > needed)) {
    std::ostringstream msg;
    msg << "small set too small for drift conversion: need d > b/(1-lambda) - 1 = " << needed
        << ", got d = " << d;
    throw MathError(msg.str());
  }
  const double inv_alpha = uni.lambda + uni.b / (d + 1.0);
  if (!(inv_alpha < 1.0)) throw MathError("drift conversion produced alpha^-1 >= 1");
  auto v = uni.v;
  return {[v](double x, double y) { return 0.5 * (v(x) + v(y)); }, uni.small_set, 1.0 / inv_alpha};
}

/// B_{n0} = max{1, alpha^n0 (1 - eps) sup_{C x C} R-bar h}.
inline double b_constant(std::uint64_t n0, double alpha, double epsilon, double sup_rh) {
  if (!(alpha > 1)) throw InvalidArgument("alpha must exceed 1");
  if (!(epsilon > 0) || !(epsilon < 1)) throw InvalidArgument("epsilon must lie in (0, 1)");
  if (!(sup_rh >= 0)) throw InvalidArgument("sup R-bar h must be >= 0");
  return std::max(1.0, std::pow(alpha, static_cast<double>(n0)) * (1.0 - epsilon) * sup_rh);
}

/// max over x in C-probes of 1 - P^{n0}(x, D), for n0 in {1, 2}.
template <DensityKernel K>
double containment_defect(const K& kernel, unsigned n0, const std::vector<double>& c_probes,
                          const Interval& d, const QuadratureOptions& opt = {}) {
  auto mass_in_d = [&](double x) {
    const Interval s = kernel.support(x);
    const double lo = std::max(s.lo, d.lo), hi = std::min(s.hi, d.hi);
    double m = d.contains(x) ? kernel.atom(x) : 0.0;
    if (lo < hi) {
      const auto kinks = kernel.kinks(x);
      m += integrate([&](double y) { return kernel.density(x, y); }, lo, hi, kinks, opt).value;
    }
    return m;
  };
  double worst = 0.0;
  for (double x : c_probes) {
    double mass = 0.0;
    if (n0 == 1) {
      mass = mass_in_d(x);
    } else if (n0 == 2) {
      const Interval s = kernel.support(x);
      const auto kinks = kernel.kinks(x);
      mass = integrate([&](double w) { return kernel.density(x, w) * mass_in_d(w); }, s.lo, s.hi,
                       kinks, opt)
                 .value +
             kernel.atom(x) * mass_in_d(x);
    } else {
      throw InvalidArgument("containment check supports n0 = 1 or 2");
    }
    worst = std::max(worst, 1.0 - mass);
  }
  return worst;
}

/// Upper bound for sup_{C x C} R-bar h from a set D with P^{n0}(x, D) = 1 on C:
/// the largest h over D x D probes. `defect` is the measured mass escaping D.
inline double sup_rh_via_containment(const std::function<double(double, double)>& h,
                                     const std::vector<double>& d_probes, double defect,
                                     double defect_tolerance = 1e-12) {
  if (d_probes.empty()) throw InvalidArgument("empty probe grid for D");
  if (defect > defect_tolerance) {
    std::ostringstream msg;
    msg << "containment check failed: mass " << defect << " escapes D in n0 steps";
    throw MathError(msg.str());
  }
  double best = -std::numeric_limits<double>::infinity();
  for (double x : d_probes)
    for (double y : d_probes) best = std::max(best, h(x, y));
  return best;
}

// ---------------------------------------------------------------------------
// Drift + minorization bound
// ---------------------------------------------------------------------------

struct Theorem2Inputs {
  double epsilon = 0.0;
  std::uint64_t n0 = 1;
  double alpha = 1.0;
  double b_const = 1.0;  // B_{n0}
  double eh = 1.0;       // E_{Z ~ pi} h(x, Z)

  void validate() const {
    if (!(epsilon > 0) || !(epsilon < 1)) throw InvalidArgument("epsilon must lie in (0, 1)");
    if (n0 == 0) throw InvalidArgument("n0 must be at least 1");
    if (!(alpha > 1)) throw InvalidArgument("alpha must exceed 1");
    if (!(b_const >= 1)) throw InvalidArgument("B must be >= 1");
    if (!(eh >= 1)) throw InvalidArgument("E_pi h must be >= 1");
  }
};

struct Theorem2Value {
  double value = 0.0;
  double log_value = 0.0;
  double log_term1 = 0.0;  // j log(1 - eps)
  double log_term2 = 0.0;  // -n log alpha + (j-1) log B + log Eh
};

inline Theorem2Value theorem2_eval(const Theorem2Inputs& in, std::uint64_t n, std::uint64_t j) {
  in.validate();
  if (j < 1 || j > n) throw InvalidArgument("Theorem-2 requires 1 <= j <= n");
  Theorem2Value v;
  v.log_term1 = static_cast<double>(j) * std::log1p(-in.epsilon);
  v.log_term2 = -static_cast<double>(n) * std::log(in.alpha) +
                static_cast<double>(j - 1) * std::log(in.b_const) + std::log(in.eh);
  const double hi = std::max(v.log_term1, v.log_term2);
  const double lo = std::min(v.log_term1, v.log_term2);
  v.log_value = hi + std::log1p(std::exp(lo - hi));
  v.value = std::exp(v.log_value);
  return v;
}

inline double theorem2_bound(const Theorem2Inputs& in, std::uint64_t n, std::uint64_t j) {
  return theorem2_eval(in, n, j).value;
}

/// Integer j in [1, n] minimizing the Theorem-2 bound at fixed n. The bound is
/// a sum of two exponentials in j, hence convex; the integer minimizer is a
/// neighbour of the continuous one.
inline std::uint64_t best_j(const Theorem2Inputs& in, std::uint64_t n) {
  in.validate();
  if (n == 0) throw InvalidArgument("n must be at least 1");
  const double log_b = std::log(in.b_const);
  if (log_b == 0.0) return n;  // second term independent of j; first term decreasing
  const double log_a = std::log1p(-in.epsilon);
  const double log_k = -static_cast<double>(n) * std::log(in.alpha) + std::log(in.eh) - log_b;
  // d/dj: log_a a^j + log_b K B^j = 0.
  const double jc = (std::log(-log_a) - log_k - std::log(log_b)) / (log_b - log_a);
  std::vector<std::uint64_t> cand;
  const double nd = static_cast<double>(n);
  for (double c : {std::floor(jc), std::ceil(jc)}) {
    const double clamped = std::clamp(c, 1.0, nd);
    cand.push_back(static_cast<std::uint64_t>(clamped));
  }
  std::uint64_t best = cand.front();
  double best_log = theorem2_eval(in, n, best).log_value;
  for (auto j : cand) {
    const double l = theorem2_eval(in, n, j).log_value;
    if (l < best_log) {
      best_log = l;
      best = j;
    }
  }
  return best;
}

struct Theorem2Optimum {
  std::uint64_t n = 0;
  std::uint64_t j = 0;
  Theorem2Value value;
  BoundReport report;  // every (n, j) the search evaluated, ascending in n
};

/// Smallest n whose best-j bound falls below delta.
inline Theorem2Optimum optimize_theorem2(const Theorem2Inputs& in, double delta,
                                         std::uint64_t cap = kDefaultStepCap) {
  in.validate();
  std::map<std::uint64_t, std::pair<std::uint64_t, Theorem2Value>> seen;
  auto at = [&](std::uint64_t n) {
    auto it = seen.find(n);
    if (it == seen.end()) {
      const auto j = best_j(in, n);
      it = seen.emplace(n, std::make_pair(j, theorem2_eval(in, n, j))).first;
    }
    return it->second.second.value;
  };
  const std::uint64_t n_star =
      steps_to_threshold([&](std::uint64_t n) { return n == 0 ? 1.0 : at(n); }, delta, cap);

  Theorem2Optimum out;
  out.n = n_star;
  out.j = seen.at(n_star).first;
  out.value = seen.at(n_star).second;
  out.report.kind = "theorem2";
  for (const auto& [n, jv] : seen) {
    out.report.curve.push_back({n, jv.second.value, jv.second.log_value, jv.first});
  }
  out.report.threshold = delta;
  out.report.crossing = Crossing{n_star, out.j, out.value.value};
  return out;
}

/// j from the linear schedule j = 1 + floor(n / divisor), clamped to [1, n].
inline std::uint64_t scheduled_j(std::uint64_t n, double divisor) {
  if (!(divisor > 0)) throw InvalidArgument("schedule divisor must be positive");
  const auto j = 1 + static_cast<std::uint64_t>(std::floor(static_cast<double>(n) / divisor));
  return std::clamp<std::uint64_t>(j, 1, std::max<std::uint64_t>(n, 1));
}

}  // namespace mcb
