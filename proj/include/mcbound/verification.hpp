#pragma once

// Probe-grid verification of drift and minorization conditions for
// one-dimensional density kernels. These are numerical checks at finitely
// many states, not proofs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "mcbound/intervals.hpp"
#include "mcbound/kernels.hpp"
#include "mcbound/quadrature.hpp"

namespace mcb {

/// (Pf)(x) = integral of f(y) density(x,y) dy + atom(x) f(x).
template <DensityKernel K, class F>
QuadratureResult transition_expectation(const K& kernel, double x, F&& f,
                                        const QuadratureOptions& opt = {}) {
  const Interval s = kernel.support(x);
  const auto kinks = kernel.kinks(x);
  auto r = integrate([&](double y) { return f(y) * kernel.density(x, y); }, s.lo, s.hi, kinks, opt);
  r.value += kernel.atom(x) * f(x);
  return r;
}

/// Continuous part of the two-step law at z:
/// int p(x,w) p(w,z) dw + atom(x) p(x,z) + p(x,z) atom(z).
template <DensityKernel K>
QuadratureResult two_step_density(const K& kernel, double x, double z,
                                  const QuadratureOptions& opt = {}) {
  const Interval a = kernel.support(x);
  const Interval b = kernel.source_support(z);
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  QuadratureResult r;
  if (lo < hi) {
    auto cuts = kernel.kinks(x);
    const auto more = kernel.source_kinks(z);
    cuts.insert(cuts.end(), more.begin(), more.end());
    r = integrate([&](double w) { return kernel.density(x, w) * kernel.density(w, z); }, lo, hi,
                  cuts, opt);
  }
  const double direct = kernel.density(x, z);
  r.value += kernel.atom(x) * direct + direct * kernel.atom(z);
  return r;
}

/// Density of the continuous part of P^{n0}(x, .) at y, for n0 in {1, 2}.
template <DensityKernel K>
QuadratureResult block_density(const K& kernel, unsigned n0, double x, double y,
                               const QuadratureOptions& opt = {}) {
  if (n0 == 1) return {kernel.density(x, y), 0.0};
  if (n0 == 2) return two_step_density(kernel, x, y, opt);
  throw InvalidArgument("density verification supports n0 = 1 or 2");
}

// ---------------------------------------------------------------------------

struct DriftVerificationReport {
  std::vector<double> grid;
  std::vector<double> lhs;  // PV(x)
  std::vector<double> rhs;  // lambda V(x) + b 1_C(x)
  double max_violation = -std::numeric_limits<double>::infinity();
  double worst_state = 0.0;
  double quadrature_error_estimate = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct DriftSpec {
  std::function<double(double)> v;
  IntervalSet small_set;
  double lambda = 0.0;
  double b = 0.0;
};

/// Checks PV(x) <= lambda V(x) + b 1_C(x) at every probe state.
template <DensityKernel K>
DriftVerificationReport verify_univariate_drift(const K& kernel, const DriftSpec& drift,
                                                const std::vector<double>& probes,
                                                double tolerance = 1e-6,
                                                const QuadratureOptions& opt = {}) {
  if (probes.empty()) throw InvalidArgument("empty probe grid");
  DriftVerificationReport rep;
  rep.tolerance = tolerance;
  for (double x : probes) {
    const double vx = drift.v(x);
    if (!(vx >= 1.0)) throw InvalidArgument("drift function must be >= 1 on the probe grid");
    const auto pv = transition_expectation(kernel, x, drift.v, opt);
    const double rhs = drift.lambda * vx + (drift.small_set.contains(x) ? drift.b : 0.0);
    rep.grid.push_back(x);
    rep.lhs.push_back(pv.value);
    rep.rhs.push_back(rhs);
    rep.quadrature_error_estimate = std::max(rep.quadrature_error_estimate, pv.error);
    if (pv.value - rhs > rep.max_violation) {
      rep.max_violation = pv.value - rhs;
      rep.worst_state = x;
    }
  }
  rep.passed = rep.max_violation <= tolerance;
  return rep;
}

// ---------------------------------------------------------------------------

struct MinorizationVerificationReport {
  unsigned n0 = 1;
  double epsilon = 0.0;
  std::size_t probes = 0;
  /// min over probes of p^{n0}(x,y) - epsilon nu(y).
  double min_margin = std::numeric_limits<double>::infinity();
  double worst_x = 0.0;
  double worst_y = 0.0;
  double quadrature_error_estimate = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Checks p^{n0}(x, y) >= epsilon nu(y) for x in the small-set probes and y in
/// the nu-support probes.
template <DensityKernel K>
MinorizationVerificationReport verify_minorization_numeric(
    const K& kernel, const IntervalSet& small_set, unsigned n0, double epsilon,
    const std::function<double(double)>& nu_density, const std::vector<double>& x_probes,
    const std::vector<double>& y_probes, double tolerance = 1e-8,
    const QuadratureOptions& opt = {}) {
  if (!(epsilon >= 0) || epsilon > 1) throw InvalidArgument("epsilon must lie in [0,1]");
  MinorizationVerificationReport rep;
  rep.n0 = n0;
  rep.epsilon = epsilon;
  rep.tolerance = tolerance;
  for (double x : x_probes) {
    if (!small_set.contains(x)) continue;
    for (double y : y_probes) {
      const auto p = block_density(kernel, n0, x, y, opt);
      const double margin = p.value - epsilon * nu_density(y);
      ++rep.probes;
      rep.quadrature_error_estimate = std::max(rep.quadrature_error_estimate, p.error);
      if (margin < rep.min_margin) {
        rep.min_margin = margin;
        rep.worst_x = x;
        rep.worst_y = y;
      }
    }
  }
  if (rep.probes == 0) throw InvalidArgument("no probe state lies in the small set");
  rep.passed = rep.min_margin >= -tolerance;
  return rep;
}

}  // namespace mcb
