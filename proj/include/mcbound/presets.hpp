#pragma once

// Reference constants for the built-in example chains, plus the assembled
// drift/minorization pipeline for the Laplace random-walk Metropolis chain.

#include <cmath>
#include <numbers>
#include <optional>

#include "mcbound/bound_report.hpp"
#include "mcbound/bounds.hpp"
#include "mcbound/coupling.hpp"
#include "mcbound/intervals.hpp"
#include "mcbound/kernels.hpp"

namespace mcb::presets {

// --- half-line mixture -------------------------------------------------------

inline ContinuousCert halfline_cert() {
  return {IntervalSet::whole_line(), 1, HalflineMixture::epsilon, &HalflineMixture::nu_density,
          &HalflineMixture::nu_sample};
}

// --- Laplace random-walk Metropolis ------------------------------------------

inline double laplace_v(double x) { return std::exp(std::abs(x) / 2.0); }

inline constexpr double laplace_lambda = 0.916;
inline constexpr double laplace_b = 0.285;

inline IntervalSet laplace_small_set() { return IntervalSet{{Interval{-2.0, 2.0}}}; }

inline UnivariateDrift laplace_drift() {
  return {&laplace_v, laplace_small_set(), laplace_lambda, laplace_b};
}

/// Two-step minorization on [-2,2]: eps = 1/(8e^2), nu uniform on [-1,1].
inline double laplace_epsilon() { return 1.0 / (8.0 * std::exp(2.0)); }
inline double laplace_nu_density(double y) { return std::abs(y) <= 1.0 ? 0.5 : 0.0; }
inline double laplace_nu_sample(Rng& rng) { return uniform(rng, -1.0, 1.0); }

inline ContinuousCert laplace_cert() {
  return {laplace_small_set(), 2, laplace_epsilon(), &laplace_nu_density, &laplace_nu_sample};
}

/// inf of V off [-2,2].
inline double laplace_d() { return std::numbers::e; }
/// Two steps of size <= 2 from [-2,2] stay in D = [-6,6].
inline Interval laplace_containment_set() { return {-6.0, 6.0}; }
/// sup over D x D of h = (V(x) + V(y)) / 2.
inline double laplace_sup_rh() { return std::exp(3.0); }
/// E_pi h(0, Z) = 1/2 + E_pi V / 2 with E_pi e^{|Z|/2} = 2 for the Laplace law.
inline constexpr double laplace_eh = 2.0;
inline constexpr std::uint64_t laplace_schedule_n = 120000;
inline constexpr std::uint64_t laplace_schedule_j = 274;

// --- assembled pipeline -------------------------------------------------------

struct Theorem2Pipeline {
  double lambda = 0.0;
  double b = 0.0;
  double d = 0.0;
  double precondition = 0.0;  // b/(1-lambda) - 1, must be < d
  double inv_alpha = 0.0;
  double alpha = 0.0;
  double sup_rh = 0.0;
  Provenance sup_rh_source = Provenance::preset;
  std::optional<double> containment_defect;
  double b_const = 0.0;
  double stationary_moment = 0.0;  // b/(1-lambda)
  double eh = 0.0;
  Provenance eh_source = Provenance::analytic;
  double eh_fallback = 0.0;  // V(x0)/2 + b/(2(1-lambda))
  Theorem2Inputs inputs;
};

/// Builds Theorem-2 inputs from drift constants. `sup_rh` and `eh` may be
/// absent; sup_rh is then required to come from `b_override`, and eh falls
/// back to the stationary-moment bound.
inline Theorem2Pipeline assemble_theorem2(double epsilon, std::uint64_t n0, double lambda, double b,
                                          double d, std::optional<double> sup_rh,
                                          std::optional<double> b_override, std::optional<double> eh,
                                          double v_start = 1.0) {
  Theorem2Pipeline p;
  p.lambda = lambda;
  p.b = b;
  p.d = d;
  const UnivariateDrift uni{[](double) { return 1.0; }, IntervalSet::whole_line(), lambda, b};
  uni.validate();
  p.stationary_moment = stationary_moment_bound(lambda, b);
  p.precondition = p.stationary_moment - 1.0;
  const auto biv = bivariate_from_univariate(uni, d);
  p.alpha = biv.alpha;
  p.inv_alpha = 1.0 / biv.alpha;
  if (b_override) {
    p.b_const = *b_override;
  } else if (sup_rh) {
    p.sup_rh = *sup_rh;
    p.b_const = b_constant(n0, p.alpha, epsilon, *sup_rh);
  } else {
    throw InvalidArgument("Theorem 2 needs either sup R-bar h or B");
  }
  p.eh_fallback = 0.5 * v_start + 0.5 * p.stationary_moment;
  if (eh) {
    p.eh = *eh;
  } else {
    p.eh = p.eh_fallback;
    p.eh_source = Provenance::fallback;
  }
  p.inputs = Theorem2Inputs{epsilon, n0, p.alpha, p.b_const, p.eh};
  p.inputs.validate();
  return p;
}

/// Laplace chain pipeline. With `check_containment` the supremum of R-bar h
/// is bounded through a measured containment in D instead of the preset.
inline Theorem2Pipeline laplace_pipeline(bool check_containment = false) {
  Theorem2Pipeline p = assemble_theorem2(laplace_epsilon(), 2, laplace_lambda, laplace_b,
                                         laplace_d(), laplace_sup_rh(), std::nullopt, laplace_eh);
  p.sup_rh = laplace_sup_rh();
  p.sup_rh_source = Provenance::preset;
  if (check_containment) {
    const Interval dset = laplace_containment_set();
    const double defect =
        mcb::containment_defect(RwmLaplace{}, 2, probe_grid(-2.0, 2.0, 0.25), dset);
    p.containment_defect = defect;
    const auto h = [](double x, double y) { return 0.5 * (laplace_v(x) + laplace_v(y)); };
    p.sup_rh = sup_rh_via_containment(h, probe_grid(dset.lo, dset.hi, 0.5), defect, 1e-10);
    p.sup_rh_source = Provenance::computed;
    p.b_const = b_constant(2, p.alpha, laplace_epsilon(), p.sup_rh);
    p.inputs.b_const = p.b_const;
  }
  return p;
}

}  // namespace mcb::presets
