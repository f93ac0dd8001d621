#pragma once

// Adaptive Gauss-Kronrod (7/15) over a piecewise-smooth integrand.
// Integration is split at caller-supplied breakpoints so that kinks never sit
// inside a panel.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include "mcbound/errors.hpp"

namespace mcb {

struct QuadratureOptions {
  double abs_tolerance = 1e-8;
  double rel_tolerance = 1e-12;
  unsigned max_depth = 18;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
QuadratureResult integrate(F&& f, double a, double b, std::span<const double> breakpoints = {},
                           const QuadratureOptions& opt = {}) {
  if (!(b >= a)) throw InvalidArgument("integration bounds out of order");
  std::vector<double> cuts{a};
  for (double c : breakpoints)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  // Cuts that differ only by rounding would leave sliver panels that the
  // adaptive rule refines to full depth.
  const double finite_scale = std::max({1.0, std::isfinite(a) ? std::abs(a) : 0.0,
                                        std::isfinite(b) ? std::abs(b) : 0.0});
  const double merge = 1e-12 * finite_scale;
  std::vector<double> kept{cuts.front()};
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    if (cuts[k] - kept.back() > merge) {
      kept.push_back(cuts[k]);
    } else if (k + 1 == cuts.size()) {
      kept.back() = cuts[k];  // keep the true upper limit
    }
  }
  if (kept.size() == 1) kept.push_back(b);
  cuts = std::move(kept);

  QuadratureResult out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double err = 0.0;
    double v = 0.0;
    const double lo = cuts[k], hi = cuts[k + 1];
    if (std::isfinite(lo) && std::isfinite(hi)) {
      // Boost compares an unscaled round-off floor against a scaled tolerance,
      // so a narrow panel never meets the relative target. Integrate on [0,1].
      const double w = hi - lo;
      v = w * boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                  [&](double t) { return f(lo + w * t); }, 0.0, 1.0, opt.max_depth,
                  opt.rel_tolerance, &err);
      err *= w;
    } else {
      v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          f, lo, hi, opt.max_depth, opt.rel_tolerance, &err);
    }
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite integral on [" << cuts[k] << ", " << cuts[k + 1] << "]";
      throw QuadratureError(msg.str());
    }
    out.value += v;
    out.error += err;
  }
  if (out.error > opt.abs_tolerance) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b << "]: error estimate "
        << out.error << " exceeds tolerance " << opt.abs_tolerance;
    throw QuadratureError(msg.str());
  }
  return out;
}

}  // namespace mcb
