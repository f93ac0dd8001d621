#pragma once

// Spectral bound |mu_n(t) - pi(t)| <= coefficient * rate^n for a finite chain.
//
// mu_0 is expanded in left eigenvectors of P by solving a linear system (the
// eigenbasis of a non-reversible chain is not orthogonal). Eigenvalues that
// coincide numerically are grouped into one mode, and the mode contributes the
// projection of mu_0 onto its eigenspace. That projection does not depend on
// which basis the eigensolver picked inside a repeated eigenvalue.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mcbound/finite_chain.hpp"

namespace mcb {

struct SpectralMode {
  std::complex<double> eigenvalue;
  int multiplicity = 1;
  /// Component of mu_0 in this eigenspace (a left eigenvector, possibly 0).
  std::vector<std::complex<double>> projection;
  /// ||projection||_2, the mode's expansion coefficient for a unit eigenvector.
  double weight = 0.0;
};

struct EigenBoundOptions {
  double condition_cap = 1e8;
  double coefficient_floor = 1e-12;
  double cluster_tolerance = 1e-8;
  double unit_tolerance = 1e-9;
};

struct EigenBound {
  StateIndex target = 0;
  double coefficient = 0.0;
  double rate = 0.0;
  /// All eigenvalues, sorted by decreasing modulus (ties: larger real part first).
  std::vector<std::complex<double>> eigenvalues;
  /// Modes in the same order; modes[0] is the unit eigenvalue.
  std::vector<SpectralMode> modes;
  std::vector<double> stationary;
  double condition_number = 0.0;

  double bound(unsigned long n) const { return coefficient * std::pow(rate, static_cast<double>(n)); }
};

inline EigenBound eigen_bound(const StochasticMatrix& p, const ProbVector& mu0, StateIndex target,
                              const EigenBoundOptions& opt = {}) {
  using CMat = Eigen::MatrixXcd;
  using CVec = Eigen::VectorXcd;
  const auto n = static_cast<Eigen::Index>(p.size());
  if (mu0.size() != p.size()) throw InvalidArgument("distribution/matrix dimension mismatch");
  if (target >= p.size()) throw InvalidArgument("target state out of range");

  Eigen::MatrixXd pt(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      pt(j, i) = to_double(p(static_cast<StateIndex>(i), static_cast<StateIndex>(j)));

  Eigen::EigenSolver<Eigen::MatrixXd> solver(pt, true);
  if (solver.info() != Eigen::Success) throw MathError("eigendecomposition did not converge");
  CVec lambda = solver.eigenvalues();
  CMat vecs = solver.eigenvectors();  // columns: left eigenvectors of P

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(lambda(a)), mb = std::abs(lambda(b));
    if (std::abs(ma - mb) > opt.cluster_tolerance) return ma > mb;
    if (std::abs(lambda(a).real() - lambda(b).real()) > opt.cluster_tolerance)
      return lambda(a).real() > lambda(b).real();
    return lambda(a).imag() > lambda(b).imag();
  });

  EigenBound out;
  out.target = target;
  CMat basis(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.eigenvalues.push_back(lambda(src));
    basis.col(k) = vecs.col(src).normalized();
  }

  int unit_modulus = 0;
  for (const auto& l : out.eigenvalues)
    if (std::abs(l) > 1.0 - opt.unit_tolerance) ++unit_modulus;
  if (unit_modulus != 1 || std::abs(out.eigenvalues.front() - 1.0) > opt.unit_tolerance) {
    throw MathError(
        "chain has several unit-modulus eigenvalues (periodic or reducible); eigenvalue bound "
        "unavailable");
  }

  Eigen::JacobiSVD<CMat> svd(basis);
  const auto& sv = svd.singularValues();
  out.condition_number = sv(n - 1) > 0 ? sv(0) / sv(n - 1) : INFINITY;
  if (!(out.condition_number < opt.condition_cap)) {
    throw MathError("eigenvector basis is ill-conditioned (condition number " +
                    std::to_string(out.condition_number) +
                    "); the chain may not be diagonalizable, use a minorization bound instead");
  }

  CVec mu(n);
  for (Eigen::Index i = 0; i < n; ++i) mu(i) = to_double(mu0[static_cast<StateIndex>(i)]);
  const CVec coeff = basis.fullPivLu().solve(mu);

  // Group numerically equal eigenvalues and project mu_0 onto each eigenspace.
  for (Eigen::Index k = 0; k < n;) {
    Eigen::Index end = k + 1;
    while (end < n && std::abs(out.eigenvalues[static_cast<std::size_t>(end)] -
                               out.eigenvalues[static_cast<std::size_t>(k)]) <
                          opt.cluster_tolerance)
      ++end;
    CVec proj = CVec::Zero(n);
    for (Eigen::Index i = k; i < end; ++i) proj += coeff(i) * basis.col(i);
    SpectralMode mode;
    mode.eigenvalue = out.eigenvalues[static_cast<std::size_t>(k)];
    mode.multiplicity = static_cast<int>(end - k);
    mode.projection.assign(proj.data(), proj.data() + n);
    mode.weight = proj.norm();
    out.modes.push_back(std::move(mode));
    k = end;
  }

  // Unit mode is the stationary law (scaled to sum one).
  const CVec v0 = basis.col(0);
  const std::complex<double> s = v0.sum();
  for (Eigen::Index i = 0; i < n; ++i) out.stationary.push_back((v0(i) / s).real());

  for (std::size_t m = 1; m < out.modes.size(); ++m) {
    const double c = std::abs(out.modes[m].projection[target]);
    if (c < opt.coefficient_floor) continue;
    out.coefficient += c;
    out.rate = std::max(out.rate, std::abs(out.modes[m].eigenvalue));
  }
  return out;
}

}  // namespace mcb
