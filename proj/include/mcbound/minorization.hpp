#pragma once

// Minorization constants for finite chains and the exact TV curve used to
// validate every bound against the truth.

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "mcbound/bound_report.hpp"
#include "mcbound/finite_chain.hpp"

namespace mcb {

enum class MinorizationVariant { uniform, pseudo };

inline const char* to_string(MinorizationVariant v) {
  return v == MinorizationVariant::uniform ? "uniform" : "pseudo";
}

/// (C, n0, epsilon, nu) for a finite chain. For the pseudo variant the overlap
/// measure nu_ij is implicit: min{(P^n0)_iz, (P^n0)_jz} normalized over z.
struct MinorizationCert {
  MinorizationVariant variant = MinorizationVariant::uniform;
  std::vector<StateIndex> small_set;
  unsigned long n0 = 1;
  Rational epsilon;
  std::optional<ProbVector> nu;  // uniform variant only
  std::vector<std::pair<StateIndex, StateIndex>> argmin_pairs;  // pseudo only, i < j
  StochasticMatrix block;  // P^n0
};

/// Doeblin constant epsilon = sum_j min_i (P^n0)_ij. Returns nullopt when no
/// column of P^n0 is strictly positive.
inline std::optional<MinorizationCert> minorization_uniform(const StochasticMatrix& p,
                                                            unsigned long n0) {
  if (n0 == 0) throw InvalidArgument("n0 must be at least 1");
  auto block = matrix_power(p, n0);
  const std::size_t n = p.size();
  std::vector<Rational> col_min(n);
  Rational eps = 0;
  for (std::size_t j = 0; j < n; ++j) {
    Rational m = block(0, j);
    for (std::size_t i = 1; i < n; ++i) m = std::min(m, Rational(block(i, j)));
    col_min[j] = m;
    eps += m;
  }
  if (eps == 0) return std::nullopt;
  for (auto& v : col_min) v /= eps;

  MinorizationCert cert{.variant = MinorizationVariant::uniform,
                        .small_set = {},
                        .n0 = n0,
                        .epsilon = eps,
                        .nu = ProbVector(std::move(col_min)),
                        .argmin_pairs = {},
                        .block = std::move(block)};
  for (std::size_t i = 0; i < n; ++i) cert.small_set.push_back(i);
  return cert;
}

/// Overlap sum_z min{(Q)_iz, (Q)_jz} between two rows of Q.
inline Rational row_overlap(const StochasticMatrix& q, StateIndex i, StateIndex j) {
  Rational s = 0;
  for (std::size_t z = 0; z < q.size(); ++z) s += std::min(Rational(q(i, z)), Rational(q(j, z)));
  return s;
}

/// Pseudo-minorization constant: the smallest pairwise overlap of P^n0.
/// All pairs attaining the minimum are recorded in lexicographic order.
inline std::optional<MinorizationCert> minorization_pseudo(const StochasticMatrix& p,
                                                           unsigned long n0) {
  if (n0 == 0) throw InvalidArgument("n0 must be at least 1");
  auto block = matrix_power(p, n0);
  const std::size_t n = p.size();
  Rational eps = 1;
  std::vector<std::pair<StateIndex, StateIndex>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Rational ov = row_overlap(block, i, j);
      if (ov < eps) {
        eps = ov;
        pairs.clear();
      }
      if (ov == eps) pairs.emplace_back(i, j);
    }
  }
  if (eps == 0) return std::nullopt;

  MinorizationCert cert{.variant = MinorizationVariant::pseudo,
                        .small_set = {},
                        .n0 = n0,
                        .epsilon = eps,
                        .nu = std::nullopt,
                        .argmin_pairs = std::move(pairs),
                        .block = std::move(block)};
  for (std::size_t i = 0; i < n; ++i) cert.small_set.push_back(i);
  return cert;
}

/// The overlap measure used by a certificate for the pair (i, j).
inline ProbVector overlap_measure(const MinorizationCert& cert, StateIndex i, StateIndex j) {
  if (cert.variant == MinorizationVariant::uniform) return *cert.nu;
  const auto& q = cert.block;
  const Rational total = row_overlap(q, i, j);
  if (total == 0) throw MathError("rows have no overlap");
  std::vector<Rational> nu(q.size());
  for (std::size_t z = 0; z < q.size(); ++z) nu[z] = std::min(Rational(q(i, z)), Rational(q(j, z))) / total;
  return ProbVector(std::move(nu));
}

/// Exact certificate check: (P^n0)_iz >= eps * nu_ij(z) for all rows and all
/// pairs in the small set.
inline bool verify_certificate(const MinorizationCert& cert) {
  if (cert.epsilon <= 0 || cert.epsilon > 1) return false;
  const auto& q = cert.block;
  if (cert.variant == MinorizationVariant::uniform) {
    if (!cert.nu || cert.nu->size() != q.size()) return false;
    for (auto i : cert.small_set)
      for (std::size_t z = 0; z < q.size(); ++z)
        if (q(i, z) < cert.epsilon * (*cert.nu)[z]) return false;
    return true;
  }
  for (std::size_t a = 0; a < cert.small_set.size(); ++a) {
    for (std::size_t b = a + 1; b < cert.small_set.size(); ++b) {
      const auto i = cert.small_set[a];
      const auto j = cert.small_set[b];
      if (row_overlap(q, i, j) < cert.epsilon) return false;
      const ProbVector nu = overlap_measure(cert, i, j);
      for (std::size_t z = 0; z < q.size(); ++z) {
        const Rational floor = cert.epsilon * nu[z];
        if (q(i, z) < floor || q(j, z) < floor) return false;
      }
    }
  }
  return true;
}

/// Exact ||L(X_n) - pi||_TV for n = 0..n_max.
struct ExactTvCurve {
  ProbVector stationary;
  std::vector<Rational> values;
  BoundReport report;
};

inline ExactTvCurve exact_tv_curve(const ProbVector& mu0, const StochasticMatrix& p,
                                   unsigned long n_max) {
  if (mu0.size() != p.size()) throw InvalidArgument("distribution/matrix dimension mismatch");
  ProbVector pi = stationary(p);
  ExactTvCurve out{pi, {}, {}};
  out.report.kind = "exact-tv";
  ProbVector mu = mu0;
  for (unsigned long n = 0; n <= n_max; ++n) {
    if (n > 0) mu = step(mu, p);
    out.values.push_back(tv_distance(mu, pi));
    out.report.add_point(n, to_double(out.values.back()));
  }
  return out;
}

}  // namespace mcb
