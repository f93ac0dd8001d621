#pragma once

// Exact analysis of finite-state Markov chains.
//
// Transition matrices and distributions are held as exact rationals so that
// constants like 9/80 or the stationary law of the grid walk come out exactly.
// States are 0-based internally; user-facing labels (G1..Gn) are 1-based.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcbound/errors.hpp"
#include "mcbound/rational.hpp"

namespace mcb {

using StateIndex = std::size_t;

/// Dense row-major square matrix.
template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, const T& fill = T(0)) : n_(n), data_(n * n, fill) {}

  static SquareMatrix identity(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t size() const { return n_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  std::span<const T> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

template <class T>
SquareMatrix<T> operator*(const SquareMatrix<T>& a, const SquareMatrix<T>& b) {
  if (a.size() != b.size()) throw InvalidArgument("matrix dimension mismatch");
  const std::size_t n = a.size();
  SquareMatrix<T> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const T& aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

/// Row-stochastic matrix with exact rational entries. The invariant (entries
/// in [0,1], every row summing to exactly 1) is checked on construction.
class StochasticMatrix {
 public:
  explicit StochasticMatrix(SquareMatrix<Rational> entries) : p_(std::move(entries)) {
    if (p_.size() == 0) throw InvalidArgument("stochastic matrix must have at least one state");
    for (std::size_t i = 0; i < p_.size(); ++i) {
      Rational sum = 0;
      for (const auto& v : p_.row(i)) {
        if (v < 0 || v > 1) {
          throw InvalidArgument("entry out of [0,1] in row " + std::to_string(i + 1));
        }
        sum += v;
      }
      if (sum != 1) {
        throw InvalidArgument("row " + std::to_string(i + 1) + " sums to " + to_string(sum) +
                              ", not 1");
      }
    }
  }

  std::size_t size() const { return p_.size(); }
  const Rational& operator()(StateIndex i, StateIndex j) const { return p_(i, j); }
  std::span<const Rational> row(StateIndex i) const { return p_.row(i); }
  const SquareMatrix<Rational>& entries() const { return p_; }

  SquareMatrix<double> to_double() const {
    SquareMatrix<double> d(size());
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) d(i, j) = mcb::to_double(p_(i, j));
    return d;
  }

  friend bool operator==(const StochasticMatrix&, const StochasticMatrix&) = default;

 private:
  SquareMatrix<Rational> p_;
};

/// Exact probability vector: nonnegative entries summing to exactly 1.
class ProbVector {
 public:
  explicit ProbVector(std::vector<Rational> entries) : p_(std::move(entries)) {
    if (p_.empty()) throw InvalidArgument("probability vector must be non-empty");
    Rational sum = 0;
    for (const auto& v : p_) {
      if (v < 0) throw InvalidArgument("negative probability");
      sum += v;
    }
    if (sum != 1) throw InvalidArgument("probabilities sum to " + to_string(sum) + ", not 1");
  }

  static ProbVector point_mass(std::size_t size, StateIndex state) {
    if (state >= size) throw InvalidArgument("point mass state out of range");
    std::vector<Rational> v(size, Rational(0));
    v[state] = 1;
    return ProbVector(std::move(v));
  }

  std::size_t size() const { return p_.size(); }
  const Rational& operator[](StateIndex i) const { return p_[i]; }
  std::span<const Rational> entries() const { return p_; }

  std::vector<double> to_double() const {
    std::vector<double> d;
    d.reserve(p_.size());
    for (const auto& v : p_) d.push_back(mcb::to_double(v));
    return d;
  }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<Rational> p_;
};

// ---------------------------------------------------------------------------
// Construction and evolution
// ---------------------------------------------------------------------------

/// Lazy walk on a rows x cols grid: from each cell, stay or move to one
/// orthogonal neighbour, all with probability 1/(deg+1). Cells are numbered
/// row-major, top-to-bottom and left-to-right.
inline StochasticMatrix build_grid_walk(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw InvalidArgument("grid dimensions must be positive");
  const std::size_t n = rows * cols;
  SquareMatrix<Rational> p(n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::vector<StateIndex> targets{r * cols + c};
      if (r > 0) targets.push_back((r - 1) * cols + c);
      if (r + 1 < rows) targets.push_back((r + 1) * cols + c);
      if (c > 0) targets.push_back(r * cols + c - 1);
      if (c + 1 < cols) targets.push_back(r * cols + c + 1);
      const Rational w(1, static_cast<unsigned long>(targets.size()));
      for (auto t : targets) p(r * cols + c, t) = w;
    }
  }
  return StochasticMatrix(std::move(p));
}

/// Exact n-step transition matrix by repeated squaring.
inline StochasticMatrix matrix_power(const StochasticMatrix& p, unsigned long n) {
  auto result = SquareMatrix<Rational>::identity(p.size());
  auto base = p.entries();
  while (n > 0) {
    if (n & 1UL) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return StochasticMatrix(std::move(result));
}

/// One step of mu <- mu P.
inline ProbVector step(const ProbVector& mu, const StochasticMatrix& p) {
  if (mu.size() != p.size()) throw InvalidArgument("distribution/matrix dimension mismatch");
  std::vector<Rational> next(p.size(), Rational(0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (mu[i] == 0) continue;
    for (std::size_t j = 0; j < p.size(); ++j) next[j] += mu[i] * p(i, j);
  }
  return ProbVector(std::move(next));
}

/// Distribution after n steps, mu_n = mu_0 P^n.
inline ProbVector evolve(const ProbVector& mu0, const StochasticMatrix& p, unsigned long n) {
  if (mu0.size() != p.size()) throw InvalidArgument("distribution/matrix dimension mismatch");
  ProbVector mu = mu0;
  for (unsigned long k = 0; k < n; ++k) mu = step(mu, p);
  return mu;
}

// ---------------------------------------------------------------------------
// Stationary distribution
// ---------------------------------------------------------------------------

namespace detail {

// Reduces `a` (rows x cols, row-major) to reduced row echelon form in place
// and returns the pivot columns.
inline std::vector<std::size_t> rref(std::vector<std::vector<Rational>>& a) {
  std::vector<std::size_t> pivots;
  if (a.empty()) return pivots;
  const std::size_t rows = a.size();
  const std::size_t cols = a.front().size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t pivot = r;
    while (pivot < rows && a[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[pivot], a[r]);
    const Rational inv = 1 / a[r][c];
    for (auto& v : a[r]) v *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c] == 0) continue;
      const Rational f = a[i][c];
      for (std::size_t k = c; k < cols; ++k) a[i][k] -= f * a[r][k];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace detail

/// Exact stationary distribution from Gaussian elimination on (P^T - I)
/// plus the normalization row. Throws MathError when the unit left
/// eigenspace has dimension greater than one.
inline ProbVector stationary(const StochasticMatrix& p) {
  const std::size_t n = p.size();
  // Rows: (P^T - I) pi = 0, then sum(pi) = 1. Augmented with the rhs column.
  std::vector<std::vector<Rational>> a(n + 1, std::vector<Rational>(n + 1, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = p(j, i);
    a[i][i] -= 1;
  }
  for (std::size_t j = 0; j < n; ++j) a[n][j] = 1;
  a[n][n] = 1;

  // rank(P^T - I) alone decides uniqueness.
  std::vector<std::vector<Rational>> homogeneous(a.begin(), a.begin() + static_cast<long>(n));
  for (auto& row : homogeneous) row.pop_back();
  const auto rank = detail::rref(homogeneous).size();
  if (rank + 1 < n) {
    throw MathError("stationary distribution is not unique (unit eigenspace has dimension " +
                    std::to_string(n - rank) + ")");
  }

  const auto pivots = detail::rref(a);
  if (pivots.size() != n) throw MathError("stationary system is singular");
  std::vector<Rational> pi(n);
  for (std::size_t r = 0; r < n; ++r) pi[pivots[r]] = a[r][n];
  for (const auto& v : pi) {
    if (v < 0) throw MathError("stationary solve produced a negative probability");
  }
  return ProbVector(std::move(pi));
}

// ---------------------------------------------------------------------------
// Total variation
// ---------------------------------------------------------------------------

/// sup_A |mu(A) - nu(A)|, computed as half the L1 distance.
inline Rational tv_distance(const ProbVector& mu, const ProbVector& nu) {
  if (mu.size() != nu.size()) throw InvalidArgument("distribution dimension mismatch");
  Rational sum = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) sum += abs(Rational(mu[i] - nu[i]));
  return sum / 2;
}

inline double tv_distance(std::span<const double> mu, std::span<const double> nu) {
  if (mu.size() != nu.size()) throw InvalidArgument("distribution dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) sum += mu[i] > nu[i] ? mu[i] - nu[i] : nu[i] - mu[i];
  return 0.5 * sum;
}

}  // namespace mcb
