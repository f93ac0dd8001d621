#include <gtest/gtest.h>

#include <vector>

#include "generators.hpp"
#include "mcbound/finite_chain.hpp"

using mcb::ProbVector;
using mcb::Rational;
using mcb::StochasticMatrix;

namespace {

std::vector<Rational> q(std::initializer_list<const char*> xs) {
  std::vector<Rational> v;
  for (const char* s : xs) v.push_back(mcb::parse_rational(s));
  return v;
}

std::vector<Rational> row_of(const StochasticMatrix& p, std::size_t i) {
  const auto r = p.row(i);
  return {r.begin(), r.end()};
}

std::vector<Rational> column_of(const StochasticMatrix& p, std::size_t j) {
  std::vector<Rational> c;
  for (std::size_t i = 0; i < p.size(); ++i) c.push_back(p(i, j));
  return c;
}

}  // namespace

TEST(GridWalk, LazyNeighbourWeights) {
  const auto p = mcb::build_grid_walk(3, 3);
  ASSERT_EQ(p.size(), 9u);
  EXPECT_EQ(row_of(p, 0), q({"1/3", "1/3", "0", "1/3", "0", "0", "0", "0", "0"}));
  EXPECT_EQ(row_of(p, 1), q({"1/4", "1/4", "1/4", "0", "1/4", "0", "0", "0", "0"}));
  EXPECT_EQ(row_of(p, 4), q({"0", "1/5", "0", "1/5", "1/5", "1/5", "0", "1/5", "0"}));
}

TEST(GridWalk, SingleCellIsAbsorbing) {
  const auto p = mcb::build_grid_walk(1, 1);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p(0, 0), 1);
  const auto pi = mcb::stationary(p);
  EXPECT_EQ(pi[0], 1);
}

TEST(GridWalk, RejectsEmptyGrid) {
  EXPECT_THROW(mcb::build_grid_walk(0, 3), mcb::InvalidArgument);
}

TEST(MatrixPower, TwoStepOracle) {
  const auto p2 = mcb::matrix_power(mcb::build_grid_walk(3, 3), 2);
  EXPECT_EQ(row_of(p2, 0), q({"5/18", "7/36", "1/12", "7/36", "1/6", "0", "1/12", "0", "0"}));
  EXPECT_EQ(row_of(p2, 4), q({"1/10", "9/100", "1/10", "9/100", "6/25", "9/100", "1/10", "9/100", "1/10"}));
  EXPECT_EQ(column_of(p2, 4), q({"1/6", "9/80", "1/6", "9/80", "6/25", "9/80", "1/6", "9/80", "1/6"}));
  // Two-step probability of reaching G7 from G5.
  EXPECT_EQ(p2(4, 6), Rational(1, 10));
}

TEST(MatrixPower, ThreeStepOracle) {
  const auto p3 = mcb::matrix_power(mcb::build_grid_walk(3, 3), 3);
  EXPECT_EQ(row_of(p3, 4), q({"47/600", "823/6000", "47/600", "823/6000", "69/500", "823/6000", "47/600",
                              "823/6000", "47/600"}));
}

TEST(MatrixPower, ZeroIsIdentity) {
  const auto p0 = mcb::matrix_power(mcb::build_grid_walk(2, 3), 0);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(p0(i, j), i == j ? 1 : 0);
}

TEST(MatrixPower, ChapmanKolmogorovProperty) {
  auto g = gen::rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = gen::stochastic(g, gen::size(g, 1, 6));
    const unsigned long m = gen::size(g, 0, 4), n = gen::size(g, 0, 4);
    const auto lhs = mcb::matrix_power(p, m + n);
    const auto rhs = mcb::matrix_power(p, m).entries() * mcb::matrix_power(p, n).entries();
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < p.size(); ++j) ASSERT_EQ(lhs(i, j), rhs(i, j));
  }
}

TEST(MatrixPower, PowersStayStochastic) {
  auto g = gen::rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = gen::stochastic(g, gen::size(g, 1, 7));
    // Construction validates exact row sums; a failure would throw.
    EXPECT_NO_THROW(mcb::matrix_power(p, gen::size(g, 1, 9)));
  }
}

TEST(StochasticMatrix, RejectsInvalidRows) {
  mcb::SquareMatrix<Rational> m(2);
  m(0, 0) = Rational(1, 2);
  m(0, 1) = Rational(1, 3);
  m(1, 1) = 1;
  EXPECT_THROW(StochasticMatrix{m}, mcb::InvalidArgument);
  m(0, 1) = Rational(3, 2);
  m(0, 0) = Rational(-1, 2);
  EXPECT_THROW(StochasticMatrix{m}, mcb::InvalidArgument);
}

TEST(ProbVector, Validation) {
  EXPECT_THROW(ProbVector(std::vector<Rational>{Rational(1, 2), Rational(1, 3)}), mcb::InvalidArgument);
  EXPECT_THROW(ProbVector(std::vector<Rational>{Rational(3, 2), Rational(-1, 2)}), mcb::InvalidArgument);
  EXPECT_THROW(ProbVector(std::vector<Rational>{}), mcb::InvalidArgument);
  EXPECT_THROW(ProbVector::point_mass(3, 3), mcb::InvalidArgument);
}

TEST(Evolve, MatchesRowOfPower) {
  const auto p = mcb::build_grid_walk(3, 3);
  const auto mu0 = ProbVector::point_mass(9, 4);
  for (unsigned long n : {0UL, 1UL, 2UL, 3UL, 7UL}) {
    const auto mu = mcb::evolve(mu0, p, n);
    const auto pn = mcb::matrix_power(p, n);
    for (std::size_t j = 0; j < 9; ++j) EXPECT_EQ(mu[j], pn(4, j));
  }
}

TEST(Evolve, DimensionMismatch) {
  EXPECT_THROW(mcb::evolve(ProbVector::point_mass(4, 0), mcb::build_grid_walk(3, 3), 1), mcb::InvalidArgument);
}

TEST(Stationary, GridGoldenValue) {
  const auto pi = mcb::stationary(mcb::build_grid_walk(3, 3));
  const std::vector<Rational> expected = q({"1/11", "4/33", "1/11", "4/33", "5/33", "4/33", "1/11", "4/33", "1/11"});
  EXPECT_EQ(std::vector<Rational>(pi.entries().begin(), pi.entries().end()), expected);
}

TEST(Stationary, IsInvariantProperty) {
  auto g = gen::rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    const auto p = gen::positive_stochastic(g, gen::size(g, 1, 8));
    const auto pi = mcb::stationary(p);
    const auto next = mcb::step(pi, p);
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_EQ(next[i], pi[i]);
  }
}

TEST(Stationary, ReducibleChainIsRejected) {
  mcb::SquareMatrix<Rational> m(3);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 0) = Rational(1, 2);
  m(2, 1) = Rational(1, 2);
  EXPECT_THROW(mcb::stationary(StochasticMatrix{m}), mcb::MathError);
}

TEST(Stationary, PeriodicChainHasUniqueLaw) {
  mcb::SquareMatrix<Rational> m(2);
  m(0, 1) = 1;
  m(1, 0) = 1;
  const auto pi = mcb::stationary(StochasticMatrix{m});
  EXPECT_EQ(pi[0], Rational(1, 2));
  EXPECT_EQ(pi[1], Rational(1, 2));
}

TEST(TotalVariation, GridFromCentre) {
  const auto p = mcb::build_grid_walk(3, 3);
  const auto pi = mcb::stationary(p);
  const auto mu0 = ProbVector::point_mass(9, 4);
  const std::vector<Rational> expected = q({"28/33", "4/11", "103/825", "351/5500"});
  for (unsigned long n = 0; n < expected.size(); ++n) {
    EXPECT_EQ(mcb::tv_distance(mcb::evolve(mu0, p, n), pi), expected[n]) << n;
  }
}

TEST(TotalVariation, EqualsSupremumOverEventsProperty) {
  auto g = gen::rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = gen::size(g, 1, 9);
    const auto mu = gen::prob_vector(g, n);
    const auto nu = gen::prob_vector(g, n);
    Rational best = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      Rational diff = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) diff += mu[i] - nu[i];
      if (mcb::abs(diff) > best) best = mcb::abs(diff);
    }
    ASSERT_EQ(mcb::tv_distance(mu, nu), best);
    const auto a = mu.to_double(), b = nu.to_double();
    ASSERT_NEAR(mcb::tv_distance(std::span<const double>(a), std::span<const double>(b)), mcb::to_double(best),
                1e-15);
  }
}

TEST(TotalVariation, SelfDistanceIsZero) {
  const auto pi = mcb::stationary(mcb::build_grid_walk(2, 2));
  EXPECT_EQ(mcb::tv_distance(pi, pi), 0);
}
