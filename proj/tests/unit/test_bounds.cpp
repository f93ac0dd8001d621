#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mcbound/bounds.hpp"
#include "mcbound/kernels.hpp"
#include "mcbound/presets.hpp"

namespace {

std::uint64_t t1_threshold(double eps, std::uint64_t n0, double delta = 0.01) {
  return mcb::steps_to_threshold([&](std::uint64_t n) { return mcb::theorem1_bound(eps, n0, n); }, delta);
}

}  // namespace

// --- Theorem 1 -----------------------------------------------------------------------

TEST(Theorem1, BoundValues) {
  EXPECT_EQ(mcb::theorem1_bound(0.5, 1, 0), 1.0);
  EXPECT_EQ(mcb::theorem1_bound(0.5, 1, 3), 0.125);
  EXPECT_DOUBLE_EQ(mcb::theorem1_bound(9.0 / 80.0, 2, 5), std::pow(71.0 / 80.0, 2));
  EXPECT_EQ(mcb::theorem1_bound(1.0, 1, 1), 0.0);
  EXPECT_THROW(mcb::theorem1_bound(0.0, 1, 1), mcb::InvalidArgument);
  EXPECT_THROW(mcb::theorem1_bound(0.5, 0, 1), mcb::InvalidArgument);
}

TEST(Theorem1, KnownThresholds) {
  EXPECT_EQ(t1_threshold(9.0 / 80.0, 2), 78u);
  EXPECT_EQ(t1_threshold(1.0 / 3.0, 2), 24u);
  EXPECT_EQ(t1_threshold(0.117, 1), 38u);
  EXPECT_EQ(t1_threshold(mcb::lemma1_epsilon(0.1, 0.1), 1), 38u);
  EXPECT_EQ(t1_threshold(1.0, 1, 0.5), 1u);
}

TEST(Theorem1, HalfLineThresholdIsSeven) {
  // 2^-6 = 0.015625 is still above 0.01; the first n with 2^-n < 0.01 is 7.
  EXPECT_GT(mcb::theorem1_bound(0.5, 1, 6), 0.01);
  EXPECT_LT(mcb::theorem1_bound(0.5, 1, 7), 0.01);
  EXPECT_EQ(t1_threshold(0.5, 1), 7u);
}

TEST(Theorem1, ReportCrossing) {
  const auto r = mcb::theorem1_report(1.0 / 3.0, 2, 30, 0.01);
  EXPECT_EQ(r.curve.size(), 31u);
  ASSERT_TRUE(r.crossing.has_value());
  EXPECT_EQ(r.crossing->n, 24u);
}

TEST(StepsToThreshold, MatchesLinearScanProperty) {
  std::mt19937_64 g(51);
  std::uniform_real_distribution<double> eps(0.01, 0.99), delta(0.001, 0.5);
  std::uniform_int_distribution<std::uint64_t> n0(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const double e = eps(g), d = delta(g);
    const auto k = n0(g);
    std::uint64_t scan = 0;
    while (!(mcb::theorem1_bound(e, k, scan) < d)) ++scan;
    ASSERT_EQ(t1_threshold(e, k, d), scan);
  }
}

TEST(StepsToThreshold, Errors) {
  EXPECT_THROW(mcb::steps_to_threshold([](std::uint64_t) { return 1.0; }, 0.01, 1000), mcb::MathError);
  EXPECT_THROW(mcb::steps_to_threshold([](std::uint64_t) { return 0.0; }, 1.5), mcb::InvalidArgument);
  EXPECT_EQ(mcb::steps_to_threshold([](std::uint64_t) { return 0.0; }, 0.5), 0u);
}

// --- drift conversion ---------------------------------------------------------------

TEST(Drift, StationaryMomentBound) {
  EXPECT_NEAR(mcb::stationary_moment_bound(0.916, 0.285), 3.393, 0.001);
  EXPECT_THROW(mcb::stationary_moment_bound(1.0, 0.1), mcb::InvalidArgument);
}

TEST(Drift, LaplaceBivariateConversion) {
  const auto biv = mcb::bivariate_from_univariate(mcb::presets::laplace_drift(), std::exp(1.0));
  EXPECT_NEAR(1.0 / biv.alpha, 0.99264830509, 1e-10);
  EXPECT_NEAR(biv.h(1.0, -3.0), 0.5 * (std::exp(0.5) + std::exp(1.5)), 1e-14);
}

TEST(Drift, PreconditionFailureNamesInequality) {
  try {
    mcb::bivariate_from_univariate(mcb::presets::laplace_drift(), 2.0);
    FAIL() << "expected a MathError";
  } catch (const mcb::MathError& e) {
    EXPECT_NE(std::string(e.what()).find("d > b/(1-lambda) - 1 = 2.39"), std::string::npos) << e.what();
  }
}

TEST(Drift, BConstant) {
  const double eps = mcb::presets::laplace_epsilon();
  EXPECT_NEAR(mcb::b_constant(2, 1.0 / 0.9927, eps, 20.1), 20.04, 0.05);
  EXPECT_NEAR(mcb::b_constant(2, 1.0 / 0.99264830509, eps, std::exp(3.0)), 20.0393, 1e-3);
  EXPECT_EQ(mcb::b_constant(1, 1.01, 0.5, 0.1), 1.0);
}

TEST(Drift, LaplaceContainment) {
  const mcb::RwmLaplace k;
  const auto c = mcb::probe_grid(-2, 2, 0.25);
  EXPECT_LT(mcb::containment_defect(k, 2, c, {-6, 6}), 1e-10);
  EXPECT_GT(mcb::containment_defect(k, 2, c, {-5, 5}), 1e-3);
  EXPECT_LT(mcb::containment_defect(k, 1, c, {-4, 4}), 1e-10);
  const auto h = [](double x, double y) { return 0.5 * (mcb::presets::laplace_v(x) + mcb::presets::laplace_v(y)); };
  EXPECT_NEAR(mcb::sup_rh_via_containment(h, mcb::probe_grid(-6, 6, 0.5), 0.0), std::exp(3.0), 1e-12);
  EXPECT_THROW(mcb::sup_rh_via_containment(h, {0.0}, 0.1), mcb::MathError);
}

// --- Theorem 2 -----------------------------------------------------------------------

TEST(Theorem2, LaplacePipeline) {
  const auto p = mcb::presets::laplace_pipeline();
  EXPECT_NEAR(p.inv_alpha, 0.9927, 0.0005);
  EXPECT_NEAR(p.precondition, 2.39, 0.01);
  EXPECT_NEAR(p.sup_rh, std::exp(3.0), 1e-12);
  EXPECT_NEAR(p.b_const, 20.04, 0.05);
  EXPECT_EQ(p.eh, 2.0);
  EXPECT_NEAR(p.stationary_moment, 3.393, 0.001);
  EXPECT_LE(p.eh, p.eh_fallback);
  const auto checked = mcb::presets::laplace_pipeline(true);
  EXPECT_NEAR(checked.b_const, p.b_const, 1e-9);
  EXPECT_EQ(checked.sup_rh_source, mcb::Provenance::computed);
}

TEST(Theorem2, PresetScheduleIsBelowOnePercent) {
  const auto in = mcb::presets::laplace_pipeline().inputs;
  const auto v = mcb::theorem2_eval(in, 120000, 274);
  EXPECT_LT(v.value, 0.01);
  EXPECT_NEAR(v.log_term1, 274 * std::log1p(-in.epsilon), 1e-12);
  EXPECT_LT(v.log_term2, -60.0);
  // B^(j-1) overflows a double; long double has the range for a direct sum.
  const long double direct = std::pow(1.0L - in.epsilon, 274.0L) +
                             std::pow((long double)in.alpha, -120000.0L) *
                                 std::pow((long double)in.b_const, 273.0L) * in.eh;
  EXPECT_NEAR(v.value, static_cast<double>(direct), 1e-15);
}

TEST(Theorem2, BestJMatchesBruteForceProperty) {
  std::mt19937_64 g(61);
  std::uniform_real_distribution<double> eps(0.01, 0.5), alpha(1.001, 1.2), b(1.0, 30.0), eh(1.0, 5.0);
  std::uniform_int_distribution<std::uint64_t> n(1, 1500);
  for (int trial = 0; trial < 60; ++trial) {
    const mcb::Theorem2Inputs in{eps(g), 1, alpha(g), b(g), eh(g)};
    const auto nn = n(g);
    double best = INFINITY;
    for (std::uint64_t j = 1; j <= nn; ++j) best = std::min(best, mcb::theorem2_eval(in, nn, j).log_value);
    ASSERT_NEAR(mcb::theorem2_eval(in, nn, mcb::best_j(in, nn)).log_value, best, 1e-9) << trial;
  }
}

TEST(Theorem2, UnitBChoosesAllSteps) {
  const mcb::Theorem2Inputs in{0.2, 1, 1.05, 1.0, 2.0};
  for (std::uint64_t n : {1u, 10u, 100u}) {
    EXPECT_EQ(mcb::best_j(in, n), n);
    EXPECT_NEAR(mcb::theorem2_bound(in, n, n), std::pow(0.8, double(n)) + std::pow(1.05, -double(n)) * 2.0, 1e-14);
  }
}

TEST(Theorem2, StrongDriftApproachesTheorem1) {
  const mcb::Theorem2Inputs in{0.3, 1, 1e6, 1.0, 1.0};
  for (std::uint64_t n : {5u, 20u}) EXPECT_NEAR(mcb::theorem2_bound(in, n, n), std::pow(0.7, double(n)), 1e-12);
  const auto opt = mcb::optimize_theorem2(in, 0.01);
  EXPECT_EQ(opt.n, 13u);  // first n with 0.7^n < 0.01
}

TEST(Theorem2, OptimumIsSmallestFeasibleN) {
  const auto in = mcb::presets::laplace_pipeline().inputs;
  const auto opt = mcb::optimize_theorem2(in, 0.01);
  EXPECT_LT(opt.value.value, 0.01);
  EXPECT_LE(opt.n, 120000u);
  const auto before = opt.n - 1;
  EXPECT_GE(mcb::theorem2_bound(in, before, mcb::best_j(in, before)), 0.01);
  ASSERT_TRUE(opt.report.crossing.has_value());
  EXPECT_EQ(opt.report.crossing->n, opt.n);
}

TEST(Theorem2, InputValidation) {
  EXPECT_THROW(mcb::theorem2_eval({0.2, 1, 1.0, 1.0, 1.0}, 10, 1), mcb::InvalidArgument);
  EXPECT_THROW(mcb::theorem2_eval({0.2, 1, 1.1, 0.5, 1.0}, 10, 1), mcb::InvalidArgument);
  EXPECT_THROW(mcb::theorem2_eval({0.2, 1, 1.1, 1.0, 1.0}, 10, 11), mcb::InvalidArgument);
  EXPECT_THROW(mcb::theorem2_eval({0.2, 1, 1.1, 1.0, 1.0}, 10, 0), mcb::InvalidArgument);
}

TEST(Theorem2, FallbackStationaryExpectation) {
  const auto p = mcb::presets::assemble_theorem2(0.1, 1, 0.916, 0.285, std::exp(1.0), 5.0, std::nullopt,
                                                 std::nullopt, 1.0);
  EXPECT_EQ(p.eh_source, mcb::Provenance::fallback);
  EXPECT_NEAR(p.eh, 0.5 + 0.5 * 3.392857142857, 1e-9);
  EXPECT_THROW(mcb::presets::assemble_theorem2(0.1, 1, 0.916, 0.285, 2.0, 5.0, std::nullopt, 2.0),
               mcb::MathError);
  EXPECT_THROW(mcb::presets::assemble_theorem2(0.1, 1, 0.916, 0.285, 3.0, std::nullopt, std::nullopt, 2.0),
               mcb::InvalidArgument);
}

TEST(Theorem2, ScheduledJ) {
  EXPECT_EQ(mcb::scheduled_j(0, 438), 1u);
  EXPECT_EQ(mcb::scheduled_j(1000, 438), 3u);
  EXPECT_THROW(mcb::scheduled_j(10, 0), mcb::InvalidArgument);
}
