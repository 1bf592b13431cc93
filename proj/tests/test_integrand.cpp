#include <gtest/gtest.h>

#include <cmath>

#include "vexp/integrand.hpp"

using namespace vexp;

TEST(Recession, EuclideanIsItself) {
  const auto f = Integrand::euclidean();
  const auto r = recession(f, {3.0, -4.0});
  EXPECT_NEAR(r.value, 5.0, 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(recession(f, {0.0, 0.0}).value, 0.0);
}

TEST(Recession, SmoothedTendsToNorm) {
  const auto f = Integrand::smoothed(1.0);
  // (sqrt(1 + 9 t^2) - 1) / t -> 3
  EXPECT_NEAR(recession(f, {3.0}).value, 3.0, 1e-9);
  EXPECT_NEAR(recession(f, {0.0, 3.0}).value, 3.0, 1e-9);
}

TEST(Recession, PositivelyHomogeneous) {
  const auto f = Integrand::smoothed(0.5);
  const double a = recession(f, {1.0, 2.0}).value, b = recession(f, {2.5, 5.0}).value;
  EXPECT_NEAR(b, 2.5 * a, 1e-9 * b);
}

TEST(Recession, NonConvergentTailFlagged) {
  const auto f = Integrand::custom([](std::span<const double> xi) {
    const double r = euclidean_norm(xi);
    return r * (1.5 + 0.5 * std::sin(std::log(1.0 + r)));
  }, 0.0, 4.0, 1);
  EXPECT_FALSE(recession(f, {1.0}).converged);
}

TEST(GEnvelope, Examples) {
  EXPECT_NEAR(g_envelope(Integrand::euclidean(), {0.6, 0.8}), 1.0, 1e-12);
  EXPECT_NEAR(g_envelope(Integrand::smoothed(1.0), {2.0}), 2.0, 1e-9);
  EXPECT_EQ(g_envelope(Integrand::smoothed(1.0), {0.0}), 0.0);
  // g dominates f at t = 1.
  EXPECT_GE(g_envelope(Integrand::smoothed(1.0), {0.3}), Integrand::smoothed(1.0)({0.3}));
}

TEST(Integrand, WeightedConstantsFromSingularValues) {
  const auto f = Integrand::weighted({2.0, 0.0, 0.0, 0.5}, 2);
  EXPECT_EQ(f.m_low(), 0.5);
  EXPECT_EQ(f.M_up(), 2.0);
  EXPECT_NEAR(f({1.0, 1.0}), std::hypot(2.0, 0.5), 1e-15);
  EXPECT_THROW(Integrand::weighted({1.0, 2.0, 2.0, 4.0}, 2), std::invalid_argument);
  EXPECT_THROW(f({1.0}), std::invalid_argument);
}

TEST(Integrand, SmoothedAvoidsCancellation) {
  const auto f = Integrand::smoothed(1.0);
  EXPECT_NEAR(f({1e-9}), 0.5e-18, 1e-30);
  EXPECT_EQ(f.m_low(), 0.0);
}

TEST(Integrand, GrowthViolationRejected) {
  auto quad = [](std::span<const double> xi) {
    const double r = euclidean_norm(xi);
    return r * r;
  };
  EXPECT_THROW(Integrand::custom(quad, 0.0, 10.0, 1), std::invalid_argument);
  EXPECT_THROW(Integrand::custom([](std::span<const double>) { return 1.0; }, 0.0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(Integrand::custom(euclidean_norm, 2.0, 1.0, 1), std::invalid_argument);
}

TEST(Integrand, ScaledKeepsConstantsConsistent) {
  const auto f = Integrand::euclidean().scaled(3.0);
  EXPECT_EQ(f({4.0}), 12.0);
  EXPECT_EQ(f.m_low(), 3.0);
  EXPECT_EQ(f.M_up(), 3.0);
}

TEST(ParseIntegrand, Specs) {
  EXPECT_EQ(parse_integrand("euclidean").kind(), Integrand::Kind::euclidean);
  EXPECT_EQ(parse_integrand("smoothed:0.1").eps(), 0.1);
  EXPECT_EQ(parse_integrand("weighted:1,0,0,2").size(), 2);
  EXPECT_THROW(parse_integrand("weighted:1,0,0"), std::invalid_argument);
  EXPECT_THROW(parse_integrand("smoothed:abc"), std::invalid_argument);
  EXPECT_THROW(parse_integrand("huber:1"), std::invalid_argument);
}

TEST(Quasiconvexity, ConvexPasses) {
  const std::vector<double> xi = {0.7, -0.2};
  EXPECT_TRUE(quasiconvexity_test(Integrand::euclidean(), xi, 1, 2, 8, 2).pass);
  EXPECT_TRUE(quasiconvexity_test(Integrand::weighted({1.0, 0.3, 0.0, 2.0}, 2), xi, 2, 1, 8, 2).pass);
}

TEST(Quasiconvexity, ConcaveBumpFailsWithWitness) {
  // max(2|xi| - |xi|^2, 0) at xi = 1: a zig-zag perturbation with slopes +-1
  // lands on f = 0, so the average drops below f(1) = 1.
  const auto f = Integrand::custom([](std::span<const double> x) {
    const double r = euclidean_norm(x);
    return std::max(2.0 * r - r * r, 0.0);
  }, 0.0, 1.0, 1, "bump");
  const std::vector<double> xi = {1.0};
  const auto rep = quasiconvexity_test(f, xi, 1, 1);
  EXPECT_FALSE(rep.pass);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_LT(rep.min_value, rep.f_xi);
  const auto& w = rep.witness->values();
  EXPECT_EQ(w.front(), 0.0);
  EXPECT_EQ(w.back(), 0.0);
}

TEST(Truncation, PowerBranches) {
  EXPECT_DOUBLE_EQ(truncated_power(2.0, 2.0, 3.0), 4.0);
  EXPECT_DOUBLE_EQ(truncated_power(5.0, 2.0, 3.0), 21.0);
  EXPECT_DOUBLE_EQ(truncated_power(5.0, 2.0, 5.0), 25.0);
}

TEST(Truncation, RecessionOfTruncation) {
  const auto f = Integrand::euclidean();
  const std::vector<double> xi = {0.6, 0.8};
  EXPECT_NEAR(truncated_recession(f, 2.0, 4.0, xi), 8.0, 1e-12);
  EXPECT_NEAR(truncated_recession(f, 1.0, 4.0, xi), 1.0, 1e-12);
  EXPECT_NEAR(truncated_recession(f, 1.0, 40.0, xi), 1.0, 1e-12);
  EXPECT_EQ(truncated_recession(f, 2.0, 4.0, std::vector<double>{0.0, 0.0}), 0.0);
  EXPECT_THROW(truncated_recession(f, 2.0, 0.5, xi), std::invalid_argument);
}

TEST(Truncation, MonotoneInLevelAndBoundedByPower) {
  const auto d = GridDomain::interval(-1.0, 1.0, 16);
  const auto p = make_exponent(d, "ramp:0,0.5");
  const auto f = Integrand::smoothed(0.2);
  for (double x : {0.1, 1.0, 3.0, 12.0}) {
    const std::vector<double> xi = {x};
    for (std::size_t i = 0; i < d.node_count(); ++i) {
      double prev = 0.0;
      for (double j : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        const auto psi = truncated_integrand(f, p, j);
        const double v = psi(Site::node(i), xi);
        EXPECT_GE(v, prev * (1.0 - 1e-14));
        EXPECT_LE(v, std::pow(f(xi), p.at_node(i)) * (1.0 + 1e-14));
        if (j >= f(xi)) EXPECT_DOUBLE_EQ(v, std::pow(f(xi), p.at_node(i)));
        prev = v;
      }
    }
  }
}

TEST(Truncation, RecessionIsSlopeAtInfinity) {
  const auto d = GridDomain::interval(0.0, 1.0, 8);
  const auto psi = truncated_integrand(Integrand::euclidean(), make_exponent(d, "constant:1.5"), 3.0);
  const std::vector<double> xi = {1.0};
  const double t = 1e7;
  const std::vector<double> big = {t};
  EXPECT_NEAR(psi(Site::node(2), big) / t, psi.recession(Site::node(2), xi), 1e-5);
}
