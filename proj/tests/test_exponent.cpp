#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vexp/exponent.hpp"

using namespace vexp;

namespace {

double brute_log_holder(const ExponentField& p) {
  const auto& d = p.domain();
  double best = 0.0;
  for (std::size_t i = 0; i < d.node_count(); ++i)
    for (std::size_t j = i + 1; j < d.node_count(); ++j) {
      const Point a = d.node_position(i), b = d.node_position(j);
      const double r = std::hypot(a[0] - b[0], a[1] - b[1]);
      best = std::max(best, std::abs(p.at_node(i) - p.at_node(j)) * std::log(std::numbers::e + 1.0 / r));
    }
  return best;
}

}  // namespace

TEST(ExponentField, SnapsNearOneIntoY) {
  const auto d = GridDomain::interval(0.0, 1.0, 4);
  const ExponentField p(d, {1.0 + 1e-13, 1.5, 2.0, 2.0, 2.0});
  EXPECT_EQ(p.at_node(0), 1.0);
  EXPECT_TRUE(p.in_y(0));
  EXPECT_FALSE(p.in_y(1));
  EXPECT_EQ(p.y_count(), 1u);
  EXPECT_EQ(p.p_minus(), 1.0);
  EXPECT_EQ(p.p_plus(), 2.0);
}

TEST(ExponentField, RejectsBelowOneAndNonFinite) {
  const auto d = GridDomain::interval(0.0, 1.0, 4);
  EXPECT_THROW(ExponentField(d, {0.9, 1.0, 1.0, 1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(ExponentField(d, {1.0, 1.0, 1.0, 1.0, std::numeric_limits<double>::infinity()}), std::invalid_argument);
}

TEST(ExponentField, CellInYOnlyWhenAllCornersAre) {
  const auto d = GridDomain::interval(0.0, 1.0, 4);
  const ExponentField p(d, {1.0, 1.0, 1.0 + 1e-11, 1.5, 1.5});
  EXPECT_TRUE(p.cell_in_y(0));
  EXPECT_FALSE(p.cell_in_y(1));
  EXPECT_GT(p.at_cell(1), 1.0);
}

TEST(MakeExponent, BuiltinShapes) {
  const auto d = GridDomain::interval(-1.0, 1.0, 8);
  const auto ramp = make_exponent(d, "ramp:0,0.5");
  EXPECT_EQ(ramp.at_node(0), 1.0);
  EXPECT_EQ(ramp.at_node(5), 1.5);  // x = 0.25
  EXPECT_EQ(ramp.at_node(8), 2.0);
  const auto plateau = make_exponent(d, "plateau-one:0.25");
  EXPECT_EQ(plateau.at_node(4), 1.0);
  EXPECT_EQ(plateau.at_node(0), 2.0);
  const auto step = make_exponent(d, "step:0,1.5");
  EXPECT_EQ(step.at_node(4), 1.0);
  EXPECT_EQ(step.at_node(5), 1.5);
  EXPECT_THROW(make_exponent(d, "ramp:1"), std::invalid_argument);
  EXPECT_THROW(make_exponent(d, "wave:1"), std::invalid_argument);
  EXPECT_THROW(make_exponent(d, "constant:x"), std::invalid_argument);
}

TEST(LogHolder, ConstantIsZero) {
  EXPECT_EQ(log_holder_constant(ExponentField::constant(GridDomain::interval(0.0, 1.0, 64), 1.5)), 0.0);
}

TEST(LogHolder, MatchesBruteForce) {
  const auto d = GridDomain::interval(0.0, 1.0, 64);
  const auto p = ExponentField::sample(d, [](const Point& x) { return 1.0 + x[0]; });
  EXPECT_NEAR(log_holder_constant(p), brute_log_holder(p), 1e-14);
  const auto d2 = GridDomain::box({0.0, 1.0}, {0.0, 1.0}, 12, 12);
  const auto q = ExponentField::sample(d2, [](const Point& x) { return 1.0 + 0.5 * x[0] * x[1]; });
  EXPECT_NEAR(log_holder_constant(q), brute_log_holder(q), 1e-14);
}

TEST(LogHolder, UnitJumpIsLarge) {
  const auto d = GridDomain::interval(0.0, 1.0, 64);
  const auto p = make_exponent(d, "step:0.5,2");
  EXPECT_GE(log_holder_constant(p), std::log(std::numbers::e + 64.0) - 1e-12);
}

TEST(LogHolder, InvariantUnderShift) {
  const auto d = GridDomain::interval(0.0, 1.0, 64);
  const auto p = ExponentField::sample(d, [](const Point& x) { return 1.0 + x[0] * x[0]; });
  const auto q = ExponentField::sample(d, [](const Point& x) { return 1.5 + x[0] * x[0]; });
  EXPECT_NEAR(log_holder_constant(p), log_holder_constant(q), 1e-14);
}

TEST(LogHolder, StridedSubsetStillSeesNeighbours) {
  const auto d = GridDomain::interval(0.0, 1.0, 8192);
  const auto p = make_exponent(d, "step:0.5,2");
  EXPECT_GE(log_holder_constant(p), std::log(std::numbers::e + 8192.0) - 1e-12);
}

TEST(DistanceToY, MatchesBruteForce2D) {
  const auto d = GridDomain::box({0.0, 1.0}, {0.0, 2.0}, 13, 21);
  std::mt19937_64 rng(5);
  std::vector<double> v(d.node_count());
  for (auto& x : v) x = (rng() % 11 == 0) ? 1.0 : 1.7;
  const ExponentField p(d, v);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d.node_count(); ++j)
      if (v[j] == 1.0) best = std::min(best, distance(d.node_position(i), d.node_position(j)));
    EXPECT_NEAR(p.distance_to_y(i), best, 1e-12);
  }
}

TEST(StrongModulus, EmptyWithoutY) {
  EXPECT_TRUE(strong_log_holder_modulus(ExponentField::constant(GridDomain::interval(0.0, 1.0, 8), 2.0), {0.1}).empty());
}

TEST(StrongModulus, ZeroWhenAllOfOmegaIsY) {
  const auto om = strong_log_holder_modulus(ExponentField::constant(GridDomain::interval(0.0, 1.0, 8), 1.0), {0.1, 0.5});
  EXPECT_EQ(om[0], 0.0);
  EXPECT_EQ(om[1], 0.0);
}

TEST(StrongModulus, MatchesPairwiseDefinition) {
  const auto d = GridDomain::interval(-1.0, 1.0, 128);
  const auto p = ExponentField::sample(d, [](const Point& x) { return 1.0 + std::max(0.0, x[0]); });
  const std::vector<double> radii = {0.5, 0.1, 0.03};
  const auto om = strong_log_holder_modulus(p, radii);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double best = 0.0;
    for (std::size_t i = 0; i < d.node_count(); ++i)
      for (std::size_t y = 0; y < d.node_count(); ++y) {
        if (!p.in_y(y) || i == y) continue;
        const double r = std::abs(d.node_position(i)[0] - d.node_position(y)[0]);
        if (r > radii[k]) continue;
        best = std::max(best, (p.at_node(i) - 1.0) * std::log(std::numbers::e + 1.0 / r));
      }
    EXPECT_NEAR(om[k], best, 1e-13) << "r = " << radii[k];
  }
}

TEST(StrongModulus, RampTendsToZeroJumpDiverges) {
  double prev_ramp = std::numeric_limits<double>::infinity(), prev_jump = 0.0;
  for (int cells : {64, 256, 1024}) {
    const auto d = GridDomain::interval(-1.0, 1.0, cells);
    const double r = 2.0 * d.spacing(0);
    const double ramp = strong_log_holder_modulus(make_exponent(d, "ramp:0,0.25"), {r})[0];
    const double jump = strong_log_holder_modulus(make_exponent(d, "step:0,1.5"), {r})[0];
    EXPECT_LT(ramp, prev_ramp);
    EXPECT_GT(jump, prev_jump);
    EXPECT_GE(jump, 0.5 * std::log(std::numbers::e + 1.0 / d.spacing(0)) - 1e-12);
    prev_ramp = ramp, prev_jump = jump;
  }
}

TEST(BallCondition, ConstantExponentGivesOne) {
  EXPECT_EQ(ball_condition_constant(ExponentField::constant(GridDomain::interval(0.0, 1.0, 64), 1.7), 200), 1.0);
}

TEST(BallCondition, DeterministicForSeed) {
  const auto d = GridDomain::box({0.0, 1.0}, {0.0, 1.0}, 32, 32);
  const auto p = make_exponent(d, "plateau-one:0.2");
  EXPECT_EQ(ball_condition_constant(p, 300, 9), ball_condition_constant(p, 300, 9));
}

TEST(BallCondition, BoundedForRampLargeForJump) {
  for (int cells : {64, 1024}) {
    const auto d = GridDomain::interval(-1.0, 1.0, cells);
    const double r = ball_condition_constant(make_exponent(d, "ramp:0,0.25"), 2000);
    const double j = ball_condition_constant(make_exponent(d, "step:0,2"), 2000);
    // slope 4: oscillation on a ball of radius r is at most 8r, and (2r)^{-8r} <= e^{4/e}.
    const double ramp_bound = std::exp(4.0 / std::numbers::e);
    EXPECT_LE(r, ramp_bound + 1e-12) << cells;
    EXPECT_GT(j, 1.5 * ramp_bound) << cells;
    EXPECT_LE(j, 1.0 / (2.0 * d.spacing(0)) + 1e-9) << cells;
  }
}
