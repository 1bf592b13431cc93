#include <gtest/gtest.h>

#include <cmath>

#include "vexp/corpus.hpp"
#include "vexp/energy.hpp"

using namespace vexp;

namespace {

const Integrand euclid = Integrand::euclidean();

Box interval_box(double a, double b) {
  Box box;
  box.lower = {a, 0.0};
  box.upper = {b, 0.0};
  return box;
}

}  // namespace

TEST(BulkEnergy, ConstantIsZero) {
  const auto d = GridDomain::interval(-1.0, 1.0, 32);
  EXPECT_EQ(bulk_energy(GridFunction::constant(d, 3.0), euclid, make_exponent(d, "ramp:0,0.5")), 0.0);
}

TEST(BulkEnergy, LinearWithSquareExponent) {
  const auto d = GridDomain::interval(-1.0, 1.0, 64);
  for (double a : {0.5, 1.0, 3.0}) {
    const auto u = GridFunction::sample(d, [a](const Point& x) { return a * x[0]; });
    EXPECT_NEAR(bulk_energy(u, euclid, ExponentField::constant(d, 2.0)), 2.0 * a * a, 1e-12 * a * a);
  }
}

TEST(BulkEnergy, UnitGradientIgnoresExponent) {
  const auto d = GridDomain::interval(0.0, 1.0, 64);
  const auto u = GridFunction::sample(d, [](const Point& x) { return x[0]; });
  const auto p = ExponentField::sample(d, [](const Point& x) { return 1.0 + x[0]; });
  EXPECT_NEAR(bulk_energy(u, euclid, p), 1.0, 1e-13);
}

TEST(RelaxedEnergy, StepOfHeightTwo) {
  const auto c = corpus::unit_step(64);
  const auto e = relaxed_energy(c.U, euclid, c.p);
  EXPECT_EQ(e.bulk, 0.0);
  EXPECT_NEAR(e.singular, 2.0, 1e-12);
  EXPECT_NEAR(e.total, 2.0, 1e-12);
}

TEST(RelaxedEnergy, SmoothHasNoSingularPart) {
  const auto c = corpus::smooth_1d(128, "constant:2");
  const auto e = relaxed_energy(c.U, euclid, c.p);
  EXPECT_EQ(e.singular, 0.0);
  EXPECT_EQ(e.total, e.bulk);
}

TEST(RelaxedEnergy, VerticalSegmentMassIsLength) {
  const auto d = GridDomain::box({-1.0, 1.0}, {-1.0, 1.0}, 16, 16);
  const PiecewiseBVFunction U(GridFunction::constant(d, 0.0), {JumpRecord::segment({0.0, 0.0}, {0.0, 0.5}, {1.0, 0.0}, {1.0})});
  const auto e = relaxed_energy(U, euclid, ExponentField::constant(d, 1.0));
  EXPECT_NEAR(e.singular, 0.5, 1e-12);
  EXPECT_EQ(e.bulk, 0.0);
}

TEST(RelaxedEnergy, JumpInYPlusQuadraticBulk) {
  // p = 1 on (-1, 0], p = 2 on (0, 1); jump 1 at -0.5, smooth part x^2 on (0, 1).
  // Energy = 1 + int_0^1 (2x)^2 dx = 1 + 4/3.
  const auto d = GridDomain::interval(-1.0, 1.0, 512);
  const auto p = make_exponent(d, "step:0,2");
  auto u = GridFunction::sample(d, [](const Point& x) { return x[0] > 0.0 ? x[0] * x[0] : 0.0; });
  const PiecewiseBVFunction U(std::move(u), {JumpRecord::point(-0.5, {1.0})});
  const auto e = relaxed_energy(U, euclid, p);
  EXPECT_NEAR(e.singular, 1.0, 1e-12);
  EXPECT_NEAR(e.bulk, 4.0 / 3.0, 1e-4);
}

TEST(RelaxedEnergy, JumpOutsideYRejected) {
  const auto d = GridDomain::interval(-1.0, 1.0, 64);
  const PiecewiseBVFunction U(GridFunction::constant(d, 0.0), {JumpRecord::point(0.5, {1.0})});
  const auto p = make_exponent(d, "step:0,2");
  EXPECT_THROW(relaxed_energy(U, euclid, p), JumpOutsideY);
  const auto m = bv_membership(U, p);
  EXPECT_FALSE(m.member);
  ASSERT_EQ(m.offending.size(), 1u);
  EXPECT_EQ(m.offending[0], 0u);
  EXPECT_TRUE(bv_membership(U, ExponentField::constant(d, 1.0)).member);
}

TEST(RelaxedEnergy, RestrictedToBox) {
  const auto c = corpus::unit_step(64);
  EXPECT_NEAR(relaxed_energy(c.U, euclid, c.p, interval_box(-0.1, 0.1)).singular, 2.0, 1e-12);
  EXPECT_EQ(relaxed_energy(c.U, euclid, c.p, interval_box(0.1, 0.9)).singular, 0.0);
}

TEST(MeasureProbe, HalvesAddUp) {
  for (const auto& c : {corpus::mixed_exponent(128), corpus::smooth_1d(128, "ramp:0,0.25")}) {
    const auto r = measure_probe(c.U, euclid, c.p, {interval_box(-1.0, 0.03125), interval_box(0.03125, 1.0)});
    EXPECT_LE(r.additivity_error, 1e-12) << c.name;
    EXPECT_NEAR(r.whole, r.sum_of_parts, 1e-12);
    EXPECT_GT(r.fitted_constant, 0.0);
  }
}

TEST(MeasureProbe, LocalizesToTheJump) {
  const auto c = corpus::unit_step(128);
  for (double r : {0.5, 0.25, 0.125, 0.0625}) EXPECT_NEAR(relaxed_energy(c.U, euclid, c.p, interval_box(-r, r)).total, 2.0, 1e-12);
}

TEST(MeasureProbe, RejectsOverlap) {
  const auto c = corpus::unit_step(64);
  EXPECT_THROW(measure_probe(c.U, euclid, c.p, {interval_box(-1.0, 0.1), interval_box(0.0, 1.0)}), std::invalid_argument);
}

TEST(MeasureProbe, FittedConstantStabilizes) {
  std::vector<double> cs;
  for (int cells : {64, 128, 256}) {
    const auto c = corpus::smooth_1d(cells, "ramp:0,0.25");
    cs.push_back(measure_probe(c.U, euclid, c.p, {interval_box(-1.0, 0.0), interval_box(0.0, 1.0)}).fitted_constant);
  }
  EXPECT_NEAR(cs[2], cs[1], 0.05 * cs[1]);
  EXPECT_LE(std::abs(cs[2] - cs[1]), std::abs(cs[1] - cs[0]) + 1e-3 * cs[1]);
}
