#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vexp/phi.hpp"

using namespace vexp;

namespace {

// sup_t (s t - phi(t)) by dense scanning, independent of numeric_conjugate.
double scan_conjugate(const std::function<double(double)>& phi, double s, double t_max) {
  double best = 0.0;
  const int n = 2'000'000;
  for (int i = 1; i <= n; ++i) {
    const double t = t_max * i / n;
    best = std::max(best, s * t - phi(t));
  }
  return best;
}

PhiFunction ramp_phi(int cells = 64) {
  return PhiFunction::variable_exponent(make_exponent(GridDomain::interval(-1.0, 1.0, cells), "ramp:0,0.5"));
}

}  // namespace

TEST(Phi, VariableExponentValues) {
  const auto phi = ramp_phi(4);  // nodes -1, -0.5, 0, 0.5, 1
  EXPECT_EQ(phi(Site::node(0), 3.0), 3.0);
  EXPECT_NEAR(phi(Site::node(4), 3.0), 4.5, 1e-15);
  EXPECT_EQ(phi(Site::node(4), 0.0), 0.0);
}

TEST(Phi, ConjugateOnY) {
  const auto conj = ramp_phi().conjugate();
  EXPECT_EQ(conj(Site::node(0), 0.5), 0.0);
  EXPECT_EQ(conj(Site::node(0), 2.0), infinity);
}

TEST(Phi, ConjugateOfSquare) {
  const auto conj = PhiFunction::fixed_power(2.0).conjugate();
  EXPECT_NEAR(conj(Site{}, 3.0), 4.5, 1e-14);
  EXPECT_NEAR(scan_conjugate([](double t) { return t * t / 2.0; }, 3.0, 10.0), 4.5, 1e-9);
}

TEST(Phi, ConjugateMatchesScanOffY) {
  for (double q : {1.25, 1.5, 3.0}) {
    const auto phi = PhiFunction::fixed_power(q);
    const auto conj = phi.conjugate();
    for (double s : {0.3, 1.0, 2.5}) {
      const double oracle = scan_conjugate([q](double t) { return std::pow(t, q) / q; }, s, 40.0);
      EXPECT_NEAR(conj(Site{}, s), oracle, 1e-8 * (1.0 + oracle)) << "q=" << q << " s=" << s;
      EXPECT_NEAR(numeric_conjugate(phi, Site{}, s), oracle, 1e-8 * (1.0 + oracle));
    }
  }
}

TEST(Phi, DoubleConjugateIsIdentity) {
  const auto phi = ramp_phi();
  const auto back = phi.conjugate().conjugate();
  for (std::size_t i = 0; i < 65; i += 8)
    for (double t : {0.1, 1.0, 7.0}) EXPECT_EQ(back(Site::node(i), t), phi(Site::node(i), t));
}

TEST(Phi, FenchelYoungSampled) {
  const auto phi = ramp_phi();
  const auto conj = phi.conjugate();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int k = 0; k < 2000; ++k) {
    const Site s = Site::node(rng() % 65);
    const double t = std::pow(10.0, U(rng)), w = std::pow(10.0, U(rng));
    EXPECT_GE(phi(s, t) + conj(s, w), t * w * (1.0 - 1e-12));
  }
}

TEST(Phi, MaximizerAttainsConjugate) {
  const auto phi = ramp_phi();
  for (std::size_t i : {40u, 64u})
    for (double s : {0.5, 2.0}) {
      const Site site = Site::node(i);
      const double t = phi.maximizer(site, s);
      EXPECT_NEAR(s * t - phi(site, t), phi.conjugate()(site, s), 1e-12 * (1.0 + s * t));
    }
}

TEST(Phi, TabulatedConjugateIsExact) {
  const auto phi = PhiFunction::tabulated({0.0, 1.0, 2.0, 4.0}, {0.0, 0.5, 2.0, 6.0});
  ASSERT_TRUE(phi.convex());
  const auto conj = phi.conjugate();
  EXPECT_TRUE(conj.infinite_tail());
  for (double s : {0.2, 0.5, 1.0, 1.7, 2.0}) {
    const double oracle = scan_conjugate([&](double t) { return phi(Site{}, t); }, s, 50.0);
    EXPECT_NEAR(conj(Site{}, s), oracle, 1e-9) << "s=" << s;
  }
  EXPECT_EQ(conj(Site{}, 2.5), infinity);
  // Biconjugate of a convex table is the table itself.
  const auto back = conj.conjugate();
  for (double t : {0.5, 1.5, 3.0, 10.0}) EXPECT_NEAR(back(Site{}, t), phi(Site{}, t), 1e-12);
}

TEST(Phi, TabulatedValidation) {
  EXPECT_THROW(PhiFunction::tabulated({0.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(PhiFunction::tabulated({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(PhiFunction::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 0.5}), std::invalid_argument);
  EXPECT_FALSE(PhiFunction::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 1.5}).convex());
}

TEST(CheckA0, BetaSatisfiesTheInequality) {
  const auto phi = ramp_phi();
  const auto c = check_A0(phi);
  ASSERT_TRUE(c.pass);
  for (std::size_t i = 0; i < 65; ++i) {
    EXPECT_LE(phi(Site::node(i), c.constant), 1.0);
    EXPECT_GE(phi(Site::node(i), 1.0 / c.constant), 1.0);
  }
  // t^p/p at t = 1 is 1/p < 1, so beta = 1 fails wherever p > 1.
  EXPECT_LT(c.constant, 1.0);
}

TEST(CheckA0, PEqualOneGivesBetaOne) {
  const auto c = check_A0(PhiFunction::fixed_power(1.0));
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.constant, 1.0);
}

TEST(CheckA1, ConstantExponentNeedsNoShrinking) {
  for (double K : {0.5, 1.0, 4.0}) {
    const auto c = check_A1(PhiFunction::variable_exponent(ExponentField::constant(GridDomain::interval(0.0, 1.0, 32), 1.6)), K);
    EXPECT_TRUE(c.pass);
    EXPECT_EQ(c.constant, 1.0);
  }
}

TEST(CheckA1, LogHoelderRampPasses) {
  const auto c = check_A1(PhiFunction::variable_exponent(make_exponent(GridDomain::interval(-1.0, 1.0, 64), "ramp:0,0.5")), 1.0);
  EXPECT_TRUE(c.pass);
  EXPECT_GT(c.constant, 0.0);
  EXPECT_LE(c.constant, 1.0);
}

TEST(CheckInc, PowerPasses) {
  const auto phi = PhiFunction::fixed_power(2.0);
  const auto inc = check_aInc(phi, 2.0);
  EXPECT_TRUE(inc.pass);
  EXPECT_NEAR(inc.constant, 1.0, 1e-12);
  EXPECT_TRUE(check_aDec(phi, 2.0).pass);
  EXPECT_TRUE(check_aInc(phi, 1.5).pass);
}

TEST(CheckInc, ExponentAbovePowerFailsWithWitness) {
  const auto c = check_aInc(PhiFunction::fixed_power(2.0), 2.1);
  EXPECT_FALSE(c.pass);
  EXPECT_TRUE(c.witness_x.has_value());
  EXPECT_TRUE(std::isfinite(c.witness_t));
  EXPECT_FALSE(check_aDec(PhiFunction::fixed_power(2.0), 1.9).pass);
}

TEST(CheckInc, VariableExponentUsesExtremes) {
  const auto phi = ramp_phi();
  EXPECT_TRUE(check_aInc(phi, 1.0).pass);
  EXPECT_TRUE(check_aDec(phi, 2.0).pass);
  EXPECT_FALSE(check_aInc(phi, 1.5).pass);
}

TEST(CheckOptions, RejectsCoarseGrid) {
  CheckOptions o;
  o.points_per_decade = 4;
  EXPECT_THROW(check_A0(PhiFunction::fixed_power(2.0), o), std::invalid_argument);
}
