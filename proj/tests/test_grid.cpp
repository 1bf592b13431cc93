#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vexp/grid.hpp"

using namespace vexp;

namespace {

GridFunction random_function(const GridDomain& d, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> v(d.node_count() * m);
  for (auto& x : v) x = U(rng);
  return GridFunction(d, m, std::move(v));
}

}  // namespace

TEST(GridDomain, CountsAndSpacing) {
  const auto d = GridDomain::box({0.0, 1.0}, {-1.0, 1.0}, 4, 8);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_EQ(d.node_count(), 5u * 9u);
  EXPECT_EQ(d.cell_count(), 32u);
  EXPECT_DOUBLE_EQ(d.spacing(0), 0.25);
  EXPECT_DOUBLE_EQ(d.spacing(1), 0.25);
  EXPECT_DOUBLE_EQ(d.cell_volume(), 0.0625);
  EXPECT_DOUBLE_EQ(d.measure(), 2.0);
  const auto c = d.node_coords(d.node_index(3, 7));
  EXPECT_EQ(c[0], 3);
  EXPECT_EQ(c[1], 7);
}

TEST(GridDomain, RejectsBadExtents) {
  EXPECT_THROW(GridDomain::interval(1.0, 0.0, 4), std::invalid_argument);
  EXPECT_THROW(GridDomain::interval(0.0, 1.0, 0), std::invalid_argument);
}

TEST(Gradient, ZeroForConstants) {
  const auto d = GridDomain::box({0.0, 1.0}, {0.0, 1.0}, 8, 8);
  const auto g = gradient(GridFunction::constant(d, 3.5));
  for (std::size_t c = 0; c < d.cell_count(); ++c) EXPECT_EQ(g.frobenius(c), 0.0);
}

TEST(Gradient, AffineIsExact) {
  const auto d = GridDomain::box({0.0, 1.0}, {0.0, 1.0}, 8, 8);
  const auto u = GridFunction::sample(d, [](const Point& x) { return 3.0 * x[0] - 2.0 * x[1]; });
  const auto g = gradient(u);
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    EXPECT_NEAR(g(c, 0, 0), 3.0, 1e-12);
    EXPECT_NEAR(g(c, 0, 1), -2.0, 1e-12);
  }
}

TEST(Gradient, Linear) {
  const auto d = GridDomain::box({0.0, 1.0}, {0.0, 2.0}, 6, 9);
  const auto u = random_function(d, 2, 1), v = random_function(d, 2, 2);
  const auto lhs = gradient(combine(2.0, u, -0.5, v));
  const auto gu = gradient(u), gv = gradient(v);
  for (std::size_t c = 0; c < d.cell_count(); ++c)
    for (int a = 0; a < 2; ++a)
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(lhs(c, a, k), 2.0 * gu(c, a, k) - 0.5 * gv(c, a, k), 1e-12);
}

TEST(Divergence, NegativeAdjointOfGradient) {
  for (int dim : {1, 2}) {
    const auto d = dim == 1 ? GridDomain::interval(-1.0, 1.0, 37) : GridDomain::box({0.0, 1.0}, {0.0, 2.0}, 7, 11);
    const auto u = random_function(d, 2, 3);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> w(d.cell_count() * 2 * dim);
    for (auto& x : w) x = U(rng);
    const TestField wf(d, 2, w);
    const auto g = gradient(u);
    double inner = 0.0;
    for (std::size_t c = 0; c < d.cell_count(); ++c)
      for (int a = 0; a < 2; ++a)
        for (int k = 0; k < dim; ++k) inner += g(c, a, k) * wf(c, a, k);
    inner *= d.cell_volume();
    EXPECT_NEAR(pairing(u, divergence(wf)), -inner, 1e-12 * (1.0 + std::abs(inner)));
  }
}

TEST(Integrate, MidpointRule) {
  const auto d = GridDomain::box({0.0, 1.0}, {0.0, 1.0}, 16, 16);
  std::vector<double> ones(d.cell_count(), 1.0), zeros(d.cell_count(), 0.0), sq(d.cell_count());
  for (std::size_t c = 0; c < sq.size(); ++c) sq[c] = d.cell_center(c)[0] * d.cell_center(c)[0];
  EXPECT_EQ(integrate(d, zeros), 0.0);
  EXPECT_NEAR(integrate(d, ones), 1.0, 1e-14);
  EXPECT_NEAR(integrate(d, sq), 1.0 / 3.0, 3e-3);
}

TEST(Integrate, MonotoneAndLinear) {
  const auto d = GridDomain::interval(0.0, 1.0, 32);
  std::vector<double> a(d.cell_count()), b(d.cell_count());
  for (std::size_t c = 0; c < a.size(); ++c) a[c] = std::sin(double(c)), b[c] = a[c] + 0.1;
  EXPECT_LT(integrate(d, a), integrate(d, b));
  std::vector<double> s(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) s[c] = 2.0 * a[c] + 3.0 * b[c];
  EXPECT_NEAR(integrate(d, s), 2.0 * integrate(d, a) + 3.0 * integrate(d, b), 1e-14);
}

TEST(Mollifier, WeightsFormAProbability) {
  const auto d = GridDomain::box({0.0, 1.0}, {0.0, 1.0}, 32, 32);
  const Mollifier eta(d, 0.2);
  double total = 0.0;
  for (const auto& t : eta.taps()) {
    EXPECT_GT(t.weight, 0.0);
    EXPECT_LT(std::hypot(t.di * d.spacing(0), t.dj * d.spacing(1)), 0.2);
    total += t.weight;
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(Mollifier, RejectsSubCellRadius) {
  const auto d = GridDomain::interval(0.0, 1.0, 16);
  EXPECT_THROW(Mollifier(d, 0.5 / 16), std::invalid_argument);
}

TEST(Mollify, PreservesConstantsAndContracts) {
  const auto d = GridDomain::box({0.0, 1.0}, {0.0, 1.0}, 20, 20);
  const auto c = mollify(GridFunction::constant(d, 2.5), Mollifier(d, 0.17));
  for (std::size_t i = 0; i < d.node_count(); ++i) EXPECT_NEAR(c(i), 2.5, 1e-13);
  const auto u = random_function(d, 1, 9);
  EXPECT_LE(mollify(u, Mollifier(d, 0.17)).max_abs(), u.max_abs() + 1e-14);
}

TEST(Mollify, StepKeepsTotalVariation) {
  const auto d = GridDomain::interval(-1.0, 1.0, 256);
  const auto u = GridFunction::sample(d, [](const Point& x) { return x[0] < 0.0 ? -1.0 : 1.0; });
  for (double delta : {0.02, 0.05, 0.1, 0.3}) {
    const auto v = mollify(u, Mollifier(d, delta));
    double tv = 0.0;
    bool monotone = true;
    for (std::size_t i = 1; i < d.node_count(); ++i) {
      tv += std::abs(v(i) - v(i - 1));
      if (v(i) < v(i - 1) - 1e-15) monotone = false;
    }
    EXPECT_TRUE(monotone);
    EXPECT_NEAR(tv, 2.0, 1e-12) << "delta " << delta;
  }
}

TEST(Mollify, ReflectsAtBoundary) {
  EXPECT_EQ(detail::reflect_index(-2, 10), 2);
  EXPECT_EQ(detail::reflect_index(12, 10), 8);
  EXPECT_EQ(detail::reflect_index(5, 10), 5);
}
