#pragma once

// Named test functions: smooth and step functions in 1D, a smooth ramp in
// 2D, each paired with constant, ramp and plateau exponents; plus the
// fixtures used for bracketing and denoising runs.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vexp/exponent.hpp"
#include "vexp/grid.hpp"
#include "vexp/piecewise_bv.hpp"

namespace vexp::corpus {

struct Case {
  std::string name;
  PiecewiseBVFunction U;
  ExponentField p;
  std::string exponent_spec;
};

/// Smooth part that vanishes left of x0 and grows like (x - x0)^2 / 2 after it,
/// so the cells around a jump placed left of x0 carry no smooth gradient.
inline double flat_then_quadratic(double x, double x0) {
  const double t = std::max(0.0, x - x0);
  return 0.5 * t * t;
}

inline Case smooth_1d(int cells, const std::string& exponent) {
  const auto d = GridDomain::interval(-1.0, 1.0, cells);
  auto u = GridFunction::sample(d, [](const Point& x) { return 0.3 * std::sin(std::numbers::pi * x[0]) + 0.2 * x[0]; });
  return {"smooth1d/" + exponent, PiecewiseBVFunction(std::move(u), {}), make_exponent(d, exponent), exponent};
}

/// Unit jump inside Y plus a smooth part that is flat near the jump. The jump
/// sits at -0.5 unless Y is the plateau around the origin.
inline Case step_1d(int cells, const std::string& exponent) {
  const auto d = GridDomain::interval(-1.0, 1.0, cells);
  const double xj = exponent.rfind("plateau-one", 0) == 0 ? 0.0 : -0.5;
  auto u = GridFunction::sample(d, [&](const Point& x) { return flat_then_quadratic(x[0], xj + 0.75); });
  return {"step1d/" + exponent, PiecewiseBVFunction(std::move(u), {JumpRecord::point(xj, {1.0})}),
          make_exponent(d, exponent), exponent};
}

inline Case ramp_2d(int cells, const std::string& exponent) {
  const auto d = GridDomain::box({-1.0, 1.0}, {-1.0, 1.0}, cells, cells);
  auto u = GridFunction::sample(d, [](const Point& x) { return 0.5 * x[0] + 0.25 * x[1] * x[1]; });
  return {"ramp2d/" + exponent, PiecewiseBVFunction(std::move(u), {}), make_exponent(d, exponent), exponent};
}

/// Twelve cases: smooth and step functions in 1D and a ramp in 2D, each with
/// four exponents.
inline std::vector<Case> duality_cases(int cells_1d = 256, int cells_2d = 48) {
  std::vector<Case> out;
  for (const char* e : {"constant:1", "constant:2", "ramp:0,0.25", "plateau-one:0.25"}) out.push_back(smooth_1d(cells_1d, e));
  for (const char* e : {"constant:1", "ramp:0,0.25", "plateau-one:0.25", "ramp:-0.25,0.25"})
    out.push_back(step_1d(cells_1d, e));
  for (const char* e : {"constant:1", "constant:2", "ramp:0,0.25", "plateau-one:0.25"}) out.push_back(ramp_2d(cells_2d, e));
  return out;
}

/// Step of height 2 at the origin on (-1, 1), p = 1.
inline Case unit_step(int cells) {
  const auto d = GridDomain::interval(-1.0, 1.0, cells);
  return {"step-height-2", PiecewiseBVFunction(GridFunction::constant(d, -1.0), {JumpRecord::point(0.0, {2.0})}),
          ExponentField::constant(d, 1.0), "constant:1"};
}

/// p = 1 on (-1, 0], rising linearly to 2 at 0.25; jump 1 at -0.5 and smooth
/// part x^2 on (0, 1).
inline Case mixed_exponent(int cells) {
  const auto d = GridDomain::interval(-1.0, 1.0, cells);
  auto u = GridFunction::sample(d, [](const Point& x) { return x[0] > 0.0 ? x[0] * x[0] : 0.0; });
  return {"mixed-exponent", PiecewiseBVFunction(std::move(u), {JumpRecord::point(-0.5, {1.0})}),
          make_exponent(d, "ramp:0,0.25"), "ramp:0,0.25"};
}

/// Step of height 1 between two nodes near the origin plus Gaussian noise.
inline GridFunction noisy_step(int cells, double sigma, std::uint64_t seed = 42) {
  const auto d = GridDomain::interval(-1.0, 1.0, cells);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const double x0 = 0.5 * d.spacing(0);
  std::vector<double> v(d.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (d.node_position(i)[0] > x0 ? 1.0 : 0.0) + noise(rng);
  return GridFunction(d, 1, std::move(v));
}

/// p = 1 within 0.1 of the origin, rising to 2 at 0.2.
inline ExponentField denoise_exponent(const GridDomain& d) { return make_exponent(d, "plateau-one:0.1"); }

}  // namespace vexp::corpus
