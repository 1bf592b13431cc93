#pragma once

// Quasimodulars rho_phi, Luxemburg norms by bisection, and associate norms.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "vexp/grid.hpp"
#include "vexp/phi.hpp"

namespace vexp {

struct ModularValue {
  double value = 0.0;
  bool finite() const { return std::isfinite(value); }
};

namespace detail {
inline void require_domain(const PhiFunction& phi, const GridDomain& d) {
  if (phi.x_dependent() && !(phi.exponent()->domain() == d))
    throw std::invalid_argument("phi and field live on different grids");
}

// Sum of phi(cell, scale * |v_c|) * vol; stops early at +inf.
inline double cell_modular(const PhiFunction& phi, const CellScalarField& v, double scale) {
  CompensatedSum s;
  for (std::size_t c = 0; c < v.values().size(); ++c) {
    const double val = phi(Site::at_cell(c), scale * std::abs(v[c]));
    if (std::isinf(val)) return infinity;
    s.add(val);
  }
  return s.value() * v.domain().cell_volume();
}

// Nodal data: each cell takes the corner average of phi(node, |u(node)|).
inline double node_modular(const PhiFunction& phi, const GridFunction& u, double scale) {
  const auto& d = u.domain();
  std::vector<double> at_node(d.node_count());
  for (std::size_t i = 0; i < at_node.size(); ++i) {
    at_node[i] = phi(Site::node(i), scale * u.node_norm(i));
    if (std::isinf(at_node[i])) return infinity;
  }
  CompensatedSum s;
  const int corners = d.corner_count();
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const auto cn = d.cell_corners(c);
    double acc = 0.0;
    for (int k = 0; k < corners; ++k) acc += at_node[cn[k]];
    s.add(acc / corners);
  }
  return s.value() * d.cell_volume();
}

struct Bracket {
  double lo = 0.0;
  /// Feasible end: rho(1 / hi) <= 1.
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
};

/// Brackets inf{lambda > 0 : rho(1/lambda) <= 1} for a modular given as a
/// function of the scale 1/lambda.
template <class Rho>
Bracket luxemburg_bracket(Rho&& rho, double sup_abs, double measure) {
  if (sup_abs == 0.0) return {};
  double hi = std::max(1.0, sup_abs) * measure;
  double lo = hi * 1e-12;
  int guard = 0;
  while (!(rho(1.0 / hi) <= 1.0)) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 2100) throw std::runtime_error("luxemburg norm: modular is infinite at every scale");
  }
  guard = 0;
  while (rho(1.0 / lo) <= 1.0) {
    hi = lo;
    lo *= 0.5;
    if (++guard > 2100) return {0.0, lo};
  }
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (rho(1.0 / mid) <= 1.0) hi = mid;
    else lo = mid;
  }
  return {lo, hi};
}

template <class Rho>
double luxemburg_bisection(Rho&& rho, double sup_abs, double measure) {
  return luxemburg_bracket(std::forward<Rho>(rho), sup_abs, measure).mid();
}
}  // namespace detail

inline ModularValue modular(const PhiFunction& phi, const CellScalarField& v) {
  detail::require_domain(phi, v.domain());
  return {detail::cell_modular(phi, v, 1.0)};
}

inline ModularValue modular(const PhiFunction& phi, const GridFunction& u) {
  detail::require_domain(phi, u.domain());
  return {detail::node_modular(phi, u, 1.0)};
}

inline double luxemburg_norm(const PhiFunction& phi, const CellScalarField& v) {
  detail::require_domain(phi, v.domain());
  return detail::luxemburg_bisection([&](double s) { return detail::cell_modular(phi, v, s); }, v.max_abs(),
                                     v.domain().measure());
}

inline double luxemburg_norm(const PhiFunction& phi, const GridFunction& u) {
  detail::require_domain(phi, u.domain());
  return detail::luxemburg_bisection([&](double s) { return detail::node_modular(phi, u, s); }, u.max_abs(),
                                     u.domain().measure());
}

enum class AssociateMode {
  /// ||v||_{phi*}, equivalent to the associate norm up to a factor in [1, 2].
  equivalent,
  /// sup of the pairing over the phi-unit ball, via inf_k (1 + rho_{phi*}(k v)) / k.
  exact,
};

/// Minimizes lambda * (1 + rho(v / lambda)) over lambda > 0; the function is
/// convex in lambda, so a dyadic scan followed by golden section suffices.
template <class Rho>
double amemiya_minimum(Rho&& rho, double reference) {
  if (reference == 0.0) return 0.0;
  auto h = [&](double lambda) {
    const double r = rho(1.0 / lambda);
    return std::isfinite(r) ? lambda * (1.0 + r) : infinity;
  };
  int best = 0;
  double best_val = h(reference);
  for (int k = -60; k <= 60; ++k) {
    const double v = h(std::ldexp(reference, k));
    if (v < best_val) best_val = v, best = k;
  }
  double a = std::log(std::ldexp(reference, best - 1)), b = std::log(std::ldexp(reference, best + 1));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = h(std::exp(c)), fd = h(std::exp(d));
  while (b - a > 1e-13) {
    if (fc <= fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = h(std::exp(c));
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = h(std::exp(d));
    }
  }
  return std::min({best_val, fc, fd});
}

inline double associate_norm(const PhiFunction& phi, const CellScalarField& v,
                             AssociateMode mode = AssociateMode::equivalent) {
  const PhiFunction conj = phi.conjugate();
  const double lux = luxemburg_norm(conj, v);
  if (mode == AssociateMode::equivalent) return lux;
  return amemiya_minimum([&](double s) { return detail::cell_modular(conj, v, s); }, lux);
}

}  // namespace vexp
