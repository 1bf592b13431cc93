#pragma once

// Dual variation V_phi^m(u) and dual modular rho_{V,phi}^m(u).
//
// Both are suprema of sum_alpha int u_alpha div w_alpha over test fields w.
// Because divergence() is the exact negative adjoint of gradient(), the
// pairing equals -int grad u : w, and the supremum decouples: for the dual
// modular cell by cell, for the dual variation through the Amemiya formula
//   V = inf_mu mu (1 + rho_phi(|grad u| / mu)),
// whose minimizer also yields the extremal test field. Every reported lower
// bound is the pairing of u with an explicit feasible w, evaluated through
// divergence().

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "vexp/grid.hpp"
#include "vexp/modular.hpp"
#include "vexp/phi.hpp"

namespace vexp {

struct DualOptions {
  int max_iterations = 5000;
  /// Stop when the best certified value changes by less than this, relatively,
  /// over `window` consecutive iterations.
  double relative_tolerance = 1e-8;
  int window = 10;
  /// Optional cell mask (1 = admissible support of w); empty means all cells.
  std::vector<char> cell_mask;
};

struct DualResult {
  /// Certified value: pairing of u with the returned feasible test field.
  double value = 0.0;
  /// Upper certificate (Amemiya value for V, pointwise conjugate bound for rho_V).
  double upper = 0.0;
  bool converged = true;
  int iterations = 0;
  std::optional<TestField> field;
  double gap() const { return upper - value; }
};

namespace detail {

inline std::vector<double> masked_norms(const GradientField& g, const std::vector<char>& mask) {
  if (!mask.empty() && mask.size() != g.domain().cell_count()) throw std::invalid_argument("dual: mask size mismatch");
  std::vector<double> t(g.domain().cell_count());
  for (std::size_t c = 0; c < t.size(); ++c) t[c] = (mask.empty() || mask[c]) ? g.frobenius(c) : 0.0;
  return t;
}

// w = -(G / |G|) * s per cell.
inline TestField oriented_field(const GradientField& g, const std::vector<double>& t, const std::vector<double>& s) {
  const auto& d = g.domain();
  const std::size_t ms = g.matrix_size();
  std::vector<double> w(d.cell_count() * ms, 0.0);
  for (std::size_t c = 0; c < t.size(); ++c) {
    if (t[c] == 0.0 || s[c] == 0.0) continue;
    const auto G = g.matrix(c);
    for (std::size_t e = 0; e < ms; ++e) w[c * ms + e] = -G[e] / t[c] * s[c];
  }
  return TestField(d, g.rows(), std::move(w));
}

inline double dual_pairing(const GridFunction& u, const TestField& w) { return pairing(u, divergence(w)); }

}  // namespace detail

/// sup { sum_alpha int u_alpha div w_alpha : ||w||_{phi*} <= 1 }.
inline DualResult dual_variation(const GridFunction& u, const PhiFunction& phi, const DualOptions& opt = {}) {
  detail::require_domain(phi, u.domain());
  const auto& d = u.domain();
  const auto g = gradient(u);
  const auto t = detail::masked_norms(g, opt.cell_mask);
  DualResult out;
  if (std::all_of(t.begin(), t.end(), [](double v) { return v == 0.0; })) {
    out.field = TestField::zeros(d, u.codim());
    return out;
  }
  const CellScalarField tf(d, t);
  const PhiFunction conj = phi.conjugate();
  auto rho = [&](double scale) { return detail::cell_modular(phi, tf, scale); };
  auto upper = [&](double mu) {
    const double r = rho(1.0 / mu);
    return std::isfinite(r) ? mu * (1.0 + r) : infinity;
  };
  // Feasible field from the Young-equality density s = phi'(|G| / mu),
  // normalized to the phi*-unit ball from the feasible side of the bracket.
  double best = 0.0;
  std::optional<TestField> best_field;
  auto certify = [&](double mu) {
    std::vector<double> s(t.size(), 0.0);
    for (std::size_t c = 0; c < t.size(); ++c) {
      if (t[c] == 0.0) continue;
      s[c] = phi.subgradient(Site::at_cell(c), t[c] / mu);
      if (!std::isfinite(s[c])) return;
    }
    const CellScalarField sf(d, s);
    const auto br = detail::luxemburg_bracket([&](double sc) { return detail::cell_modular(conj, sf, sc); },
                                              sf.max_abs(), d.measure());
    if (!(br.hi > 0.0)) return;
    for (double& v : s) v /= br.hi;
    auto w = detail::oriented_field(g, t, s);
    const double val = detail::dual_pairing(u, w);
    if (val > best || !best_field) {
      best = val;
      best_field = std::move(w);
    }
  };

  const double ref = luxemburg_norm(phi, tf);
  int k_best = 0;
  double u_best = upper(ref);
  for (int k = -60; k <= 60; ++k) {
    const double v = upper(std::ldexp(ref, k));
    if (v < u_best) u_best = v, k_best = k;
  }
  certify(std::ldexp(ref, k_best));
  double a = std::log(std::ldexp(ref, k_best - 1)), b = std::log(std::ldexp(ref, k_best + 1));
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), e = a + gr * (b - a);
  double fc = upper(std::exp(c)), fe = upper(std::exp(e));
  std::vector<double> history{best};
  out.converged = false;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (fc <= fe) {
      b = e, e = c, fe = fc;
      c = b - gr * (b - a), fc = upper(std::exp(c));
      certify(std::exp(c));
    } else {
      a = c, c = e, fc = fe;
      e = a + gr * (b - a), fe = upper(std::exp(e));
      certify(std::exp(e));
    }
    u_best = std::min({u_best, fc, fe});
    history.push_back(best);
    const int n = static_cast<int>(history.size());
    if (n > opt.window) {
      const double old = history[n - 1 - opt.window];
      const bool flat = std::abs(best - old) <= opt.relative_tolerance * std::max(std::abs(best), 1e-300);
      const bool closed = u_best - best <= opt.relative_tolerance * std::max(std::abs(best), 1e-300);
      if (flat || closed) {
        out.converged = true;
        ++it;
        break;
      }
    }
    if (b - a < 1e-15) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.value = best;
  out.upper = u_best;
  out.field = std::move(best_field);
  return out;
}

/// sup_w { sum_alpha int u_alpha div w_alpha - int phi*(x, |w|) }: the
/// maximizer is w = -(G/|G|) phi'(|G|) cell by cell, with value int phi(|G|).
inline DualResult dual_modular(const GridFunction& u, const PhiFunction& phi, const DualOptions& opt = {}) {
  detail::require_domain(phi, u.domain());
  const auto& d = u.domain();
  const auto g = gradient(u);
  const auto t = detail::masked_norms(g, opt.cell_mask);
  const PhiFunction conj = phi.conjugate();
  std::vector<double> s(t.size(), 0.0);
  CompensatedSum upper;
  for (std::size_t c = 0; c < t.size(); ++c) {
    if (t[c] == 0.0) continue;
    const Site site = Site::at_cell(c);
    upper.add(phi(site, t[c]));
    s[c] = phi.subgradient(site, t[c]);
    // Keep the field inside dom phi* under rounding (the Y branch is a hard |w| <= 1).
    while (std::isinf(conj(site, s[c])) && s[c] > 0.0) s[c] = std::nextafter(s[c], 0.0);
  }
  DualResult out;
  auto w = detail::oriented_field(g, t, s);
  CompensatedSum penalty;
  for (std::size_t c = 0; c < t.size(); ++c)
    if (s[c] > 0.0) penalty.add(conj(Site::at_cell(c), s[c]));
  out.value = detail::dual_pairing(u, w) - penalty.value() * d.cell_volume();
  out.upper = upper.value() * d.cell_volume();
  out.iterations = 1;
  out.field = std::move(w);
  return out;
}

}  // namespace vexp
