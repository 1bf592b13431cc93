#pragma once

// Variable-exponent ROF-type denoising:
//   E(u) = int f_eps(grad u)^p(x) dx + (lambda / 2) ||u - g||_2^2,
// with f_eps(xi) = sqrt(eps^2 + |xi|^2) - eps, minimized by gradient descent
// with Barzilai-Borwein trial steps and Armijo backtracking.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vexp/exponent.hpp"
#include "vexp/grid.hpp"

namespace vexp {

struct DenoiseProblem {
  GridFunction data;
  ExponentField p;
  double lambda = 1.0;
  /// Huber smoothing; 0 selects 1e-3 times the data range.
  double eps = 0.0;
  int max_iterations = 50000;
  double relative_tolerance = 1e-8;
};

struct DenoiseResult {
  GridFunction u;
  std::vector<double> trace;
  bool converged = false;
  double eps = 0.0;
};

namespace detail {

struct DenoiseEnergy {
  const GridFunction& g;
  const ExponentField& p;
  double lambda;
  double eps;

  double operator()(const std::vector<double>& u) const {
    const auto& d = g.domain();
    const GridFunction uf(d, 1, u);
    const auto grad = gradient(uf);
    CompensatedSum bulk, fid;
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
      const double r = grad.frobenius(c);
      const double f = r * r / (std::hypot(eps, r) + eps);
      const double q = p.at_cell(c);
      bulk.add(q == 1.0 ? f : std::pow(f, q));
    }
    for (std::size_t i = 0; i < u.size(); ++i) fid.add((u[i] - g(i)) * (u[i] - g(i)));
    return d.cell_volume() * (bulk.value() + 0.5 * lambda * fid.value());
  }

  std::vector<double> gradient_of(const std::vector<double>& u) const {
    const auto& d = g.domain();
    const GridFunction uf(d, 1, u);
    const auto grad = gradient(uf);
    const int n = d.dim();
    std::vector<double> w(d.cell_count() * n);
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
      const double r = grad.frobenius(c);
      if (r == 0.0) continue;
      const double root = std::hypot(eps, r);
      const double f = r * r / (root + eps);
      const double q = p.at_cell(c);
      const double outer = q == 1.0 ? 1.0 : q * std::pow(f, q - 1.0);
      for (int k = 0; k < n; ++k) w[c * n + k] = outer * grad(c, 0, k) / root;
    }
    const auto div = divergence(TestField(d, 1, std::move(w)));
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      out[i] = d.cell_volume() * (-div(i) + lambda * (u[i] - g(i)));
    return out;
  }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

inline DenoiseResult denoise(const DenoiseProblem& prob, const std::vector<double>& initial = {}) {
  const auto& g = prob.data;
  if (g.codim() != 1) throw std::invalid_argument("denoise: data must be scalar");
  if (!(g.domain() == prob.p.domain())) throw std::invalid_argument("denoise: data and exponent grids differ");
  if (!(prob.lambda > 0.0)) throw std::invalid_argument("denoise: lambda must be positive");
  if (!(prob.eps >= 0.0)) throw std::invalid_argument("denoise: eps must be positive");
  double eps = prob.eps;
  if (eps == 0.0) {
    const auto [lo, hi] = std::minmax_element(g.values().begin(), g.values().end());
    eps = 1e-3 * (*hi - *lo);
    if (eps == 0.0) eps = 1e-3;
  }
  const detail::DenoiseEnergy E{g, prob.p, prob.lambda, eps};
  std::vector<double> u = initial.empty() ? std::vector<double>(g.values().begin(), g.values().end()) : initial;
  if (u.size() != g.values().size()) throw std::invalid_argument("denoise: initial guess has the wrong size");

  DenoiseResult out{GridFunction(g), {}, false, eps};
  double e = E(u);
  out.trace.push_back(e);
  auto grad = E.gradient_of(u);
  double step = 1.0 / (prob.lambda * g.domain().cell_volume());
  std::vector<double> prev_u, prev_grad;
  for (int it = 0; it < prob.max_iterations; ++it) {
    const double gg = detail::dot(grad, grad);
    if (gg == 0.0) {
      out.converged = true;
      break;
    }
    if (!prev_u.empty()) {
      std::vector<double> s(u.size()), y(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) s[i] = u[i] - prev_u[i], y[i] = grad[i] - prev_grad[i];
      const double sy = detail::dot(s, y);
      if (sy > 0.0) step = detail::dot(s, s) / sy;
    }
    std::vector<double> trial(u.size());
    double et = e;
    bool accepted = false;
    for (int back = 0; back < 60; ++back) {
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] - step * grad[i];
      et = E(trial);
      if (et <= e - 1e-4 * step * gg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;  // no further decrease representable
      break;
    }
    prev_u = std::move(u);
    prev_grad = std::move(grad);
    u = trial;
    grad = E.gradient_of(u);
    const double rel = (e - et) / std::max(std::abs(e), 1e-300);
    e = et;
    out.trace.push_back(e);
    if (rel < prob.relative_tolerance) {
      out.converged = true;
      break;
    }
  }
  out.u = GridFunction(g.domain(), 1, std::move(u));
  return out;
}

}  // namespace vexp
