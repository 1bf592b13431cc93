#pragma once

// Bracketing the lower semicontinuous envelope F(u, Omega): the closed-form
// relaxed energy from below, energies of mollified competitors from above.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vexp/energy.hpp"
#include "vexp/exponent.hpp"
#include "vexp/grid.hpp"
#include "vexp/integrand.hpp"
#include "vexp/modular.hpp"
#include "vexp/parallel.hpp"
#include "vexp/piecewise_bv.hpp"

namespace vexp {

/// delta_k = 2^-k diam / 8, k = 0..6, clipped below at two cells, duplicates dropped.
inline std::vector<double> default_deltas(const GridDomain& d) {
  const double floor = 2.0 * std::max(d.spacing(0), d.dim() == 2 ? d.spacing(1) : 0.0);
  std::vector<double> out;
  for (int k = 0; k <= 6; ++k) {
    const double delta = std::max(std::ldexp(d.diameter() / 8.0, -k), floor);
    if (out.empty() || delta < out.back()) out.push_back(delta);
  }
  return out;
}

struct UpperSample {
  double delta = 0.0;
  /// int f(grad u_delta)^p over cells farther than delta from Y.
  double bulk_zone = 0.0;
  /// Same integral over Y^delta.
  double y_zone = 0.0;
  /// int_{Y^delta} f(grad u_delta), the linear-growth part of the estimate.
  double y_zone_linear = 0.0;
  double omega = 0.0;
  /// bulk_zone + e^{2 omega} * y_zone_linear.
  double corrected = 0.0;
  double energy() const { return bulk_zone + y_zone; }
};

struct RelaxationBracket {
  double lower = 0.0;
  EnergyBreakdown representation;
  std::vector<UpperSample> samples;
  /// Energy of the competitor with the smallest delta (the sequence tail).
  double upper = 0.0;
  /// Smallest energy over all samples; informational only.
  double upper_min = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool valid = true;
  /// omega(delta) does not decrease towards 0 along the sweep.
  bool omega_warning = false;
};

/// Discretization allowance per unit of energy and cell width in the bracket tolerance.
inline constexpr double bracket_h_allowance = 2.0;

/// Cells within distance delta of Y (some corner node at distance <= delta).
inline std::vector<char> y_neighbourhood(const ExponentField& p, double delta) {
  std::vector<char> mask(p.domain().cell_count(), 0);
  if (!p.has_y()) return mask;
  for (std::size_t c = 0; c < mask.size(); ++c) mask[c] = p.cell_distance_to_y(c) <= delta;
  return mask;
}

inline UpperSample mollified_sample(const GridFunction& ud, const Integrand& f, const ExponentField& p, double delta) {
  const auto& d = ud.domain();
  const auto u_delta = mollify(ud, Mollifier(d, delta));
  const auto g = gradient(u_delta);
  const auto yd = y_neighbourhood(p, delta);
  UpperSample s;
  s.delta = delta;
  CompensatedSum bz, yz, yl;
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const double fv = f(g.matrix(c));
    const double r = p.at_cell(c);
    const double e = r == 1.0 ? fv : std::pow(fv, r);
    if (yd[c]) {
      yz.add(e);
      yl.add(fv);
    } else {
      bz.add(e);
    }
  }
  const double vol = d.cell_volume();
  s.bulk_zone = bz.value() * vol;
  s.y_zone = yz.value() * vol;
  s.y_zone_linear = yl.value() * vol;
  const auto om = strong_log_holder_modulus(p, {delta});
  s.omega = om.empty() ? 0.0 : om[0];
  s.corrected = s.bulk_zone + std::exp(2.0 * s.omega) * s.y_zone_linear;
  return s;
}

inline RelaxationBracket upper_sequence(const PiecewiseBVFunction& U, const Integrand& f, const ExponentField& p,
                                        std::vector<double> deltas = {}) {
  require_membership(U, p);
  const auto& d = U.domain();
  if (deltas.empty()) deltas = default_deltas(d);
  for (std::size_t k = 1; k < deltas.size(); ++k)
    if (!(deltas[k] < deltas[k - 1])) throw std::invalid_argument("upper_sequence: deltas must strictly decrease");
  RelaxationBracket b;
  b.representation = relaxed_energy(U, f, p);
  b.lower = b.representation.total;
  const auto ud = U.discretize();
  b.samples.resize(deltas.size());
  parallel_for(deltas.size(), [&](std::size_t k) { b.samples[k] = mollified_sample(ud, f, p, deltas[k]); });
  b.upper = b.samples.back().energy();
  b.upper_min = b.upper;
  for (const auto& s : b.samples) b.upper_min = std::min(b.upper_min, s.energy());
  b.gap = (b.upper - b.lower) / std::max(b.lower, 1e-12);
  const double h = std::max(d.spacing(0), d.dim() == 2 ? d.spacing(1) : 0.0);
  b.tolerance = 1e-6 * (1.0 + b.lower) + bracket_h_allowance * h * (1.0 + b.lower);
  b.valid = b.upper >= b.lower - b.tolerance;
  if (p.has_y() && b.samples.size() >= 2) {
    const double first = b.samples.front().omega, last = b.samples.back().omega;
    b.omega_warning = last > 0.0 && !(last < first);
  }
  return b;
}

struct CorrectionCheck {
  /// c = max over Y^delta cells of |grad u_delta| * delta.
  double c = 0.0;
  double omega = 0.0;
  /// delta <= 1/c, the regime where the estimate is claimed.
  bool applicable = false;
  bool holds = true;
  /// Largest (c / delta)^(p - 1) / e^{2 omega} over Y^delta nodes.
  double worst_ratio = 0.0;
};

/// Checks (c delta^-1)^(p(x) - 1) <= e^{2 omega(delta)} at the nodes of Y^delta.
inline CorrectionCheck correction_check(const PiecewiseBVFunction& U, const ExponentField& p, double delta) {
  const auto& d = U.domain();
  const auto u_delta = mollify(U.discretize(), Mollifier(d, delta));
  const auto g = gradient(u_delta);
  const auto yd = y_neighbourhood(p, delta);
  CorrectionCheck out;
  for (std::size_t c = 0; c < d.cell_count(); ++c)
    if (yd[c]) out.c = std::max(out.c, g.frobenius(c) * delta);
  const auto om = strong_log_holder_modulus(p, {delta});
  out.omega = om.empty() ? 0.0 : om[0];
  out.applicable = out.c > 0.0 && delta <= 1.0 / out.c;
  const double bound = std::exp(2.0 * out.omega);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    if (!(p.distance_to_y(i) <= delta)) continue;
    const double lhs = std::pow(out.c / delta, p.at_node(i) - 1.0);
    out.worst_ratio = std::max(out.worst_ratio, lhs / bound);
    if (out.applicable && lhs > bound * (1.0 + 1e-12)) out.holds = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cut-off profiles

struct CutoffProfile {
  Box inner;
  double band = 0.0;
  GridFunction zeta;
  /// Analytic bound: |grad zeta| <= C / band.
  double C = 1.5;
  /// Largest discrete |grad zeta| * band.
  double observed_C = 0.0;
};

/// zeta = s(1 - dist(x, inner) / band) with the smoothstep s(t) = 3t^2 - 2t^3
/// clamped to [0, 1]: 1 on the inner box, 0 beyond the band.
inline CutoffProfile make_cutoff(const GridDomain& d, const Box& inner, double band) {
  if (!(band > 0.0)) throw std::invalid_argument("cutoff: band must be positive");
  auto zeta = GridFunction::sample(d, [&](const Point& x) {
    double d2 = 0.0;
    for (int k = 0; k < d.dim(); ++k) {
      const double e = std::max({inner.lower[k] - x[k], 0.0, x[k] - inner.upper[k]});
      d2 += e * e;
    }
    const double t = std::clamp(1.0 - std::sqrt(d2) / band, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
  });
  CutoffProfile out{inner, band, zeta, 1.5, 0.0};
  const auto g = gradient(out.zeta);
  for (std::size_t c = 0; c < d.cell_count(); ++c) out.observed_C = std::max(out.observed_C, g.frobenius(c) * band);
  return out;
}

/// zeta u1 + (1 - zeta) u2.
inline GridFunction glue(const CutoffProfile& z, const GridFunction& u1, const GridFunction& u2) {
  if (!(u1.domain() == u2.domain()) || u1.codim() != u2.codim() || !(z.zeta.domain() == u1.domain()))
    throw std::invalid_argument("glue: mismatched grid functions");
  const int m = u1.codim();
  std::vector<double> v(u1.values().size());
  for (std::size_t i = 0; i < u1.domain().node_count(); ++i)
    for (int a = 0; a < m; ++a) v[i * m + a] = z.zeta(i) * u1(i, a) + (1.0 - z.zeta(i)) * u2(i, a);
  return GridFunction(u1.domain(), m, std::move(v));
}

// ---------------------------------------------------------------------------
// Local improvement of competitors

struct DescentOptions {
  int max_iterations = 200;
  double min_step = 1e-14;
};

/// Nodal gradient of bulk_energy (central differences of f per cell).
inline GridFunction bulk_energy_gradient(const GridFunction& u, const Integrand& f, const ExponentField& p) {
  const auto& d = u.domain();
  const auto g = gradient(u);
  const std::size_t ms = g.matrix_size();
  std::vector<double> dF(d.cell_count() * ms);
  std::vector<double> a(ms);
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const auto G = g.matrix(c);
    std::copy(G.begin(), G.end(), a.begin());
    const double r = p.at_cell(c);
    const double fv = f(a);
    const double outer = r == 1.0 ? 1.0 : r * std::pow(fv, r - 1.0);
    for (std::size_t e = 0; e < ms; ++e) {
      const double h = 1e-7 * (1.0 + std::abs(a[e]));
      const double keep = a[e];
      a[e] = keep + h;
      const double fp = f(a);
      a[e] = keep - h;
      const double fm = f(a);
      a[e] = keep;
      dF[c * ms + e] = outer * (fp - fm) / (2.0 * h);
    }
  }
  // E = vol sum F(grad u)  =>  dE/du = -vol div(DF).
  return scaled(divergence(TestField(d, u.codim(), std::move(dF))), -d.cell_volume());
}

/// Projected descent on bulk_energy inside {u : ||u - target||_{p(.)} <= eps},
/// re-projecting radially towards the target. Energy never increases.
inline GridFunction descent_improve(const GridFunction& u0, const GridFunction& target, const Integrand& f,
                                    const ExponentField& p, double eps, const DescentOptions& opt = {}) {
  if (!(eps >= 0.0)) throw std::invalid_argument("descent_improve: eps must be >= 0");
  const auto phi = PhiFunction::variable_exponent(p);
  const double dist0 = luxemburg_norm(phi, combine(1.0, u0, -1.0, target));
  if (dist0 > eps * (1.0 + 1e-9) + 1e-300)
    throw std::invalid_argument("descent_improve: u0 is outside the eps-ball around the target");
  if (eps == 0.0) return u0;
  auto project = [&](const GridFunction& u) {
    const auto diff = combine(1.0, u, -1.0, target);
    const double n = luxemburg_norm(phi, diff);
    if (n <= eps) return u;
    return combine(1.0, target, eps / n * (1.0 - 1e-12), diff);
  };
  GridFunction u = u0;
  double e = bulk_energy(u, f, p);
  double step = 1.0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const auto grad = bulk_energy_gradient(u, f, p);
    bool accepted = false;
    while (step > opt.min_step) {
      auto cand = project(combine(1.0, u, -step, grad));
      const double ec = bulk_energy(cand, f, p);
      if (ec < e) {
        u = std::move(cand);
        e = ec;
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return u;
}

// ---------------------------------------------------------------------------
// Lower semicontinuity probe

struct LscReport {
  bool converges = true;
  bool pass = true;
  double limit_value = 0.0;
  double tail_min = 0.0;
  /// tail_min - limit_value (negative margin means a violation beyond rounding).
  double margin = 0.0;
  std::vector<double> energies;
  std::vector<double> distances;
};

/// Checks relaxed_energy(U) <= min over the second half of bulk energies of a
/// sequence converging to U in the discrete p(.)-norm.
inline LscReport lsc_probe(const std::vector<GridFunction>& sequence, const PiecewiseBVFunction& U, const Integrand& f,
                           const ExponentField& p) {
  if (sequence.size() < 2) throw std::invalid_argument("lsc_probe: need at least two sequence elements");
  LscReport r;
  r.limit_value = relaxed_energy(U, f, p).total;
  const auto ud = U.discretize();
  const auto phi = PhiFunction::variable_exponent(p);
  for (const auto& u : sequence) {
    r.distances.push_back(luxemburg_norm(phi, combine(1.0, u, -1.0, ud)));
    r.energies.push_back(bulk_energy(u, f, p));
  }
  const double dmax = *std::max_element(r.distances.begin(), r.distances.end());
  r.converges = r.distances.back() <= 1e-2 * dmax || dmax <= 1e-12 * (1.0 + luxemburg_norm(phi, ud));
  if (!r.converges) throw std::invalid_argument("lsc_probe: sequence does not converge to the limit");
  const std::size_t tail = sequence.size() / 2;
  r.tail_min = *std::min_element(r.energies.begin() + static_cast<std::ptrdiff_t>(tail), r.energies.end());
  r.margin = r.tail_min - r.limit_value;
  r.pass = r.limit_value <= r.tail_min + 1e-6 * (1.0 + r.limit_value);
  return r;
}

// ---------------------------------------------------------------------------
// Smooth competitors

struct SmoothCompetitorReport {
  double general_upper = 0.0;
  double smooth_upper = 0.0;
  double ratio = 1.0;
  bool match = true;
};

/// The upper bracket recomputed from mollified competitors only. Every
/// competitor built by upper_sequence is already a mollification, so both
/// values come from the same construction and must agree.
inline SmoothCompetitorReport smooth_competitors_equivalence(const PiecewiseBVFunction& U, const Integrand& f,
                                                             const ExponentField& p) {
  SmoothCompetitorReport r;
  r.general_upper = upper_sequence(U, f, p).upper;
  const auto deltas = default_deltas(U.domain());
  const auto ud = U.discretize();
  r.smooth_upper = mollified_sample(ud, f, p, deltas.back()).energy();
  r.ratio = r.general_upper == 0.0 ? (r.smooth_upper == 0.0 ? 1.0 : infinity) : r.smooth_upper / r.general_upper;
  r.match = std::abs(r.ratio - 1.0) <= 1e-6;
  return r;
}

}  // namespace vexp
