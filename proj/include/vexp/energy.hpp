#pragma once

// Bulk energy int f(grad u)^p(x) dx and the relaxed representation
//   F(U, A) = int_A f(grad u)^p(x) dx + sum over jumps in A of f^inf(jump (x) nu) * length,
// valid for U in BV^{p(.)} (jumps inside {p = 1}).

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "vexp/exponent.hpp"
#include "vexp/grid.hpp"
#include "vexp/integrand.hpp"
#include "vexp/piecewise_bv.hpp"
#include "vexp/variation.hpp"

namespace vexp {

/// Open axis-aligned box.
struct Box {
  Point lower{0.0, 0.0};
  Point upper{0.0, 0.0};

  static Box whole(const GridDomain& d) {
    Box b;
    for (int k = 0; k < d.dim(); ++k) b.lower[k] = d.extent(k).lower, b.upper[k] = d.extent(k).upper;
    return b;
  }
  bool contains(const Point& x, int dim) const {
    for (int k = 0; k < dim; ++k)
      if (!(x[k] > lower[k] && x[k] < upper[k])) return false;
    return true;
  }
  double measure(int dim) const {
    double m = 1.0;
    for (int k = 0; k < dim; ++k) m *= upper[k] - lower[k];
    return m;
  }
};

/// Cells whose centre lies in the box.
inline std::vector<char> cell_mask(const GridDomain& d, const Box& a) {
  std::vector<char> mask(d.cell_count());
  for (std::size_t c = 0; c < mask.size(); ++c) mask[c] = a.contains(d.cell_center(c), d.dim());
  return mask;
}

struct EnergyBreakdown {
  double bulk = 0.0;
  double singular = 0.0;
  double total = 0.0;
};

/// Per-cell densities f(grad u)^p_cell (not yet multiplied by the cell volume).
inline std::vector<double> energy_density(const GridFunction& u, const Integrand& f, const ExponentField& p) {
  if (!(u.domain() == p.domain())) throw std::invalid_argument("energy: grid mismatch");
  const auto g = gradient(u);
  std::vector<double> e(g.domain().cell_count());
  for (std::size_t c = 0; c < e.size(); ++c) {
    const double fv = f(g.matrix(c));
    const double r = p.at_cell(c);
    e[c] = r == 1.0 ? fv : std::pow(fv, r);
  }
  return e;
}

inline double bulk_energy(const GridFunction& u, const Integrand& f, const ExponentField& p,
                          const std::vector<char>& mask = {}) {
  auto e = energy_density(u, f, p);
  if (!mask.empty()) {
    if (mask.size() != e.size()) throw std::invalid_argument("bulk_energy: mask size mismatch");
    for (std::size_t c = 0; c < e.size(); ++c)
      if (!mask[c]) e[c] = 0.0;
  }
  return integrate(u.domain(), e);
}

/// H^{n-1} measure of the part of a jump inside an open box (0 if outside).
inline double jump_length_in(const JumpRecord& j, const Box& a, int dim) {
  if (dim == 1) return a.contains(j.from, 1) ? 1.0 : 0.0;
  const int across = j.normal[0] != 0.0 ? 0 : 1;
  const int along = 1 - across;
  if (!(j.from[across] > a.lower[across] && j.from[across] < a.upper[across])) return 0.0;
  const double lo = std::max(std::min(j.from[along], j.to[along]), a.lower[along]);
  const double hi = std::min(std::max(j.from[along], j.to[along]), a.upper[along]);
  return std::max(0.0, hi - lo);
}

inline EnergyBreakdown relaxed_energy(const PiecewiseBVFunction& U, const Integrand& f, const ExponentField& p,
                                      const std::optional<Box>& a = std::nullopt) {
  require_membership(U, p);
  const auto& d = U.domain();
  const Box box = a.value_or(Box::whole(d));
  EnergyBreakdown out;
  out.bulk = bulk_energy(U.smooth(), f, p, a ? cell_mask(d, box) : std::vector<char>{});
  CompensatedSum s;
  for (const auto& j : U.jumps()) {
    const double len = jump_length_in(j, box, d.dim());
    if (len == 0.0) continue;
    s.add(recession(f, j.outer(d.dim())).value * len);
  }
  out.singular = s.value();
  out.total = out.bulk + out.singular;
  return out;
}

struct MeasureProbeReport {
  std::vector<EnergyBreakdown> parts;
  std::vector<double> variations;
  double whole = 0.0;
  double sum_of_parts = 0.0;
  double additivity_error = 0.0;
  /// Smallest C with total(A) <= C (|A| + V_A + V_A^{p+}) over the boxes.
  double fitted_constant = 0.0;
};

/// Additivity of the relaxed energy over a partition into disjoint open boxes
/// and the growth constant against the dual variation on each box.
inline MeasureProbeReport measure_probe(const PiecewiseBVFunction& U, const Integrand& f, const ExponentField& p,
                                        const std::vector<Box>& boxes) {
  const auto& d = U.domain();
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t k = i + 1; k < boxes.size(); ++k) {
      bool overlap = true;
      for (int a = 0; a < d.dim(); ++a)
        if (boxes[i].upper[a] <= boxes[k].lower[a] || boxes[k].upper[a] <= boxes[i].lower[a]) overlap = false;
      if (overlap) throw std::invalid_argument("measure_probe: boxes overlap");
    }
  MeasureProbeReport r;
  r.whole = relaxed_energy(U, f, p).total;
  const auto ud = U.discretize();
  const auto phi = PhiFunction::variable_exponent(p);
  CompensatedSum s;
  for (const auto& b : boxes) {
    const auto part = relaxed_energy(U, f, p, b);
    r.parts.push_back(part);
    s.add(part.total);
    DualOptions opt;
    opt.cell_mask = cell_mask(d, b);
    const double V = dual_variation(ud, phi, opt).value;
    r.variations.push_back(V);
    const double denom = b.measure(d.dim()) + V + std::pow(V, p.p_plus());
    r.fitted_constant = std::max(r.fitted_constant, part.total / denom);
  }
  r.sum_of_parts = s.value();
  r.additivity_error = std::abs(r.sum_of_parts - r.whole);
  return r;
}

}  // namespace vexp
