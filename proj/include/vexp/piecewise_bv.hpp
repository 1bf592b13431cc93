#pragma once

// Explicit BV candidates: a nodal smooth part plus a list of jumps, each
// carrying the rank-one singular direction (u+ - u-) (x) nu.
//
// In 1D a jump is a point x_j with normal +1. In 2D it is an axis-aligned
// segment on a grid line; only segments that cross the whole domain can be
// turned into nodal data by discretize().

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vexp/exponent.hpp"
#include "vexp/grid.hpp"

namespace vexp {

struct JumpRecord {
  Point from{0.0, 0.0};
  Point to{0.0, 0.0};
  Point normal{1.0, 0.0};
  /// u+ - u-, the + side being the one nu points into.
  std::vector<double> jump;

  static JumpRecord point(double x, std::vector<double> jump) {
    return {{x, 0.0}, {x, 0.0}, {1.0, 0.0}, std::move(jump)};
  }
  static JumpRecord segment(Point from, Point to, Point normal, std::vector<double> jump) {
    return {from, to, normal, std::move(jump)};
  }

  bool is_point() const { return from == to; }
  /// H^{n-1} measure: 1 for a point in 1D, the segment length in 2D.
  double length() const { return is_point() ? 1.0 : distance(from, to); }
  double height() const {
    double s = 0.0;
    for (double v : jump) s += v * v;
    return std::sqrt(s);
  }
  double mass() const { return height() * length(); }
  /// jump (x) nu as an m x dim row-major matrix.
  std::vector<double> outer(int dim) const {
    std::vector<double> a(jump.size() * dim);
    for (std::size_t r = 0; r < jump.size(); ++r)
      for (int k = 0; k < dim; ++k) a[r * dim + k] = jump[r] * normal[k];
    return a;
  }
  /// dD^s u / d|D^s u| on this jump.
  std::vector<double> direction(int dim) const {
    auto a = outer(dim);
    const double h = height();
    for (double& v : a) v /= h;
    return a;
  }
};

class JumpOutsideY : public std::domain_error {
 public:
  JumpOutsideY(std::size_t index, Point location)
      : std::domain_error("jump " + std::to_string(index) + " at (" + std::to_string(location[0]) + ", " +
                          std::to_string(location[1]) + ") lies outside {p = 1}; u is not in BV^{p(.)}"),
        index_(index),
        location_(location) {}
  std::size_t index() const { return index_; }
  const Point& location() const { return location_; }

 private:
  std::size_t index_;
  Point location_;
};

class PiecewiseBVFunction {
 public:
  PiecewiseBVFunction(GridFunction smooth, std::vector<JumpRecord> jumps)
      : smooth_(std::move(smooth)), jumps_(std::move(jumps)) {
    const auto& d = smooth_.domain();
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      validate(d, jumps_[k], k);
      if (jumps_[k].jump.size() != static_cast<std::size_t>(smooth_.codim()))
        throw std::invalid_argument("jump " + std::to_string(k) + ": jump vector length differs from codim");
    }
  }

  const GridFunction& smooth() const { return smooth_; }
  const std::vector<JumpRecord>& jumps() const { return jumps_; }
  const GridDomain& domain() const { return smooth_.domain(); }
  int codim() const { return smooth_.codim(); }

  /// |D^s u|(Omega).
  double singular_mass() const {
    double s = 0.0;
    for (const auto& j : jumps_) s += j.mass();
    return s;
  }

  /// Nodal values of the full function: smooth part plus jump * H(nu . (x - x_j)),
  /// with H(0) = 1/2 for nodes on the jump.
  GridFunction discretize() const {
    const auto& d = domain();
    const int m = codim();
    std::vector<double> v(smooth_.values().begin(), smooth_.values().end());
    for (const auto& j : jumps_) {
      if (d.dim() == 2 && !spans_domain(d, j))
        throw std::invalid_argument("discretize: 2D jump segments must cross the whole domain");
      for (std::size_t node = 0; node < d.node_count(); ++node) {
        const Point x = d.node_position(node);
        double s = 0.0;
        for (int k = 0; k < d.dim(); ++k) s += j.normal[k] * (x[k] - j.from[k]);
        const double tol = 1e-9 * d.min_spacing();
        const double H = s > tol ? 1.0 : (s < -tol ? 0.0 : 0.5);
        if (H == 0.0) continue;
        for (int a = 0; a < m; ++a) v[node * m + a] += H * j.jump[a];
      }
    }
    return GridFunction(d, m, std::move(v));
  }

  /// Cells whose closure meets the jump; the discretized jump lives there.
  static std::vector<std::size_t> touched_cells(const GridDomain& d, const JumpRecord& j) {
    std::vector<std::size_t> out;
    const double tol = 1e-9 * d.min_spacing();
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
      const auto cc = d.cell_coords(c);
      bool meets = true;
      for (int k = 0; k < d.dim(); ++k) {
        const double lo = d.extent(k).lower + cc[k] * d.spacing(k);
        const double hi = lo + d.spacing(k);
        const double a = std::min(j.from[k], j.to[k]), b = std::max(j.from[k], j.to[k]);
        if (b < lo - tol || a > hi + tol) meets = false;
      }
      if (meets) out.push_back(c);
    }
    return out;
  }

  static bool spans_domain(const GridDomain& d, const JumpRecord& j) {
    const double tol = 1e-9 * d.min_spacing();
    for (int k = 0; k < 2; ++k) {
      if (j.normal[k] != 0.0) continue;  // running direction
      const double a = std::min(j.from[k], j.to[k]), b = std::max(j.from[k], j.to[k]);
      return a <= d.extent(k).lower + tol && b >= d.extent(k).upper - tol;
    }
    return false;
  }

 private:
  static void validate(const GridDomain& d, const JumpRecord& j, std::size_t k) {
    const std::string where = "jump " + std::to_string(k) + ": ";
    if (j.jump.empty()) throw std::invalid_argument(where + "empty jump vector");
    if (!(j.height() > 0.0)) throw std::invalid_argument(where + "jump vector must be nonzero");
    for (double v : j.jump)
      if (!std::isfinite(v)) throw std::invalid_argument(where + "non-finite jump");
    const double tol = 1e-9 * d.min_spacing();
    if (d.dim() == 1) {
      if (!j.is_point()) throw std::invalid_argument(where + "1D jumps are points");
      if (!d.contains_open(j.from)) throw std::invalid_argument(where + "location must lie strictly inside the domain");
      return;
    }
    if (j.is_point()) throw std::invalid_argument(where + "2D jumps are segments");
    const bool vertical = std::abs(j.from[0] - j.to[0]) <= tol;
    const bool horizontal = std::abs(j.from[1] - j.to[1]) <= tol;
    if (vertical == horizontal) throw std::invalid_argument(where + "segment must be axis-aligned");
    const int across = vertical ? 0 : 1;
    if (std::abs(std::abs(j.normal[across]) - 1.0) > 1e-12 || j.normal[1 - across] != 0.0)
      throw std::invalid_argument(where + "normal must be the unit vector across the segment");
    const double line = (j.from[across] - d.extent(across).lower) / d.spacing(across);
    if (std::abs(line - std::round(line)) > 1e-9) throw std::invalid_argument(where + "segment must lie on a grid line");
    if (!(j.from[across] > d.extent(across).lower + tol && j.from[across] < d.extent(across).upper - tol))
      throw std::invalid_argument(where + "segment must lie strictly inside the domain");
    for (const Point& e : {j.from, j.to})
      if (e[1 - across] < d.extent(1 - across).lower - tol || e[1 - across] > d.extent(1 - across).upper + tol)
        throw std::invalid_argument(where + "segment leaves the domain");
  }

  GridFunction smooth_;
  std::vector<JumpRecord> jumps_;
};

/// A jump counts as lying in Y when every corner of every cell it touches has
/// p = 1, so that the discretized jump sees only linear growth.
inline bool jump_in_y(const JumpRecord& j, const ExponentField& p) {
  const auto& d = p.domain();
  for (std::size_t c : PiecewiseBVFunction::touched_cells(d, j))
    if (!p.cell_in_y(c)) return false;
  return true;
}

struct MembershipReport {
  bool member = true;
  std::vector<std::size_t> offending;
  bool smooth_modular_finite = true;
};

inline MembershipReport bv_membership(const PiecewiseBVFunction& U, const ExponentField& p) {
  if (!(U.domain() == p.domain())) throw std::invalid_argument("bv_membership: grid mismatch");
  MembershipReport r;
  for (std::size_t k = 0; k < U.jumps().size(); ++k)
    if (!jump_in_y(U.jumps()[k], p)) r.offending.push_back(k);
  const auto g = gradient(U.smooth());
  for (std::size_t c = 0; c < g.domain().cell_count(); ++c) {
    const double t = g.frobenius(c);
    const double r_c = p.at_cell(c);
    if (!std::isfinite(std::pow(t, r_c))) r.smooth_modular_finite = false;
  }
  r.member = r.offending.empty() && r.smooth_modular_finite;
  return r;
}

inline void require_membership(const PiecewiseBVFunction& U, const ExponentField& p) {
  const auto r = bv_membership(U, p);
  if (!r.offending.empty()) {
    const auto& j = U.jumps()[r.offending.front()];
    throw JumpOutsideY(r.offending.front(), Point{0.5 * (j.from[0] + j.to[0]), 0.5 * (j.from[1] + j.to[1])});
  }
  if (!r.smooth_modular_finite) throw std::domain_error("smooth part has infinite p(.)-modular");
}

/// |D^s u|(Y) + rho_{p(.)}(grad of the smooth part); on Y cells the modular
/// density reduces to |grad u|.
inline double rho_old(const PiecewiseBVFunction& U, const ExponentField& p) {
  require_membership(U, p);
  CompensatedSum s;
  for (const auto& j : U.jumps()) s.add(j.mass());
  const auto g = gradient(U.smooth());
  CompensatedSum bulk;
  for (std::size_t c = 0; c < g.domain().cell_count(); ++c) {
    const double t = g.frobenius(c);
    const double r = p.at_cell(c);
    bulk.add(r == 1.0 ? t : std::pow(t, r) / r);
  }
  s.add(bulk.value() * g.domain().cell_volume());
  return s.value();
}

}  // namespace vexp
