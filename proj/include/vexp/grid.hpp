#pragma once

// Structured grids on boxes in one or two dimensions, nodal functions,
// forward-difference gradients with their exact discrete adjoint, midpoint
// quadrature and mollification.
//
// Node layout is row-major with the x index running fastest:
//   node(i, j) = i + (N_x + 1) * j.
// Cell c is identified with its lower-left node; cell(i, j) = i + N_x * j.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vexp {

using Point = std::array<double, 2>;

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
  bool operator==(const Interval&) const = default;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class GridDomain {
 public:
  GridDomain(const std::vector<Interval>& extents, const std::vector<int>& cells) {
    if (extents.size() != cells.size() || extents.empty() || extents.size() > 2)
      throw std::invalid_argument("grid: dimension must be 1 or 2");
    dim_ = static_cast<int>(extents.size());
    for (int k = 0; k < dim_; ++k) {
      if (cells[k] < 4) throw std::invalid_argument("grid: at least 4 cells per axis required");
      if (!(extents[k].upper > extents[k].lower) || !std::isfinite(extents[k].lower) ||
          !std::isfinite(extents[k].upper))
        throw std::invalid_argument("grid: empty or non-finite interval");
      ext_[k] = extents[k];
      n_[k] = cells[k];
      h_[k] = (extents[k].upper - extents[k].lower) / cells[k];
    }
  }

  static GridDomain interval(double a, double b, int cells) { return GridDomain({{a, b}}, {cells}); }
  static GridDomain box(Interval x, Interval y, int nx, int ny) { return GridDomain({x, y}, {nx, ny}); }

  int dim() const { return dim_; }
  const Interval& extent(int k) const { return ext_[k]; }
  int cells(int k) const { return k < dim_ ? n_[k] : 1; }
  int nodes_along(int k) const { return k < dim_ ? n_[k] + 1 : 1; }
  double spacing(int k) const { return h_[k]; }
  double min_spacing() const { return dim_ == 1 ? h_[0] : std::min(h_[0], h_[1]); }

  std::size_t node_count() const {
    return static_cast<std::size_t>(nodes_along(0)) * static_cast<std::size_t>(nodes_along(1));
  }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(dim_ == 2 ? n_[1] : 1);
  }
  double cell_volume() const { return dim_ == 1 ? h_[0] : h_[0] * h_[1]; }
  double measure() const {
    double m = 1.0;
    for (int k = 0; k < dim_; ++k) m *= ext_[k].upper - ext_[k].lower;
    return m;
  }
  double diameter() const {
    double d2 = 0.0;
    for (int k = 0; k < dim_; ++k) d2 += (ext_[k].upper - ext_[k].lower) * (ext_[k].upper - ext_[k].lower);
    return std::sqrt(d2);
  }

  std::size_t node_index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(nodes_along(0)) * static_cast<std::size_t>(j);
  }
  std::array<int, 2> node_coords(std::size_t idx) const {
    const auto nx = static_cast<std::size_t>(nodes_along(0));
    return {static_cast<int>(idx % nx), static_cast<int>(idx / nx)};
  }
  Point node_position(std::size_t idx) const {
    const auto c = node_coords(idx);
    Point p{ext_[0].lower + c[0] * h_[0], 0.0};
    if (dim_ == 2) p[1] = ext_[1].lower + c[1] * h_[1];
    return p;
  }

  std::size_t cell_index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(j);
  }
  std::array<int, 2> cell_coords(std::size_t c) const {
    const auto nx = static_cast<std::size_t>(n_[0]);
    return {static_cast<int>(c % nx), static_cast<int>(c / nx)};
  }
  Point cell_center(std::size_t c) const {
    const auto cc = cell_coords(c);
    Point p{ext_[0].lower + (cc[0] + 0.5) * h_[0], 0.0};
    if (dim_ == 2) p[1] = ext_[1].lower + (cc[1] + 0.5) * h_[1];
    return p;
  }

  int corner_count() const { return 1 << dim_; }
  /// Corner nodes of a cell; only the first corner_count() entries are valid.
  std::array<std::size_t, 4> cell_corners(std::size_t c) const {
    const auto cc = cell_coords(c);
    if (dim_ == 1) return {node_index(cc[0]), node_index(cc[0] + 1), 0, 0};
    return {node_index(cc[0], cc[1]), node_index(cc[0] + 1, cc[1]), node_index(cc[0], cc[1] + 1),
            node_index(cc[0] + 1, cc[1] + 1)};
  }

  bool contains_open(const Point& x) const {
    for (int k = 0; k < dim_; ++k)
      if (!(x[k] > ext_[k].lower && x[k] < ext_[k].upper)) return false;
    return true;
  }

  bool operator==(const GridDomain&) const = default;

 private:
  int dim_ = 1;
  std::array<Interval, 2> ext_{};
  std::array<int, 2> n_{0, 0};
  std::array<double, 2> h_{0.0, 0.0};
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

/// Nodal R^m-valued function on a grid.
class GridFunction {
 public:
  GridFunction(GridDomain domain, int codim, std::vector<double> values)
      : domain_(std::move(domain)), codim_(codim), values_(std::move(values)) {
    if (codim_ < 1) throw std::invalid_argument("grid function: codimension must be >= 1");
    if (values_.size() != domain_.node_count() * static_cast<std::size_t>(codim_))
      throw std::invalid_argument("grid function: value count does not match node count x codim");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("grid function: non-finite value");
  }

  static GridFunction constant(const GridDomain& domain, double c, int codim = 1) {
    return GridFunction(domain, codim, std::vector<double>(domain.node_count() * codim, c));
  }

  /// Samples a scalar function of position at every node.
  template <class F>
  static GridFunction sample(const GridDomain& domain, F&& f) {
    std::vector<double> v(domain.node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(domain.node_position(i));
    return GridFunction(domain, 1, std::move(v));
  }

  /// Samples an R^m-valued function; f(x, out) fills a span of length m.
  template <class F>
  static GridFunction sample(const GridDomain& domain, int codim, F&& f) {
    std::vector<double> v(domain.node_count() * codim);
    for (std::size_t i = 0; i < domain.node_count(); ++i)
      f(domain.node_position(i), std::span<double>(v.data() + i * codim, codim));
    return GridFunction(domain, codim, std::move(v));
  }

  const GridDomain& domain() const { return domain_; }
  int codim() const { return codim_; }
  std::span<const double> values() const { return values_; }
  double operator()(std::size_t node, int alpha = 0) const { return values_[node * codim_ + alpha]; }
  std::span<const double> node_value(std::size_t node) const {
    return {values_.data() + node * codim_, static_cast<std::size_t>(codim_)};
  }
  double node_norm(std::size_t node) const {
    double s = 0.0;
    for (double v : node_value(node)) s += v * v;
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (std::size_t i = 0; i < domain_.node_count(); ++i) m = std::max(m, node_norm(i));
    return m;
  }

 private:
  GridDomain domain_;
  int codim_;
  std::vector<double> values_;
};

/// a*u + b*v for grid functions on the same domain.
inline GridFunction combine(double a, const GridFunction& u, double b, const GridFunction& v) {
  if (!(u.domain() == v.domain()) || u.codim() != v.codim())
    throw std::invalid_argument("combine: mismatched grid functions");
  std::vector<double> out(u.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * u.values()[i] + b * v.values()[i];
  return GridFunction(u.domain(), u.codim(), std::move(out));
}

inline GridFunction scaled(const GridFunction& u, double c) {
  std::vector<double> out(u.values().begin(), u.values().end());
  for (double& x : out) x *= c;
  return GridFunction(u.domain(), u.codim(), std::move(out));
}

/// Per-cell scalar values, e.g. |grad u| or an integrand evaluated per cell.
class CellScalarField {
 public:
  CellScalarField(GridDomain domain, std::vector<double> values) : domain_(std::move(domain)), values_(std::move(values)) {
    if (values_.size() != domain_.cell_count()) throw std::invalid_argument("cell field: wrong value count");
  }
  const GridDomain& domain() const { return domain_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t c) const { return values_[c]; }
  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  GridDomain domain_;
  std::vector<double> values_;
};

/// Per-cell m x n matrices stored row-major, entry (alpha, k).
template <class Tag>
class CellMatrixField {
 public:
  CellMatrixField(GridDomain domain, int rows, std::vector<double> entries)
      : domain_(std::move(domain)), rows_(rows), entries_(std::move(entries)) {
    if (rows_ < 1) throw std::invalid_argument("cell matrix field: rows must be >= 1");
    if (entries_.size() != domain_.cell_count() * static_cast<std::size_t>(rows_ * domain_.dim()))
      throw std::invalid_argument("cell matrix field: wrong entry count");
    for (double v : entries_)
      if (!std::isfinite(v)) throw std::invalid_argument("cell matrix field: non-finite entry");
  }
  static CellMatrixField zeros(const GridDomain& domain, int rows) {
    return CellMatrixField(domain, rows, std::vector<double>(domain.cell_count() * rows * domain.dim(), 0.0));
  }

  const GridDomain& domain() const { return domain_; }
  int rows() const { return rows_; }
  int cols() const { return domain_.dim(); }
  std::size_t matrix_size() const { return static_cast<std::size_t>(rows_ * domain_.dim()); }
  std::span<const double> entries() const { return entries_; }
  std::span<const double> matrix(std::size_t c) const { return {entries_.data() + c * matrix_size(), matrix_size()}; }
  double operator()(std::size_t c, int alpha, int k) const { return entries_[c * matrix_size() + alpha * cols() + k]; }
  double frobenius(std::size_t c) const {
    double s = 0.0;
    for (double v : matrix(c)) s += v * v;
    return std::sqrt(s);
  }

 private:
  GridDomain domain_;
  int rows_;
  std::vector<double> entries_;
};

struct GradientTag {};
struct TestFieldTag {};
using GradientField = CellMatrixField<GradientTag>;
/// Dual test field living on cells, paired with gradients. The compact-support
/// condition is carried by divergence(), which extends w by zero outside the grid.
using TestField = CellMatrixField<TestFieldTag>;

template <class Tag>
CellScalarField pointwise_norm(const CellMatrixField<Tag>& f) {
  std::vector<double> v(f.domain().cell_count());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = f.frobenius(c);
  return CellScalarField(f.domain(), std::move(v));
}

/// Forward differences on every cell.
inline GradientField gradient(const GridFunction& u) {
  const auto& d = u.domain();
  const int m = u.codim();
  const int n = d.dim();
  std::vector<double> g(d.cell_count() * m * n);
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const auto cc = d.cell_coords(c);
    const std::size_t base = d.node_index(cc[0], cc[1]);
    for (int k = 0; k < n; ++k) {
      const std::size_t next = k == 0 ? d.node_index(cc[0] + 1, cc[1]) : d.node_index(cc[0], cc[1] + 1);
      for (int a = 0; a < m; ++a) g[(c * m + a) * n + k] = (u(next, a) - u(base, a)) / d.spacing(k);
    }
  }
  return GradientField(d, m, std::move(g));
}

/// Negative adjoint of gradient() with respect to the nodal and cell
/// pairings: pairing(u, divergence(w)) == -integral of grad u : w, exactly up
/// to rounding, for every cell field w.
inline GridFunction divergence(const TestField& w) {
  const auto& d = w.domain();
  const int m = w.rows();
  const int n = d.dim();
  std::vector<double> out(d.node_count() * m, 0.0);
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const auto cc = d.cell_coords(c);
    const std::size_t base = d.node_index(cc[0], cc[1]);
    for (int k = 0; k < n; ++k) {
      const std::size_t next = k == 0 ? d.node_index(cc[0] + 1, cc[1]) : d.node_index(cc[0], cc[1] + 1);
      for (int a = 0; a < m; ++a) {
        const double q = w(c, a, k) / d.spacing(k);
        out[base * m + a] += q;
        out[next * m + a] -= q;
      }
    }
  }
  return GridFunction(d, m, std::move(out));
}

/// Midpoint quadrature: sum of cell values times cell volume.
inline double integrate(const GridDomain& domain, std::span<const double> cell_values) {
  if (cell_values.size() != domain.cell_count()) throw std::invalid_argument("integrate: wrong value count");
  CompensatedSum s;
  for (double v : cell_values) s.add(v);
  return s.value() * domain.cell_volume();
}
inline double integrate(const CellScalarField& f) { return integrate(f.domain(), f.values()); }

/// Nodal pairing vol * sum_i u_i . v_i, the counterpart of integrate() for
/// nodal data under which divergence() is the adjoint of -gradient().
inline double pairing(const GridFunction& u, const GridFunction& v) {
  if (!(u.domain() == v.domain()) || u.codim() != v.codim()) throw std::invalid_argument("pairing: mismatch");
  CompensatedSum s;
  for (std::size_t i = 0; i < u.values().size(); ++i) s.add(u.values()[i] * v.values()[i]);
  return s.value() * u.domain().cell_volume();
}

/// Discrete standard mollifier exp(-1 / (1 - |x/delta|^2)) on the nodes
/// strictly inside the ball of radius delta, normalized to unit mass.
class Mollifier {
 public:
  struct Tap {
    int di;
    int dj;
    double weight;
  };

  Mollifier(const GridDomain& domain, double radius) : radius_(radius) {
    if (!(radius >= domain.min_spacing()))
      throw std::invalid_argument("mollifier: radius " + std::to_string(radius) + " is below one cell");
    const int rx = static_cast<int>(std::ceil(radius / domain.spacing(0)));
    const int ry = domain.dim() == 2 ? static_cast<int>(std::ceil(radius / domain.spacing(1))) : 0;
    double total = 0.0;
    for (int j = -ry; j <= ry; ++j)
      for (int i = -rx; i <= rx; ++i) {
        const double x = i * domain.spacing(0);
        const double y = domain.dim() == 2 ? j * domain.spacing(1) : 0.0;
        const double r2 = (x * x + y * y) / (radius * radius);
        if (r2 >= 1.0) continue;
        const double w = std::exp(-1.0 / (1.0 - r2));
        if (w <= 0.0) continue;
        taps_.push_back({i, j, w});
        total += w;
      }
    for (auto& t : taps_) t.weight /= total;
  }

  double radius() const { return radius_; }
  const std::vector<Tap>& taps() const { return taps_; }

 private:
  double radius_;
  std::vector<Tap> taps_;
};

namespace detail {
/// Mirror index about the boundary nodes 0 and n.
inline int reflect_index(int i, int n) {
  while (i < 0 || i > n) {
    if (i < 0) i = -i;
    if (i > n) i = 2 * n - i;
  }
  return i;
}
}  // namespace detail

/// Convolution with the mollifier; the function is extended past the
/// boundary by mirroring about the boundary nodes.
inline GridFunction mollify(const GridFunction& u, const Mollifier& eta) {
  const auto& d = u.domain();
  const int m = u.codim();
  const int nx = d.cells(0);
  const int ny = d.dim() == 2 ? d.cells(1) : 0;
  std::vector<double> out(d.node_count() * m, 0.0);
  for (std::size_t node = 0; node < d.node_count(); ++node) {
    const auto nc = d.node_coords(node);
    for (const auto& t : eta.taps()) {
      const int i = detail::reflect_index(nc[0] + t.di, nx);
      const int j = d.dim() == 2 ? detail::reflect_index(nc[1] + t.dj, ny) : 0;
      const std::size_t src = d.node_index(i, j);
      for (int a = 0; a < m; ++a) out[node * m + a] += t.weight * u(src, a);
    }
  }
  return GridFunction(d, m, std::move(out));
}

}  // namespace vexp
