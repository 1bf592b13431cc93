#pragma once

// Variable exponents p(x) >= 1 on grid nodes, the linear-growth set
// Y = {p = 1}, and continuity diagnostics (log-Hölder constant, strong
// log-Hölder modulus near Y, ball condition).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vexp/grid.hpp"

namespace vexp {

class ExponentField {
 public:
  /// Values within this distance above 1 are snapped to exactly 1.
  static constexpr double snap_tolerance = 1e-12;

  ExponentField(GridDomain domain, std::vector<double> values) : domain_(std::move(domain)), values_(std::move(values)) {
    if (values_.size() != domain_.node_count()) throw std::invalid_argument("exponent: value count != node count");
    p_minus_ = std::numeric_limits<double>::infinity();
    p_plus_ = 0.0;
    in_y_.resize(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
      double& p = values_[i];
      if (!std::isfinite(p)) throw std::invalid_argument("exponent: non-finite value");
      if (p < 1.0 - snap_tolerance) throw std::invalid_argument("exponent: value below 1");
      if (p < 1.0 + snap_tolerance) p = 1.0;
      in_y_[i] = p == 1.0;
      p_minus_ = std::min(p_minus_, p);
      p_plus_ = std::max(p_plus_, p);
      y_count_ += in_y_[i];
    }
    cell_p_.resize(domain_.cell_count());
    for (std::size_t c = 0; c < cell_p_.size(); ++c) {
      const auto corners = domain_.cell_corners(c);
      double s = 0.0;
      bool all_y = true;
      for (int k = 0; k < domain_.corner_count(); ++k) {
        s += values_[corners[k]];
        all_y = all_y && in_y_[corners[k]];
      }
      cell_p_[c] = all_y ? 1.0 : std::max(1.0, s / domain_.corner_count());
      if (!all_y && cell_p_[c] == 1.0) cell_p_[c] = std::nextafter(1.0, 2.0);
    }
    compute_distance_to_y();
  }

  static ExponentField constant(const GridDomain& domain, double q) {
    return ExponentField(domain, std::vector<double>(domain.node_count(), q));
  }

  template <class F>
  static ExponentField sample(const GridDomain& domain, F&& f) {
    std::vector<double> v(domain.node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(domain.node_position(i));
    return ExponentField(domain, std::move(v));
  }

  static ExponentField from_grid_function(const GridFunction& u) {
    if (u.codim() != 1) throw std::invalid_argument("exponent: grid function must be scalar (m = 1)");
    return ExponentField(u.domain(), std::vector<double>(u.values().begin(), u.values().end()));
  }

  const GridDomain& domain() const { return domain_; }
  std::span<const double> values() const { return values_; }
  double at_node(std::size_t i) const { return values_[i]; }
  /// Corner average; exactly 1 iff every corner lies in Y.
  double at_cell(std::size_t c) const { return cell_p_[c]; }
  bool in_y(std::size_t node) const { return in_y_[node]; }
  bool cell_in_y(std::size_t c) const { return cell_p_[c] == 1.0; }
  bool has_y() const { return y_count_ > 0; }
  std::size_t y_count() const { return y_count_; }
  double p_minus() const { return p_minus_; }
  double p_plus() const { return p_plus_; }
  /// Euclidean distance from a node to the nearest node of Y (infinity if Y is empty).
  double distance_to_y(std::size_t node) const { return dist_y_[node]; }
  /// Smallest distance to Y over the corners of a cell.
  double cell_distance_to_y(std::size_t c) const {
    const auto corners = domain_.cell_corners(c);
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < domain_.corner_count(); ++k) d = std::min(d, dist_y_[corners[k]]);
    return d;
  }

 private:
  // Exact squared Euclidean distance transform (lower envelope of parabolas),
  // separable over the axes.
  static void distance_pass(std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> out(n);
    std::vector<std::size_t> v(n);
    std::vector<double> z(n + 1);
    const double inf = std::numeric_limits<double>::infinity();
    std::size_t first = 0;
    while (first < n && !std::isfinite(f[first])) ++first;
    if (first == n) return;  // all infinite
    std::size_t k = 0;
    v[0] = first;
    z[0] = -inf;
    z[1] = inf;
    for (std::size_t q = first + 1; q < n; ++q) {
      if (!std::isfinite(f[q])) continue;
      const double xq = q * h;
      double s = 0.0;
      while (true) {
        const double xv = v[k] * h;
        s = ((f[q] + xq * xq) - (f[v[k]] + xv * xv)) / (2.0 * xq - 2.0 * xv);
        if (s <= z[k] && k > 0) {
          --k;
          continue;
        }
        break;
      }
      if (s <= z[k]) {  // k == 0 case: replace
        v[0] = q;
        z[0] = -inf;
        z[1] = inf;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = inf;
    }
    k = 0;
    for (std::size_t q = 0; q < n; ++q) {
      const double xq = q * h;
      while (z[k + 1] < xq) ++k;
      const double xv = v[k] * h;
      out[q] = (xq - xv) * (xq - xv) + f[v[k]];
    }
    f = std::move(out);
  }

  void compute_distance_to_y() {
    const double inf = std::numeric_limits<double>::infinity();
    const int nx = domain_.nodes_along(0);
    const int ny = domain_.nodes_along(1);
    std::vector<double> d2(values_.size());
    for (std::size_t i = 0; i < d2.size(); ++i) d2[i] = in_y_[i] ? 0.0 : inf;
    std::vector<double> line;
    for (int j = 0; j < ny; ++j) {
      line.assign(d2.begin() + static_cast<std::ptrdiff_t>(j) * nx, d2.begin() + static_cast<std::ptrdiff_t>(j + 1) * nx);
      distance_pass(line, domain_.spacing(0));
      std::copy(line.begin(), line.end(), d2.begin() + static_cast<std::ptrdiff_t>(j) * nx);
    }
    if (domain_.dim() == 2) {
      for (int i = 0; i < nx; ++i) {
        line.resize(ny);
        for (int j = 0; j < ny; ++j) line[j] = d2[domain_.node_index(i, j)];
        distance_pass(line, domain_.spacing(1));
        for (int j = 0; j < ny; ++j) d2[domain_.node_index(i, j)] = line[j];
      }
    }
    dist_y_.resize(d2.size());
    for (std::size_t i = 0; i < d2.size(); ++i) dist_y_[i] = std::isfinite(d2[i]) ? std::sqrt(d2[i]) : inf;
  }

  GridDomain domain_;
  std::vector<double> values_;
  std::vector<double> cell_p_;
  std::vector<char> in_y_;
  std::vector<double> dist_y_;
  std::size_t y_count_ = 0;
  double p_minus_ = 1.0;
  double p_plus_ = 1.0;
};

/// Built-in exponent families, selected by spec string:
///   constant:q         p = q
///   ramp:a,b           p = 1 for x <= a, linear up to 2 at x = b, 2 beyond
///   plateau-one:r      p = 1 within distance r of the domain centre, linear up to 2 at 2r, 2 beyond
///   step:x0,q          p = 1 for x <= x0, q beyond (a jump; not log-Hölder)
inline ExponentField make_exponent(const GridDomain& domain, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t pos = 0;
        args.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw std::invalid_argument("exponent spec '" + spec + "': bad number '" + tok + "'");
      }
    }
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw std::invalid_argument("exponent spec '" + spec + "' expects " + std::to_string(n) + " parameter(s)");
  };
  if (name == "constant") {
    need(1);
    return ExponentField::constant(domain, args[0]);
  }
  if (name == "ramp") {
    need(2);
    const double a = args[0], b = args[1];
    if (!(b > a)) throw std::invalid_argument("ramp: need a < b");
    return ExponentField::sample(domain, [=](const Point& x) {
      if (x[0] <= a) return 1.0;
      if (x[0] >= b) return 2.0;
      return 1.0 + (x[0] - a) / (b - a);
    });
  }
  if (name == "plateau-one") {
    need(1);
    const double r = args[0];
    if (!(r > 0)) throw std::invalid_argument("plateau-one: radius must be positive");
    Point centre{0.5 * (domain.extent(0).lower + domain.extent(0).upper), 0.0};
    if (domain.dim() == 2) centre[1] = 0.5 * (domain.extent(1).lower + domain.extent(1).upper);
    return ExponentField::sample(domain, [=](const Point& x) {
      const double d = distance(x, centre);
      if (d <= r) return 1.0;
      return std::min(2.0, 1.0 + (d - r) / r);
    });
  }
  if (name == "step") {
    need(2);
    const double x0 = args[0], q = args[1];
    return ExponentField::sample(domain, [=](const Point& x) { return x[0] <= x0 ? 1.0 : q; });
  }
  throw std::invalid_argument("unknown exponent spec '" + spec + "'");
}

namespace detail {
inline double log_weight(double r) { return std::log(std::numbers::e + 1.0 / r); }
}  // namespace detail

/// Largest |p(x) - p(y)| log(e + 1/|x - y|) over node pairs. Exhaustive up to
/// max_nodes nodes; larger grids use an evenly strided subset of nodes plus
/// every pair of grid neighbours.
inline double log_holder_constant(const ExponentField& p, std::size_t max_nodes = 4096) {
  const auto& d = p.domain();
  const std::size_t n = d.node_count();
  std::vector<std::size_t> sample;
  const std::size_t stride = n <= max_nodes ? 1 : (n + max_nodes - 1) / max_nodes;
  for (std::size_t i = 0; i < n; i += stride) sample.push_back(i);
  std::vector<Point> pos(sample.size());
  for (std::size_t k = 0; k < sample.size(); ++k) pos[k] = d.node_position(sample[k]);
  double best = 0.0;
  for (std::size_t a = 0; a < sample.size(); ++a)
    for (std::size_t b = a + 1; b < sample.size(); ++b) {
      const double dp = std::abs(p.at_node(sample[a]) - p.at_node(sample[b]));
      if (dp == 0.0) continue;
      best = std::max(best, dp * detail::log_weight(distance(pos[a], pos[b])));
    }
  if (stride > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = d.node_coords(i);
      const Point x = d.node_position(i);
      for (int k = 0; k < d.dim(); ++k) {
        if (c[k] + 1 >= d.nodes_along(k)) continue;
        const std::size_t nb = k == 0 ? d.node_index(c[0] + 1, c[1]) : d.node_index(c[0], c[1] + 1);
        const double dp = std::abs(p.at_node(i) - p.at_node(nb));
        if (dp > 0.0) best = std::max(best, dp * detail::log_weight(distance(x, d.node_position(nb))));
      }
    }
  }
  return best;
}

/// omega(r) = sup over y in Y, x with 0 < |x - y| <= r of (p(x) - 1) log(e + 1/|x - y|).
/// For fixed x the sup over y is attained at the nearest point of Y, so each
/// node contributes once through its distance to Y. Empty when Y is empty.
inline std::vector<double> strong_log_holder_modulus(const ExponentField& p, const std::vector<double>& radii) {
  if (!p.has_y()) return {};
  std::vector<double> out(radii.size(), 0.0);
  const std::size_t n = p.domain().node_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double excess = p.at_node(i) - 1.0;
    if (excess <= 0.0) continue;
    const double dist = p.distance_to_y(i);
    const double val = excess * detail::log_weight(dist);
    for (std::size_t k = 0; k < radii.size(); ++k)
      if (dist <= radii[k]) out[k] = std::max(out[k], val);
  }
  return out;
}

namespace detail {
/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
}  // namespace detail

/// max over sampled balls B inside the domain of |B|^(p-_B - p+_B). Centres are
/// uniform, radii log-uniform between the smallest spacing and the distance
/// to the boundary. Deterministic for a given seed.
inline double ball_condition_constant(const ExponentField& p, std::size_t sample_count, std::uint64_t seed = 42) {
  if (sample_count < 1) throw std::invalid_argument("ball condition: sample_count must be >= 1");
  const auto& d = p.domain();
  std::mt19937_64 rng(seed);
  const double hmin = d.min_spacing();
  double best = 1.0;
  std::size_t drawn = 0;
  std::size_t attempts = 0;
  while (drawn < sample_count && attempts < 100 * sample_count) {
    ++attempts;
    Point c{0.0, 0.0};
    double to_boundary = std::numeric_limits<double>::infinity();
    for (int k = 0; k < d.dim(); ++k) {
      const auto& e = d.extent(k);
      c[k] = e.lower + detail::uniform01(rng) * (e.upper - e.lower);
      to_boundary = std::min({to_boundary, c[k] - e.lower, e.upper - c[k]});
    }
    if (to_boundary <= hmin) continue;
    const double r = hmin * std::exp(detail::uniform01(rng) * std::log(to_boundary / hmin));
    // Nodes inside the ball.
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    std::array<int, 2> i0{0, 0}, i1{0, 0};
    for (int k = 0; k < d.dim(); ++k) {
      const auto& e = d.extent(k);
      i0[k] = std::max(0, static_cast<int>(std::ceil((c[k] - r - e.lower) / d.spacing(k))));
      i1[k] = std::min(d.cells(k), static_cast<int>(std::floor((c[k] + r - e.lower) / d.spacing(k))));
    }
    for (int j = i0[1]; j <= i1[1]; ++j)
      for (int i = i0[0]; i <= i1[0]; ++i) {
        const std::size_t node = d.node_index(i, j);
        if (distance(d.node_position(node), c) >= r) continue;
        lo = std::min(lo, p.at_node(node));
        hi = std::max(hi, p.at_node(node));
      }
    if (!(hi >= lo)) continue;  // no node inside
    ++drawn;
    const double volume = d.dim() == 1 ? 2.0 * r : std::numbers::pi * r * r;
    best = std::max(best, std::exp((lo - hi) * std::log(volume)));
  }
  return best;
}

}  // namespace vexp
