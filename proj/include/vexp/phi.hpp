#pragma once

// Phi-functions phi(x, t), their conjugates, and sampled certificates for the
// conditions (A0), (A1), (aInc)_p and (aDec)_q.
//
// Values live in [0, inf]; +infinity is an ordinary double and propagates
// through sums and comparisons.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vexp/exponent.hpp"
#include "vexp/grid.hpp"

namespace vexp {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Where phi is evaluated: a grid node or a grid cell.
struct Site {
  std::size_t index = 0;
  bool cell = false;
  static Site node(std::size_t i) { return {i, false}; }
  static Site at_cell(std::size_t c) { return {c, true}; }
};

enum class PhiKind { variable_exponent, fixed_power, tabulated };

class PhiFunction {
 public:
  /// phi(x, t) = t^p(x) / p(x).
  static PhiFunction variable_exponent(ExponentField p) {
    PhiFunction f;
    f.kind_ = PhiKind::variable_exponent;
    f.p_ = std::make_shared<const ExponentField>(std::move(p));
    return f;
  }

  /// phi(t) = t^q / q, q >= 1.
  static PhiFunction fixed_power(double q) {
    if (!(q >= 1.0) || !std::isfinite(q)) throw std::invalid_argument("fixed power: need 1 <= q < inf");
    PhiFunction f;
    f.kind_ = PhiKind::fixed_power;
    f.q_ = q;
    return f;
  }

  /// x-independent piecewise-linear phi through (t_i, v_i), t_0 = 0 = v_0,
  /// strictly increasing t. Beyond the last point phi continues with the last
  /// slope, or is +inf when infinite_tail is set.
  static PhiFunction tabulated(std::vector<double> t, std::vector<double> v, bool infinite_tail = false) {
    if (t.size() != v.size() || t.size() < 2) throw std::invalid_argument("tabulated phi: need >= 2 matching points");
    if (t[0] != 0.0 || v[0] != 0.0) throw std::invalid_argument("tabulated phi: first point must be (0, 0)");
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (!(t[i] > t[i - 1])) throw std::invalid_argument("tabulated phi: t must be strictly increasing");
      if (!(v[i] >= v[i - 1]) || !std::isfinite(v[i])) throw std::invalid_argument("tabulated phi: values must increase");
    }
    PhiFunction f;
    f.kind_ = PhiKind::tabulated;
    f.table_t_ = std::move(t);
    f.table_v_ = std::move(v);
    f.infinite_tail_ = infinite_tail;
    return f;
  }

  PhiKind kind() const { return kind_; }
  /// True for the conjugate of a power-type function.
  bool conjugated() const { return conjugated_; }
  bool x_dependent() const { return kind_ == PhiKind::variable_exponent; }
  const ExponentField* exponent() const { return p_.get(); }
  const std::vector<double>& table_t() const { return table_t_; }
  const std::vector<double>& table_v() const { return table_v_; }
  bool infinite_tail() const { return infinite_tail_; }

  /// Power exponent r at the site for power-type kinds (p(x) or q).
  double power_at(Site s) const {
    if (kind_ == PhiKind::fixed_power) return q_;
    if (kind_ == PhiKind::variable_exponent) return s.cell ? p_->at_cell(s.index) : p_->at_node(s.index);
    throw std::logic_error("power_at: tabulated phi has no exponent");
  }

  /// Whether the site is in Y (exponent exactly 1); false for x-independent kinds other than q = 1.
  bool site_in_y(Site s) const {
    if (kind_ == PhiKind::tabulated) return false;
    return power_at(s) == 1.0;
  }

  double operator()(Site s, double t) const {
    if (t <= 0.0) return 0.0;
    if (kind_ == PhiKind::tabulated) return table_value(t);
    const double r = power_at(s);
    if (!conjugated_) return r == 1.0 ? t : std::pow(t, r) / r;
    if (r == 1.0) return t <= 1.0 ? 0.0 : infinity;
    const double rc = r / (r - 1.0);
    return std::pow(t, rc) / rc;
  }

  /// Right derivative in t; may be +inf.
  double subgradient(Site s, double t) const {
    if (kind_ == PhiKind::tabulated) return table_slope(t);
    const double r = power_at(s);
    if (!conjugated_) return r == 1.0 ? 1.0 : std::pow(std::max(t, 0.0), r - 1.0);
    if (r == 1.0) return t < 1.0 ? 0.0 : infinity;
    return std::pow(std::max(t, 0.0), 1.0 / (r - 1.0));
  }

  /// Largest s with subgradient(s) <= slope, i.e. the maximizer of slope*s - phi(s).
  double maximizer(Site site, double slope) const {
    if (slope <= 0.0) return 0.0;
    if (kind_ == PhiKind::tabulated) {
      double best_t = 0.0, best = 0.0;
      for (std::size_t i = 1; i < table_t_.size(); ++i) {
        const double val = slope * table_t_[i] - table_v_[i];
        if (val > best) best = val, best_t = table_t_[i];
      }
      if (!infinite_tail_ && slope > table_slope(table_t_.back())) return infinity;
      return best_t;
    }
    const double r = power_at(site);
    if (!conjugated_) {
      if (r == 1.0) return slope < 1.0 ? 0.0 : (slope == 1.0 ? 0.0 : infinity);
      return std::pow(slope, 1.0 / (r - 1.0));
    }
    if (r == 1.0) return 1.0;
    return std::pow(slope, r - 1.0);
  }

  PhiFunction conjugate() const {
    if (kind_ != PhiKind::tabulated) {
      PhiFunction f = *this;
      f.conjugated_ = !conjugated_;
      return f;
    }
    return tabulated_conjugate();
  }

  bool convex() const {
    if (kind_ != PhiKind::tabulated) return true;
    for (std::size_t i = 2; i < table_t_.size(); ++i)
      if (segment_slope(i) < segment_slope(i - 1) * (1.0 - 1e-15)) return false;
    return true;
  }

  /// Constant L for which t -> phi(t)/t is L-almost increasing.
  double almost_increasing_constant() const {
    if (kind_ != PhiKind::tabulated) return 1.0;
    double run = 0.0, L = 1.0;
    for (std::size_t i = 1; i < table_t_.size(); ++i) {
      const double g = table_v_[i] / table_t_[i];
      run = std::max(run, g);
      if (g > 0.0) L = std::max(L, run / g);
      else if (run > 0.0) return infinity;
    }
    return L;
  }

  /// Number of distinct evaluation sites for the checks (nodes, or one site).
  std::size_t node_sites() const { return x_dependent() ? p_->domain().node_count() : 1; }

 private:
  double segment_slope(std::size_t i) const {
    return (table_v_[i] - table_v_[i - 1]) / (table_t_[i] - table_t_[i - 1]);
  }
  double table_value(double t) const {
    const auto& T = table_t_;
    if (t >= T.back()) {
      if (t == T.back()) return table_v_.back();
      if (infinite_tail_) return infinity;
      return table_v_.back() + segment_slope(T.size() - 1) * (t - T.back());
    }
    const auto it = std::upper_bound(T.begin(), T.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - T.begin());
    return table_v_[i - 1] + segment_slope(i) * (t - T[i - 1]);
  }
  double table_slope(double t) const {
    const auto& T = table_t_;
    if (t >= T.back()) return infinite_tail_ ? infinity : segment_slope(T.size() - 1);
    const auto it = std::upper_bound(T.begin(), T.end(), t);
    return segment_slope(static_cast<std::size_t>(it - T.begin()));
  }

  // Exact Legendre transform of a piecewise-linear function: its vertices sit
  // at the slopes of the lower convex hull of the table.
  PhiFunction tabulated_conjugate() const {
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < table_t_.size(); ++i) {
      while (hull.size() >= 2) {
        const std::size_t a = hull[hull.size() - 2], b = hull.back();
        const double cross = (table_t_[b] - table_t_[a]) * (table_v_[i] - table_v_[a]) -
                             (table_v_[b] - table_v_[a]) * (table_t_[i] - table_t_[a]);
        if (cross <= 0.0) hull.pop_back();
        else break;
      }
      hull.push_back(i);
    }
    std::vector<double> s{0.0}, w{0.0};
    for (std::size_t k = 1; k < hull.size(); ++k) {
      const std::size_t a = hull[k - 1], b = hull[k];
      const double slope = (table_v_[b] - table_v_[a]) / (table_t_[b] - table_t_[a]);
      const double val = table_t_[a] * slope - table_v_[a];
      if (slope <= s.back()) {
        w.back() = std::max(w.back(), val);
        continue;
      }
      s.push_back(slope);
      w.push_back(val);
    }
    if (!infinite_tail_) {
      if (s.size() < 2) throw std::domain_error("phi: conjugate of a function vanishing everywhere is not a phi-function");
      return tabulated(std::move(s), std::move(w), true);
    }
    // Past the last slope the sup sits at the end of the table.
    const double t_end = table_t_.back(), v_end = table_v_.back();
    const double s_next = s.size() < 2 ? 1.0 : 2.0 * s.back();
    s.push_back(s_next);
    w.push_back(t_end * s_next - v_end);
    return tabulated(std::move(s), std::move(w), !infinite_tail_);
  }

  PhiKind kind_ = PhiKind::fixed_power;
  bool conjugated_ = false;
  double q_ = 2.0;
  std::shared_ptr<const ExponentField> p_;
  std::vector<double> table_t_;
  std::vector<double> table_v_;
  bool infinite_tail_ = false;
};

/// Numerical Legendre transform sup_{t >= 0} {s t - phi(site, t)}: log-spaced
/// search over [1e-12, 1e12] (plus t = 0 and t = 1) refined by golden section.
inline double numeric_conjugate(const PhiFunction& phi, Site site, double s) {
  auto obj = [&](double t) {
    const double v = phi(site, t);
    return std::isfinite(v) ? s * t - v : -infinity;
  };
  const int per_decade = 64;
  std::vector<double> ts{0.0, 1.0};
  for (int k = -12 * per_decade; k <= 12 * per_decade; ++k) ts.push_back(std::pow(10.0, double(k) / per_decade));
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::size_t best = 0;
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (obj(ts[i]) > obj(ts[best])) best = i;
  double a = ts[best == 0 ? 0 : best - 1];
  double b = ts[std::min(best + 1, ts.size() - 1)];
  double value = obj(ts[best]);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = obj(c), fd = obj(d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, b); ++it) {
    if (fc >= fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = obj(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = obj(d);
    }
  }
  return std::max({value, fc, fd});
}

// ---------------------------------------------------------------------------
// Condition certificates

enum class Condition { A0, A1, aInc, aDec };

inline std::string condition_name(Condition c) {
  switch (c) {
    case Condition::A0: return "A0";
    case Condition::A1: return "A1";
    case Condition::aInc: return "aInc";
    case Condition::aDec: return "aDec";
  }
  return "?";
}

struct CheckOptions {
  double t_min = 1e-6;
  double t_max = 1e6;
  int points_per_decade = 16;
  /// Geometric beta grid 10^(-k / beta_per_decade), k = 0 .. beta_decades * beta_per_decade.
  int beta_per_decade = 16;
  int beta_decades = 6;
  /// Node cap for pairwise (A1) sampling; larger grids use a strided subset.
  std::size_t max_pair_nodes = 512;
};

struct ConditionCertificate {
  Condition condition = Condition::A0;
  bool pass = false;
  /// beta for (A0)/(A1); L for (aInc)/(aDec). NaN when no beta on the grid works.
  double constant = std::numeric_limits<double>::quiet_NaN();
  /// Exponent parameter p or q for (aInc)/(aDec), K for (A1).
  double parameter = 0.0;
  // Counterexample (fail) or binding point (pass).
  std::optional<Point> witness_x;
  std::optional<Point> witness_y;
  double witness_t = std::numeric_limits<double>::quiet_NaN();
  double witness_s = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> beta_grid;
  std::vector<double> t_grid;
};

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> g;
  const int k0 = static_cast<int>(std::floor(std::log10(lo) * per_decade + 1e-9));
  const int k1 = static_cast<int>(std::ceil(std::log10(hi) * per_decade - 1e-9));
  for (int k = k0; k <= k1; ++k) g.push_back(std::pow(10.0, double(k) / per_decade));
  return g;
}

inline void validate(const PhiFunction& phi, const CheckOptions& o) {
  if (o.points_per_decade < 16) throw std::invalid_argument("phi checks: need >= 16 points per decade");
  if (!(o.t_min > 0.0) || !(o.t_max > o.t_min)) throw std::invalid_argument("phi checks: bad t-range");
  if (phi.kind() == PhiKind::tabulated && phi.infinite_tail() && phi.table_t().back() < o.t_max)
    throw std::invalid_argument("phi checks: tabulated range ends at " + std::to_string(phi.table_t().back()) +
                                ", below the check range");
}

inline std::vector<double> beta_grid(const CheckOptions& o) {
  std::vector<double> g;
  for (int k = 0; k <= o.beta_decades * o.beta_per_decade; ++k) g.push_back(std::pow(10.0, -double(k) / o.beta_per_decade));
  return g;
}

inline Point site_point(const PhiFunction& phi, std::size_t i) {
  return phi.x_dependent() ? phi.exponent()->domain().node_position(i) : Point{0.0, 0.0};
}

// Sites whose exponent differs; for x-independent phi a single site.
inline std::vector<std::size_t> distinct_sites(const PhiFunction& phi) {
  std::vector<std::size_t> out;
  if (!phi.x_dependent()) return {0};
  std::vector<double> seen;
  for (std::size_t i = 0; i < phi.node_sites(); ++i) {
    const double r = phi.power_at(Site::node(i));
    if (std::find(seen.begin(), seen.end(), r) != seen.end()) continue;
    seen.push_back(r);
    out.push_back(i);
  }
  return out;
}

// Largest ratio g(s) / g(t) over s <= t (increasing = true) or g(t) / g(s)
// (increasing = false) on a grid; records the maximizing pair.
struct AlmostMonotone {
  double L = 1.0;
  double s = 0.0;
  double t = 0.0;
};
inline AlmostMonotone almost_constant(const std::vector<double>& ts, const std::vector<double>& g, bool increasing) {
  AlmostMonotone out;
  auto ratio = [](double num, double den) {
    if (num == 0.0) return 0.0;
    if (den == 0.0) return infinity;
    if (std::isinf(num) && std::isinf(den)) return 1.0;
    return num / den;
  };
  if (increasing) {
    double run = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (g[i] > run) run = g[i], arg = i;
      const double r = ratio(run, g[i]);
      if (r > out.L) out = {r, ts[arg], ts[i]};
    }
  } else {
    double run = infinity;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (g[i] < run) run = g[i], arg = i;
      const double r = ratio(g[i], run);
      if (r > out.L) out = {r, ts[arg], ts[i]};
    }
  }
  return out;
}

inline ConditionCertificate check_power_monotone(const PhiFunction& phi, double exponent, bool increasing,
                                                 const CheckOptions& o) {
  validate(phi, o);
  ConditionCertificate cert;
  cert.condition = increasing ? Condition::aInc : Condition::aDec;
  cert.parameter = exponent;
  cert.t_grid = log_grid(o.t_min, o.t_max, o.points_per_decade);
  // L over the full range and over a range three decades narrower on each
  // side; a bounded constant must not keep growing with the range.
  const double mid_lo = std::sqrt(o.t_min), mid_hi = std::sqrt(o.t_max);
  double L_full = 1.0, L_inner = 1.0;
  AlmostMonotone worst;
  std::size_t worst_site = 0;
  for (std::size_t site : distinct_sites(phi)) {
    std::vector<double> ts_in, g_in, g_full;
    for (double t : cert.t_grid) {
      const double v = phi(Site::node(site), t) / std::pow(t, exponent);
      g_full.push_back(v);
      if (t >= mid_lo * (1 - 1e-12) && t <= mid_hi * (1 + 1e-12)) ts_in.push_back(t), g_in.push_back(v);
    }
    const auto full = almost_constant(cert.t_grid, g_full, increasing);
    const auto inner = almost_constant(ts_in, g_in, increasing);
    if (full.L > L_full) L_full = full.L, worst = full, worst_site = site;
    L_inner = std::max(L_inner, inner.L);
  }
  cert.constant = L_full;
  cert.pass = std::isfinite(L_full) && L_full <= L_inner * (1.0 + 1e-6);
  if (L_full > 1.0) {
    cert.witness_x = site_point(phi, worst_site);
    cert.witness_s = worst.s;
    cert.witness_t = worst.t;
  }
  return cert;
}

}  // namespace detail

/// (A0): the largest beta on the grid with phi(x, beta) <= 1 <= phi(x, 1/beta) at every site.
inline ConditionCertificate check_A0(const PhiFunction& phi, const CheckOptions& o = {}) {
  detail::validate(phi, o);
  ConditionCertificate cert;
  cert.condition = Condition::A0;
  cert.beta_grid = detail::beta_grid(o);
  const auto sites = detail::distinct_sites(phi);
  std::size_t last_bad = 0;
  for (double beta : cert.beta_grid) {
    bool ok = true;
    for (std::size_t s : sites) {
      const Site site = Site::node(s);
      if (!(phi(site, beta) <= 1.0 && 1.0 <= phi(site, 1.0 / beta))) {
        ok = false;
        last_bad = s;
        break;
      }
    }
    if (ok) {
      cert.pass = true;
      cert.constant = beta;
      return cert;
    }
  }
  cert.witness_x = detail::site_point(phi, last_bad);
  cert.witness_t = cert.beta_grid.back();
  return cert;
}

/// (A1) for a given K, over node pairs x != y and t on the sampling grid.
/// The smallest feasible beta is located by bisection on the beta grid
/// (feasibility is monotone in beta since phi is increasing).
inline ConditionCertificate check_A1(const PhiFunction& phi, double K, const CheckOptions& o = {}) {
  detail::validate(phi, o);
  if (!(K > 0.0)) throw std::invalid_argument("check_A1: K must be positive");
  ConditionCertificate cert;
  cert.condition = Condition::A1;
  cert.parameter = K;
  cert.beta_grid = detail::beta_grid(o);
  cert.t_grid = detail::log_grid(o.t_min, o.t_max, o.points_per_decade);
  std::vector<std::size_t> nodes;
  const std::size_t n = phi.node_sites();
  const std::size_t stride = n <= o.max_pair_nodes ? 1 : (n + o.max_pair_nodes - 1) / o.max_pair_nodes;
  for (std::size_t i = 0; i < n; i += stride) nodes.push_back(i);
  const int dim = phi.x_dependent() ? phi.exponent()->domain().dim() : 1;

  struct Violation {
    std::size_t x, y;
    double t;
  };
  auto violation = [&](double beta) -> std::optional<Violation> {
    for (std::size_t x : nodes)
      for (std::size_t y : nodes) {
        if (x == y) continue;
        const double dist = distance(detail::site_point(phi, x), detail::site_point(phi, y));
        const double cap = dist > 0.0 ? K / std::pow(dist, dim) : infinity;
        for (double t : cert.t_grid) {
          const double py = phi(Site::node(y), t);
          if (py > cap) break;  // increasing in t
          if (phi(Site::node(x), beta * t) > py + 1.0) return Violation{x, y, t};
        }
      }
    return std::nullopt;
  };
  if (nodes.size() < 2) {
    cert.pass = true;
    cert.constant = 1.0;
    return cert;
  }
  if (!violation(1.0)) {
    cert.pass = true;
    cert.constant = 1.0;
    return cert;
  }
  if (auto v = violation(cert.beta_grid.back())) {
    cert.witness_x = detail::site_point(phi, v->x);
    cert.witness_y = detail::site_point(phi, v->y);
    cert.witness_t = v->t;
    return cert;
  }
  std::size_t bad = 0, good = cert.beta_grid.size() - 1;
  while (good - bad > 1) {
    const std::size_t mid = (bad + good) / 2;
    if (violation(cert.beta_grid[mid])) bad = mid;
    else good = mid;
  }
  cert.pass = true;
  cert.constant = cert.beta_grid[good];
  return cert;
}

/// (aInc)_p: t -> phi(x, t) / t^p is L-almost increasing.
inline ConditionCertificate check_aInc(const PhiFunction& phi, double p, const CheckOptions& o = {}) {
  return detail::check_power_monotone(phi, p, true, o);
}

/// (aDec)_q: t -> phi(x, t) / t^q is L-almost decreasing.
inline ConditionCertificate check_aDec(const PhiFunction& phi, double q, const CheckOptions& o = {}) {
  return detail::check_power_monotone(phi, q, false, o);
}

}  // namespace vexp
