#pragma once

// Linear-growth densities f on m x n matrices (flattened row-major),
// recession functions, the g-envelope, a sampled quasiconvexity tester and
// the truncations psi_j(x, xi) = phi_j(x, f(xi)).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vexp/exponent.hpp"
#include "vexp/grid.hpp"
#include "vexp/phi.hpp"

namespace vexp {

inline double euclidean_norm(std::span<const double> xi) {
  double s = 0.0;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}

class Integrand {
 public:
  enum class Kind { euclidean, weighted, smoothed, custom };
  using Fn = std::function<double(std::span<const double>)>;

  /// f(xi) = |xi|.
  static Integrand euclidean() {
    Integrand f(Kind::euclidean, "euclidean", 0, [](std::span<const double> xi) { return euclidean_norm(xi); });
    f.m_low_ = 1.0;
    f.M_up_ = 1.0;
    f.verify();
    return f;
  }

  /// f(xi) = |A vec(xi)| with A an invertible size x size matrix (row-major).
  static Integrand weighted(std::vector<double> a, int size) {
    if (size < 1 || a.size() != static_cast<std::size_t>(size * size))
      throw std::invalid_argument("weighted integrand: A must be size x size");
    Eigen::MatrixXd A(size, size);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) A(r, c) = a[r * size + c];
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    if (!(sv.minCoeff() > 0.0)) throw std::invalid_argument("weighted integrand: A is singular");
    auto mat = std::make_shared<const std::vector<double>>(std::move(a));
    Integrand f(Kind::weighted, "weighted", size, [mat, size](std::span<const double> xi) {
      if (xi.size() != static_cast<std::size_t>(size)) throw std::invalid_argument("weighted integrand: wrong size");
      double s = 0.0;
      for (int r = 0; r < size; ++r) {
        double acc = 0.0;
        for (int c = 0; c < size; ++c) acc += (*mat)[r * size + c] * xi[c];
        s += acc * acc;
      }
      return std::sqrt(s);
    });
    f.m_low_ = sv.minCoeff();
    f.M_up_ = std::max(1.0, sv.maxCoeff());
    f.verify();
    return f;
  }

  /// f(xi) = sqrt(eps^2 + |xi|^2) - eps. Linear growth holds only away from
  /// the origin, so the declared lower constant is 0.
  static Integrand smoothed(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("smoothed integrand: eps must be positive");
    Integrand f(Kind::smoothed, "smoothed", 0, [eps](std::span<const double> xi) {
      const double r = euclidean_norm(xi);
      // r^2 / (sqrt(eps^2 + r^2) + eps) avoids cancellation for small r.
      return r * r / (std::hypot(eps, r) + eps);
    });
    f.m_low_ = 0.0;
    f.M_up_ = 1.0;
    f.eps_ = eps;
    f.verify();
    return f;
  }

  /// User density on matrices of `size` entries with declared growth constants.
  static Integrand custom(Fn fn, double m_low, double M_up, int size, std::string name = "custom") {
    if (size < 1) throw std::invalid_argument("custom integrand: size must be >= 1");
    Integrand f(Kind::custom, std::move(name), size, std::move(fn));
    f.m_low_ = m_low;
    f.M_up_ = M_up;
    f.verify();
    return f;
  }

  double operator()(std::span<const double> xi) const { return fn_(xi); }
  double operator()(std::initializer_list<double> xi) const { return fn_(std::span<const double>(xi.begin(), xi.size())); }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  /// Required argument length, 0 when any length is accepted.
  int size() const { return size_; }
  double m_low() const { return m_low_; }
  double M_up() const { return M_up_; }
  double eps() const { return eps_; }

  /// c * f with constants scaled accordingly.
  Integrand scaled(double c) const {
    if (!(c > 0.0)) throw std::invalid_argument("integrand scale must be positive");
    Integrand f = *this;
    f.fn_ = [fn = fn_, c](std::span<const double> xi) { return c * fn(xi); };
    f.m_low_ *= c;
    f.M_up_ *= c;
    f.kind_ = Kind::custom;
    f.name_ = name_ + "*" + std::to_string(c);
    return f;
  }

 private:
  Integrand(Kind k, std::string name, int size, Fn fn) : kind_(k), name_(std::move(name)), size_(size), fn_(std::move(fn)) {}

  // (H0), (H2), (H3) on random directions at magnitudes 1e-6 .. 1e6.
  void verify() const {
    if (!(m_low_ >= 0.0) || !(M_up_ > 0.0) || m_low_ > M_up_)
      throw std::invalid_argument("integrand " + name_ + ": need 0 <= m <= M");
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    const std::vector<int> sizes = size_ > 0 ? std::vector<int>{size_} : std::vector<int>{1, 2, 4};
    for (int n : sizes) {
      std::vector<double> xi(n, 0.0);
      if (const double f0 = fn_(xi); f0 != 0.0)
        throw std::invalid_argument("integrand " + name_ + ": f(0) = " + std::to_string(f0) + ", expected 0");
      for (int sample = 0; sample < 64; ++sample) {
        for (double& v : xi) v = normal(rng);
        const double r0 = euclidean_norm(xi);
        for (int e = -6; e <= 6; ++e) {
          const double scale = std::pow(10.0, e) / r0;
          std::vector<double> x(xi);
          for (double& v : x) v *= scale;
          const double r = euclidean_norm(x);
          const double fx = fn_(x);
          if (!(fx >= m_low_ * r * (1.0 - 1e-12) - 1e-300))
            throw std::invalid_argument("integrand " + name_ + ": lower growth m|xi| <= f(xi) fails at |xi| = " +
                                        std::to_string(r));
          if (!(fx <= M_up_ * (1.0 + r) * (1.0 + 1e-12)))
            throw std::invalid_argument("integrand " + name_ + ": upper growth f(xi) <= M(1+|xi|) fails at |xi| = " +
                                        std::to_string(r));
        }
      }
    }
  }

  Kind kind_;
  std::string name_;
  int size_ = 0;
  Fn fn_;
  double m_low_ = 0.0;
  double M_up_ = 1.0;
  double eps_ = 0.0;
};

/// Parses `euclidean`, `weighted:a11,a12,...` (a square number of entries) or `smoothed:eps`.
inline Integrand parse_integrand(const std::string& spec) {
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
        throw std::invalid_argument("integrand spec '" + spec + "': bad number '" + tok + "'");
      }
    }
  }
  if (name == "euclidean" && args.empty()) return Integrand::euclidean();
  if (name == "smoothed" && args.size() == 1) return Integrand::smoothed(args[0]);
  if (name == "weighted" && !args.empty()) {
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(args.size()))));
    if (static_cast<std::size_t>(n * n) != args.size())
      throw std::invalid_argument("integrand spec '" + spec + "': weighted needs a square number of entries");
    return Integrand::weighted(std::move(args), n);
  }
  throw std::invalid_argument("unknown integrand spec '" + spec + "'");
}

struct RecessionEstimate {
  double value = 0.0;
  bool converged = true;
  /// Largest dyadic exponent k actually used (60 unless f overflowed).
  int k_max = 60;
};

/// limsup_{t -> inf} f(t xi) / t, estimated as the max of f(2^k xi) / 2^k over
/// the tail window k in [50, 60].
inline RecessionEstimate recession(const Integrand& f, std::span<const double> xi) {
  RecessionEstimate out;
  if (euclidean_norm(xi) == 0.0) return out;
  std::vector<double> ratios;
  std::vector<double> x(xi.begin(), xi.end());
  for (int k = 0; k <= 60; ++k) {
    const double t = std::ldexp(1.0, k);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = xi[i] * t;
    const double v = f(x) / t;
    if (!std::isfinite(v)) {
      out.converged = false;
      break;
    }
    ratios.push_back(v);
    out.k_max = k;
  }
  const int hi = static_cast<int>(ratios.size()) - 1;
  const int lo = std::max(0, hi - 10);
  const auto first = ratios.begin() + lo, last = ratios.begin() + hi + 1;
  out.value = *std::max_element(first, last);
  const double mn = *std::min_element(first, last);
  if (out.value - mn > 1e-6 * std::max(std::abs(out.value), 1e-300)) out.converged = false;
  return out;
}
inline RecessionEstimate recession(const Integrand& f, std::initializer_list<double> xi) {
  return recession(f, std::span<const double>(xi.begin(), xi.size()));
}

/// g(xi) = sup_{t > 0} f(t xi) / t over log-spaced t in [1e-8, 1e18].
inline double g_envelope(const Integrand& f, std::span<const double> xi) {
  if (euclidean_norm(xi) == 0.0) return 0.0;
  double best = 0.0;
  std::vector<double> x(xi.begin(), xi.end());
  for (int k = -8 * 16; k <= 18 * 16; ++k) {
    const double t = std::pow(10.0, k / 16.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = xi[i] * t;
    const double v = f(x) / t;
    if (std::isfinite(v)) best = std::max(best, v);
  }
  return best;
}
inline double g_envelope(const Integrand& f, std::initializer_list<double> xi) {
  return g_envelope(f, std::span<const double>(xi.begin(), xi.size()));
}

// ---------------------------------------------------------------------------
// Quasiconvexity tester

struct QuasiconvexityReport {
  bool pass = true;
  double f_xi = 0.0;
  /// Smallest average of f(xi + grad u) found.
  double min_value = 0.0;
  /// Perturbation attaining min_value (zero on the boundary).
  std::optional<GridFunction> witness;
};

/// Searches zero-boundary perturbations u on the unit cube (resolution cells
/// per axis) for average f(xi + grad u) < f(xi). A failure is a certified
/// counterexample; a pass is only evidence. xi is m x n row-major with n in {1, 2}.
inline QuasiconvexityReport quasiconvexity_test(const Integrand& f, std::span<const double> xi, int m, int n,
                                                int resolution = 16, int restarts = 8, std::uint64_t seed = 42) {
  if (resolution < 8) throw std::invalid_argument("quasiconvexity test: resolution must be >= 8");
  if (n < 1 || n > 2 || m < 1 || xi.size() != static_cast<std::size_t>(m * n))
    throw std::invalid_argument("quasiconvexity test: xi must be m x n with n in {1, 2}");
  const GridDomain d = n == 1 ? GridDomain::interval(0.0, 1.0, resolution)
                              : GridDomain::box({0.0, 1.0}, {0.0, 1.0}, resolution, resolution);
  const std::size_t ms = static_cast<std::size_t>(m * n);
  std::vector<char> interior(d.node_count(), 1);
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    const auto c = d.node_coords(i);
    for (int k = 0; k < n; ++k)
      if (c[k] == 0 || c[k] == d.cells(k)) interior[i] = 0;
  }
  const double cells = static_cast<double>(d.cell_count());
  auto energy = [&](const GridFunction& u) {
    const auto g = gradient(u);
    CompensatedSum s;
    std::vector<double> a(ms);
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
      const auto G = g.matrix(c);
      for (std::size_t e = 0; e < ms; ++e) a[e] = xi[e] + G[e];
      s.add(f(a));
    }
    return s.value() / cells;
  };
  // Central-difference derivative of f per cell, pulled back through the
  // exact adjoint of the gradient.
  auto descent_direction = [&](const GridFunction& u) {
    const auto g = gradient(u);
    std::vector<double> df(d.cell_count() * ms);
    std::vector<double> a(ms);
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
      const auto G = g.matrix(c);
      for (std::size_t e = 0; e < ms; ++e) a[e] = xi[e] + G[e];
      for (std::size_t e = 0; e < ms; ++e) {
        const double h = 1e-6 * (1.0 + std::abs(a[e]));
        const double keep = a[e];
        a[e] = keep + h;
        const double fp = f(a);
        a[e] = keep - h;
        const double fm = f(a);
        a[e] = keep;
        df[c * ms + e] = (fp - fm) / (2.0 * h);
      }
    }
    // grad_u E = -(vol / |Omega|) div(Df); the descent direction is its negative.
    const auto div = divergence(TestField(d, m, std::move(df)));
    std::vector<double> dir(div.values().begin(), div.values().end());
    for (std::size_t i = 0; i < d.node_count(); ++i)
      for (int alpha = 0; alpha < m; ++alpha) dir[i * m + alpha] = interior[i] ? dir[i * m + alpha] / cells : 0.0;
    return dir;
  };

  QuasiconvexityReport out;
  out.f_xi = f(xi);
  out.min_value = out.f_xi;
  std::mt19937_64 rng(seed);
  const double amp = (1.0 + euclidean_norm(xi)) / resolution;
  for (int r = 0; r <= restarts; ++r) {
    std::vector<double> v(d.node_count() * m, 0.0);
    if (r > 0)
      for (std::size_t i = 0; i < d.node_count(); ++i)
        for (int alpha = 0; alpha < m; ++alpha)
          v[i * m + alpha] = interior[i] ? amp * (2.0 * detail::uniform01(rng) - 1.0) : 0.0;
    GridFunction u(d, m, v);
    double e = energy(u);
    double step = 1.0;
    for (int it = 0; it < 400; ++it) {
      const auto dir = descent_direction(u);
      double dd = 0.0;
      for (double x : dir) dd += x * x;
      if (dd == 0.0) break;
      bool accepted = false;
      while (step > 1e-14) {
        std::vector<double> trial(u.values().begin(), u.values().end());
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += step * dir[i];
        GridFunction cand(d, m, std::move(trial));
        const double ec = energy(cand);
        if (ec <= e - 1e-4 * step * dd) {
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
    if (e < out.min_value) {
      out.min_value = e;
      out.witness = u;
    }
  }
  out.pass = out.min_value >= out.f_xi - 1e-6 * (1.0 + out.f_xi);
  if (out.pass) out.witness.reset();
  return out;
}

// ---------------------------------------------------------------------------
// Truncations

/// phi_j(p, t) = t^p for t <= j, else j^p + p j^(p-1) (t - j).
inline double truncated_power(double t, double p, double j) {
  if (t <= j) return std::pow(t, p);
  return std::pow(j, p) + p * std::pow(j, p - 1.0) * (t - j);
}

/// Psi_j = p j^(p-1) f^inf(xi).
inline double truncated_recession(const Integrand& f, double p, double j, std::span<const double> xi) {
  if (!(j >= 1.0)) throw std::invalid_argument("truncation level j must be >= 1");
  return p * std::pow(j, p - 1.0) * recession(f, xi).value;
}

/// psi_j(x, xi) = phi_j(p(x), f(xi)) with p taken at a node or cell site.
class TruncatedIntegrand {
 public:
  TruncatedIntegrand(Integrand f, std::shared_ptr<const ExponentField> p, double j) : f_(std::move(f)), p_(std::move(p)), j_(j) {
    if (!(j_ >= 1.0)) throw std::invalid_argument("truncation level j must be >= 1");
  }
  double exponent_at(Site s) const { return s.cell ? p_->at_cell(s.index) : p_->at_node(s.index); }
  double operator()(Site s, std::span<const double> xi) const { return truncated_power(f_(xi), exponent_at(s), j_); }
  double recession(Site s, std::span<const double> xi) const { return truncated_recession(f_, exponent_at(s), j_, xi); }
  double level() const { return j_; }
  const Integrand& base() const { return f_; }
  const ExponentField& exponent() const { return *p_; }

 private:
  Integrand f_;
  std::shared_ptr<const ExponentField> p_;
  double j_;
};

inline TruncatedIntegrand truncated_integrand(const Integrand& f, const ExponentField& p, double j) {
  return TruncatedIntegrand(f, std::make_shared<const ExponentField>(p), j);
}

}  // namespace vexp
