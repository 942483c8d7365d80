#ifndef BLOWUP_NUMERICS_HPP
#define BLOWUP_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "blowup/core.hpp"

namespace blowup::numerics {

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

template <unsigned Points>
const GaussRule& gauss_legendre() {
  static const GaussRule rule = [] {
    using G = boost::math::quadrature::gauss<double, Points>;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    GaussRule r;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        r.nodes.push_back(0.0);
        r.weights.push_back(w[i]);
      } else {
        r.nodes.push_back(-a[i]);
        r.weights.push_back(w[i]);
        r.nodes.push_back(a[i]);
        r.weights.push_back(w[i]);
      }
    }
    std::vector<std::size_t> idx(r.nodes.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return r.nodes[x] < r.nodes[y]; });
    GaussRule sorted;
    for (auto i : idx) {
      sorted.nodes.push_back(r.nodes[i]);
      sorted.weights.push_back(r.weights[i]);
    }
    return sorted;
  }();
  return rule;
}

/// Composite Gauss–Legendre nodes over the panels delimited by `breaks`.
struct QuadratureNodes {
  std::vector<double> x;
  std::vector<double> w;
};

template <unsigned Points>
QuadratureNodes composite_nodes(std::span<const double> breaks) {
  const auto& g = gauss_legendre<Points>();
  QuadratureNodes q;
  q.x.reserve(breaks.size() * Points);
  q.w.reserve(breaks.size() * Points);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      q.x.push_back(mid + half * g.nodes[i]);
      q.w.push_back(half * g.weights[i]);
    }
  }
  return q;
}

/// x^n for small nonnegative integer n.
inline double int_pow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

/// Splits [a, b] into panels no wider than max_width, keeping any interior knots as breaks.
inline std::vector<double> panel_breaks(double a, double b, double max_width, std::span<const double> knots = {}) {
  std::vector<double> pts{a};
  auto push_span = [&](double lo, double hi) {
    const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_width - 1e-12)));
    for (int i = 1; i <= n; ++i) pts.push_back(i == n ? hi : lo + (hi - lo) * i / n);
  };
  double last = a;
  for (double k : knots) {
    if (k <= last || k >= b) continue;
    push_span(last, k);
    last = k;
  }
  push_span(last, b);
  return pts;
}

/// Thomas algorithm; sub[0] and sup[n-1] are ignored. Overwrites rhs with the solution.
inline void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag, std::span<const double> sup,
                              std::span<double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n);
  double denom = diag[0];
  if (denom == 0.0) throw NumericalError("singular tridiagonal system");
  c[0] = n > 1 ? sup[0] / denom : 0.0;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * c[i - 1];
    if (denom == 0.0) throw NumericalError("singular tridiagonal system");
    c[i] = i + 1 < n ? sup[i] / denom : 0.0;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

/// Cubic spline through (x_i, f_i). Left end is clamped to a given slope when
/// `left_slope` is finite (radial functions use 0 at the origin); natural otherwise.
/// The right end is natural.
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> x, std::vector<double> f, double left_slope = std::nan(""))
      : x_(std::move(x)), f_(std::move(f)) {
    const std::size_t n = x_.size();
    if (n < 2 || f_.size() != n) throw InvalidParameter("spline needs >= 2 matching samples");
    for (std::size_t i = 1; i < n; ++i) {
      if (!(x_[i] > x_[i - 1])) throw InvalidParameter("spline abscissae must be strictly increasing");
    }
    m_.assign(n, 0.0);
    if (n == 2 && !std::isfinite(left_slope)) return;
    std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
    if (std::isfinite(left_slope)) {
      const double h = x_[1] - x_[0];
      diag[0] = h / 3.0;
      sup[0] = h / 6.0;
      rhs[0] = (f_[1] - f_[0]) / h - left_slope;
    } else {
      diag[0] = 1.0;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      sub[i] = h0 / 6.0;
      diag[i] = (h0 + h1) / 3.0;
      sup[i] = h1 / 6.0;
      rhs[i] = (f_[i + 1] - f_[i]) / h1 - (f_[i] - f_[i - 1]) / h0;
    }
    diag[n - 1] = 1.0;
    solve_tridiagonal(sub, diag, sup, rhs);
    m_ = std::move(rhs);
  }

  std::size_t size() const { return x_.size(); }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return f_; }
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

  double operator()(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return a * f_[i] + b * f_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

  double derivative(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return (f_[i + 1] - f_[i]) / h + ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
  }

 private:
  std::size_t segment(double x) const {
    if (x <= x_.front()) return 0;
    if (x >= x_.back()) return x_.size() - 2;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
  }

  std::vector<double> x_;
  std::vector<double> f_;
  std::vector<double> m_;
};

/// Finite-difference weights for the derivative of order `order` at x0 from the
/// stencil points xs (Fornberg's recursion).
inline std::vector<double> fd_weights(double x0, std::span<const double> xs, int order) {
  const int n = static_cast<int>(xs.size()) - 1;
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = c[i][order];
  return out;
}

/// Grid on [0, R] uniform in asinh(r / scale): spacing ~ scale·d near 0, ~ r·d far out.
inline std::vector<double> sinh_graded_grid(double R, std::size_t intervals, double scale) {
  std::vector<double> g(intervals + 1);
  const double top = std::asinh(R / scale);
  for (std::size_t i = 0; i <= intervals; ++i) {
    g[i] = scale * std::sinh(top * static_cast<double>(i) / static_cast<double>(intervals));
  }
  g.front() = 0.0;
  g.back() = R;
  return g;
}

inline std::vector<double> uniform_grid(double R, std::size_t intervals) {
  std::vector<double> g(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) g[i] = R * static_cast<double>(i) / static_cast<double>(intervals);
  g.back() = R;
  return g;
}

/// Surface area of the unit sphere S^{d} ⊂ R^{d+1}.
inline double sphere_area(int d) {
  return 2.0 * std::pow(kPi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
}

}  // namespace blowup::numerics

#endif  // BLOWUP_NUMERICS_HPP
