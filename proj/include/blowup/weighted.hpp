#ifndef BLOWUP_WEIGHTED_HPP
#define BLOWUP_WEIGHTED_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "blowup/core.hpp"
#include "blowup/numerics.hpp"
#include "blowup/profile.hpp"

namespace blowup::semigroup {

/// Symmetry of a one-dimensional field under y -> -y. Odd fields exist only for N = 1
/// and represent coordinate-like functions through their restriction to y >= 0.
enum class Parity { Even, Odd };

/// Model for ψ beyond the last sample: zero, or coefficient·r^{-exponent}.
struct FarField {
  enum class Kind { Zero, PowerLaw };
  Kind kind = Kind::Zero;
  double exponent = 0.0;
  double coefficient = 0.0;

  static FarField zero() { return {}; }
  /// Power law whose coefficient is matched to the boundary sample at construction.
  static FarField power_law(double exponent) { return {Kind::PowerLaw, exponent, 0.0}; }
};

/// Radial function ψ(|y|) given by samples on [0, r_max], a cubic spline between samples
/// (zero slope at the origin for even fields) and a far-field model beyond r_max.
class WeightedField {
 public:
  WeightedField() = default;

  WeightedField(std::vector<double> r, std::vector<double> values, int N, FarField far = FarField::zero(),
                Parity parity = Parity::Even)
      : N_(N), far_(far), parity_(parity) {
    if (N < 1) throw InvalidParameter("dimension N must be >= 1");
    if (parity == Parity::Odd && N != 1) throw InvalidParameter("odd fields are one-dimensional");
    if (r.size() < 2 || r.size() != values.size()) throw InvalidParameter("field needs >= 2 matching samples");
    if (r.front() != 0.0) throw InvalidParameter("field samples must start at r = 0");
    for (double v : values) {
      if (!std::isfinite(v)) throw InvalidParameter("field values must be finite");
      max_abs_ = std::max(max_abs_, std::fabs(v));
    }
    if (parity == Parity::Odd && values.front() != 0.0) throw InvalidParameter("odd field must vanish at 0");
    const double rb = r.back(), vb = values.back();
    spline_ = numerics::CubicSpline(std::move(r), std::move(values),
                                    parity == Parity::Even ? 0.0 : std::nan(""));
    if (far_.kind == FarField::Kind::PowerLaw) {
      far_.coefficient = vb * std::pow(rb, far_.exponent);
    } else if (std::fabs(vb) > 1e-6 * max_abs_) {
      throw InvalidParameter("field does not vanish at r_max; use a power-law far field");
    }
  }

  /// Samples f on the given grid.
  template <class F>
  static WeightedField sample(F&& f, const std::vector<double>& grid, int N, FarField far = FarField::zero(),
                              Parity parity = Parity::Even) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
    if (parity == Parity::Odd) v.front() = 0.0;
    return WeightedField(grid, std::move(v), N, far, parity);
  }

  static WeightedField constant(double c, int N, double r_max = 8.0) {
    return WeightedField({0.0, 0.5 * r_max, r_max}, {c, c, c}, N, FarField::power_law(0.0));
  }

  static WeightedField zero(int N, double r_max = 8.0) {
    return WeightedField({0.0, 0.5 * r_max, r_max}, {0.0, 0.0, 0.0}, N, FarField::zero());
  }

  /// ψ at radius r >= 0 (for odd fields, r may be negative).
  double operator()(double r) const {
    if (r < 0.0) {
      return parity_ == Parity::Odd ? -(*this)(-r) : (*this)(-r);
    }
    if (r <= spline_.back()) return spline_(r);
    if (far_.kind == FarField::Kind::Zero) return 0.0;
    return far_.coefficient * std::pow(r, -far_.exponent);
  }

  int N() const { return N_; }
  double r_max() const { return spline_.back(); }
  const std::vector<double>& knots() const { return spline_.knots(); }
  const std::vector<double>& values() const { return spline_.values(); }
  const FarField& far_field() const { return far_; }
  Parity parity() const { return parity_; }
  double max_abs() const { return max_abs_; }
  bool is_zero() const { return max_abs_ == 0.0 && (far_.kind == FarField::Kind::Zero || far_.coefficient == 0.0); }

  WeightedField scaled(double c) const {
    std::vector<double> v = values();
    for (double& x : v) x *= c;
    return WeightedField(knots(), std::move(v), N_, far_, parity_);
  }

 private:
  int N_ = 1;
  FarField far_;
  Parity parity_ = Parity::Even;
  numerics::CubicSpline spline_;
  double max_abs_ = 0.0;
};

/// Φ ≥ 0 with Γ = max Φ and Φ(y) ≤ C/|y|². Evaluation clamps the spline to [0, Γ].
class PotentialField {
 public:
  PotentialField() = default;

  explicit PotentialField(WeightedField base) : base_(std::move(base)) {
    const auto& r = base_.knots();
    const auto& v = base_.values();
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (v[i] < 0.0) throw InvalidParameter("potential must be nonnegative");
      gamma_ = std::max(gamma_, v[i]);
      if (r[i] > 0.0) decay_c_ = std::max(decay_c_, v[i] * r[i] * r[i]);
    }
    const auto& far = base_.far_field();
    if (far.kind == FarField::Kind::PowerLaw) {
      // a slower far field (such as a constant potential) has no finite decay constant
      if (far.exponent < 2.0 && far.coefficient != 0.0) decay_c_ = INFINITY;
    }
  }

  double operator()(double r) const { return std::clamp(base_(r), 0.0, gamma_); }
  double gamma() const { return gamma_; }
  double decay_c() const { return decay_c_; }
  const WeightedField& field() const { return base_; }
  int N() const { return base_.N(); }
  bool is_zero() const { return gamma_ == 0.0; }

 private:
  WeightedField base_;
  double gamma_ = 0.0;
  double decay_c_ = 0.0;
};

/// Graded sampling grid on [0, R]: uniform spacing h up to r_fine, geometric beyond.
inline std::vector<double> field_grid(double R, double h = 0.02, double r_fine = 10.0, double growth = 1.01) {
  std::vector<double> g{0.0};
  double r = 0.0, step = h;
  while (r + step < R) {
    r += step;
    g.push_back(r);
    if (r >= r_fine) step *= growth;
  }
  if (R - g.back() < 0.25 * step && g.size() > 1) g.back() = R;
  else g.push_back(R);
  return g;
}

/// Φ(r) = min(Γ, 2(N-2)/r²): the capped potential e^{φ∞} of the singular steady state.
inline PotentialField singular_potential(int N, double gamma, double R = 64.0) {
  if (N < 3) throw InvalidParameter("singular potential needs N >= 3");
  if (!(gamma > 0.0)) throw InvalidParameter("Gamma must be > 0");
  const double c = 2.0 * (N - 2.0);
  auto grid = field_grid(R);
  const double kink = std::sqrt(c / gamma);
  grid.insert(std::upper_bound(grid.begin(), grid.end(), kink), kink);
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return PotentialField(WeightedField::sample(
      [&](double r) { return r == 0.0 ? gamma : std::min(gamma, c / (r * r)); }, grid, N, FarField::power_law(2.0)));
}

/// Φ(r) = Γ c / (c + Γ r²), c = 2(N-2): a smooth potential with the same maximum and decay constant
/// as the capped singular potential.
inline PotentialField regularized_potential(int N, double gamma, double R = 64.0) {
  if (N < 3) throw InvalidParameter("regularized potential needs N >= 3");
  if (!(gamma > 0.0)) throw InvalidParameter("Gamma must be > 0");
  const double c = 2.0 * (N - 2.0);
  return PotentialField(WeightedField::sample([&](double r) { return gamma * c / (c + gamma * r * r); },
                                              field_grid(R), N, FarField::power_law(2.0)));
}

/// Φ = e^{φ} for a tail-convergent profile; decays like e^{C}/|y|².
inline PotentialField profile_potential(const profile::RadialProfile& prof, double R = 64.0) {
  if (prof.classification != profile::Classification::TailConvergent || !prof.nl.is_exponential()) {
    throw InvalidParameter("profile potential needs a tail-convergent exponential profile");
  }
  return PotentialField(WeightedField::sample([&](double r) { return std::exp(prof.value(r)); }, field_grid(R),
                                              prof.N, FarField::power_law(2.0)));
}

inline PotentialField constant_potential(double gamma, int N, double R = 64.0) {
  return PotentialField(WeightedField::constant(gamma, N, R));
}

namespace detail {

/// Area factor of a sphere S^{N-1} of radius ρ seen through the shifted Gaussian:
///   A_N(z) = |S^{N-2}| ∫_0^π exp(-z(1 - cos θ)) sin^{N-2} θ dθ,   z = ρ c / (2σ²),
/// evaluated by Gauss-Legendre quadrature on [0, θ_c] beyond which the integrand is below e^{-40}.
inline double angular_factor_quadrature(int N, double z) {
  const double sphere = numerics::sphere_area(N - 2);
  const double theta_c = z > 0.0 ? std::min(kPi, kPi * std::sqrt((40.0 + N) / (2.0 * z))) : kPi;
  const auto& g = numerics::gauss_legendre<24>();
  double sum = 0.0;
  for (int panel = 0; panel < 2; ++panel) {
    const double a = 0.5 * theta_c * panel, b = 0.5 * theta_c * (panel + 1);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double th = mid + half * g.nodes[i];
      const double s = std::sin(0.5 * th);
      sum += half * g.weights[i] * std::exp(-2.0 * z * s * s) * std::pow(std::sin(th), N - 2);
    }
  }
  return sphere * sum;
}

/// log A_N tabulated against log z and interpolated by a cubic spline. Tables are built once
/// per dimension and shared read-only.
class AngularTable {
 public:
  static constexpr double kLogMin = -18.0;
  static constexpr double kLogMax = 28.0;
  static constexpr int kIntervals = 9200;

  explicit AngularTable(int N) : N_(N), sphere_(numerics::sphere_area(N - 1)) {
    std::vector<double> x(kIntervals + 1), f(kIntervals + 1);
    for (int i = 0; i <= kIntervals; ++i) {
      x[i] = kLogMin + (kLogMax - kLogMin) * i / kIntervals;
      f[i] = std::log(angular_factor_quadrature(N, std::exp(x[i])));
    }
    spline_ = numerics::CubicSpline(std::move(x), std::move(f));
  }

  double operator()(double z) const {
    if (z <= 0.0) return sphere_;
    const double lz = std::log(z);
    if (lz < kLogMin) return sphere_ * (1.0 - z);
    if (lz > kLogMax) return angular_factor_quadrature(N_, z);
    return std::exp(spline_(lz));
  }

  static const AngularTable& get(int N) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<AngularTable>> tables;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = tables[N];
    if (!slot) slot = std::make_unique<AngularTable>(N);
    return *slot;
  }

 private:
  int N_;
  double sphere_;
  numerics::CubicSpline spline_;
};

/// A_N(z) with A_1(z) = 1 ± e^{-2z} for even / odd one-dimensional fields.
inline double angular_factor(int N, double z, Parity parity = Parity::Even) {
  if (N == 1) return parity == Parity::Even ? 1.0 + std::exp(-2.0 * z) : -std::expm1(-2.0 * z);
  return AngularTable::get(N)(z);
}

}  // namespace detail

/// ∫_{R^N} F(|λ|) exp(-|λ - c e₁|² / (4σ²)) dλ for a radial integrand F given on ρ ≥ 0.
/// Odd parity (N = 1) integrates the odd extension of F instead.
/// The radial integral is truncated to |ρ - c| ≤ 14σ; `knots` are panel breakpoints where F is not smooth.
template <class F>
double shifted_gaussian_integral(F&& f, int N, double c, double sigma2, Parity parity = Parity::Even,
                                 std::span<const double> knots = {}) {
  const double sigma = std::sqrt(sigma2);
  const double W = 14.0 * sigma;
  const double lo = std::max(0.0, c - W), hi = c + W;
  const double width = std::min(0.2, 0.5 * sigma);
  std::vector<double> inside;
  for (double k : knots) {
    if (k > lo && k < hi) inside.push_back(k);
  }
  std::sort(inside.begin(), inside.end());
  const auto breaks = numerics::panel_breaks(lo, hi, width, inside);
  const auto& g = numerics::gauss_legendre<10>();
  const detail::AngularTable* table = N > 1 ? &detail::AngularTable::get(N) : nullptr;
  const double inv4s2 = 1.0 / (4.0 * sigma2);
  const double zscale = c / (2.0 * sigma2);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double rho = mid + half * g.nodes[i];
      const double fv = f(rho);
      if (fv == 0.0) continue;
      const double d = rho - c;
      const double z = rho * zscale;
      const double ang = table ? (*table)(z) : detail::angular_factor(1, z, parity);
      sum += half * g.weights[i] * fv * numerics::int_pow(rho, N - 1) * std::exp(-d * d * inv4s2) * ang;
    }
  }
  return sum;
}

/// Which shifted norm: ℒ^q_ξ at a fixed shift |ξ|, or 𝒩^q_r = sup over |ξ| ≤ r.
struct NormSpec {
  enum class Kind { Shift, SupRadius };
  Kind kind = Kind::Shift;
  double q = 2.0;
  double value = 0.0;

  static NormSpec shift(double q, double xi) { return {Kind::Shift, q, xi}; }
  static NormSpec sup_radius(double q, double r) { return {Kind::SupRadius, q, r}; }

  void validate() const {
    if (!(q > 1.0) || !std::isfinite(q)) throw InvalidParameter("norm exponent q must be > 1");
    if (!(value >= 0.0)) throw InvalidParameter("shift / radius must be >= 0");
  }
};

/// ℒ^q_ξ(ψ) = (∫ |ψ(y)|^q e^{-|y-ξ|²/4} dy)^{1/q}; depends only on |ξ| for radial ψ.
inline double shifted_norm(const WeightedField& psi, double q, double xi) {
  if (!(q > 1.0)) throw InvalidParameter("norm exponent q must be > 1");
  if (psi.is_zero()) return 0.0;
  const double I = shifted_gaussian_integral([&](double r) { return std::pow(std::fabs(psi(r)), q); }, psi.N(),
                                             std::fabs(xi), 1.0, Parity::Even, std::array{psi.r_max()});
  return std::pow(I, 1.0 / q);
}

struct SupNorm {
  double value = 0.0;
  double argmax = 0.0;
};

/// 𝒩^q_r(ψ) with its maximising |ξ|: grid search over [0, r] then Brent refinement.
inline SupNorm sup_shifted_norm(const WeightedField& psi, double q, double r) {
  if (!(q > 1.0)) throw InvalidParameter("norm exponent q must be > 1");
  if (!(r >= 0.0)) throw InvalidParameter("radius must be >= 0");
  if (psi.is_zero()) return {};
  if (r == 0.0) return {shifted_norm(psi, q, 0.0), 0.0};
  const int n = std::max(8, static_cast<int>(std::ceil(r / 0.25)));
  SupNorm best{-1.0, 0.0};
  std::vector<double> vals(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double s = r * i / n;
    vals[i] = shifted_norm(psi, q, s);
    if (vals[i] > best.value) best = {vals[i], s};
  }
  const int i = static_cast<int>(std::lround(best.argmax / r * n));
  const double a = r * std::max(0, i - 1) / n, b = r * std::min(n, i + 1) / n;
  auto neg = [&](double s) { return -shifted_norm(psi, q, s); };
  const auto res = boost::math::tools::brent_find_minima(neg, a, b, 40);
  if (-res.second > best.value) best = {-res.second, res.first};
  return best;
}

inline double norm(const WeightedField& psi, const NormSpec& spec) {
  spec.validate();
  if (spec.kind == NormSpec::Kind::Shift) return shifted_norm(psi, spec.q, spec.value);
  return sup_shifted_norm(psi, spec.q, spec.value).value;
}

/// ‖ψ‖_{L^q_ρ} = ℒ^q_0(ψ).
inline double weighted_lq(const WeightedField& psi, double q = 2.0) { return shifted_norm(psi, q, 0.0); }

inline double potential_shifted_norm(const PotentialField& phi, double q, double xi) {
  if (phi.is_zero()) return 0.0;
  const double I = shifted_gaussian_integral([&](double r) { return std::pow(phi(r), q); }, phi.N(), std::fabs(xi),
                                             1.0, Parity::Even, std::array{phi.field().r_max()});
  return std::pow(I, 1.0 / q);
}

/// L²_ρ distance between two fields of the same dimension and parity.
inline double weighted_l2_distance(const WeightedField& a, const WeightedField& b) {
  if (a.N() != b.N() || a.parity() != b.parity()) throw InvalidParameter("fields are not comparable");
  const double knot = std::min(a.r_max(), b.r_max());
  const double I = shifted_gaussian_integral(
      [&](double r) {
        const double d = a(r) - b(r);
        return d * d;
      },
      a.N(), 0.0, 1.0, Parity::Even, std::array{knot});
  return std::sqrt(I);
}

}  // namespace blowup::semigroup

#endif  // BLOWUP_WEIGHTED_HPP
