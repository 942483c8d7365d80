#ifndef BLOWUP_PROFILE_HPP
#define BLOWUP_PROFILE_HPP

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "blowup/core.hpp"
#include "blowup/numerics.hpp"

namespace blowup::profile {

enum class Classification { Trivial, TailConvergent, Divergent, Undetermined };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::Trivial: return "Trivial";
    case Classification::TailConvergent: return "TailConvergent";
    case Classification::Divergent: return "Divergent";
    case Classification::Undetermined: return "Undetermined";
  }
  return "?";
}

struct ShootOptions {
  double r_max = 40.0;
  double tol = 1e-10;
  double start_radius = 1e-4;       // upper bound; shrunk for steep cores
  double tail_drift_tol = 1e-3;     // |d| in v ≈ C + d log(r/r_end) + b r^{-2}
  double far_spacing = 0.05;        // output spacing reached at r_max
  double exp_guard = 50.0;
};

/// Asymptotic tail φ ≈ -2 log r + C + b r^{-2} (exponential) or C r^{-m} + b r^{-m-2} (power).
struct TailModel {
  double constant = 0.0;
  double correction = 0.0;
};

/// A radial solution of the stationary profile equation
///   φ'' + ((N-1)/r - r/2) φ' + g(φ) = 0,  φ(0) = α (or κ + α), φ'(0) = 0.
struct RadialProfile {
  double alpha = 0.0;
  Nonlinearity nl = Nonlinearity::exponential();
  int N = 3;
  std::vector<double> r;
  std::vector<double> phi;
  std::vector<double> dphi;
  std::optional<double> tail_constant;
  std::optional<TailModel> tail;
  Classification classification = Classification::Undetermined;
  double tol = 1e-10;
  std::string diagnostic;

  double r_end() const { return r.empty() ? 0.0 : r.back(); }

  /// Profile value; beyond the sampled range the tail model is used when present.
  double value(double x) const { return eval(x, false); }
  double derivative(double x) const { return eval(x, true); }

  bool covers(double x) const {
    return x <= r_end() || classification == Classification::Trivial || tail.has_value();
  }

 private:
  double eval(double x, bool deriv) const {
    if (r.empty()) throw InvalidParameter("empty profile");
    x = std::fabs(x);
    if (x > r.back()) {
      if (classification == Classification::Trivial) return deriv ? 0.0 : phi.back();
      if (!tail) throw DomainError("profile evaluated beyond its samples without a tail model");
      return eval_tail(x, deriv);
    }
    auto it = std::upper_bound(r.begin(), r.end(), x);
    std::size_t i = it == r.end() ? r.size() - 2 : static_cast<std::size_t>(it - r.begin()) - 1;
    if (i + 1 >= r.size()) i = r.size() - 2;
    const double h = r[i + 1] - r[i];
    const double t = (x - r[i]) / h;
    // cubic Hermite on (phi, dphi)
    const double t2 = t * t, t3 = t2 * t;
    if (!deriv) {
      return (2 * t3 - 3 * t2 + 1) * phi[i] + (t3 - 2 * t2 + t) * h * dphi[i] + (-2 * t3 + 3 * t2) * phi[i + 1] +
             (t3 - t2) * h * dphi[i + 1];
    }
    return ((6 * t2 - 6 * t) * phi[i] + (-6 * t2 + 6 * t) * phi[i + 1]) / h + (3 * t2 - 4 * t + 1) * dphi[i] +
           (3 * t2 - 2 * t) * dphi[i + 1];
  }

  double eval_tail(double x, bool deriv) const {
    const double C = tail->constant;
    const double b = tail->correction;
    if (nl.is_exponential()) {
      return deriv ? -2.0 / x - 2.0 * b / (x * x * x) : -2.0 * std::log(x) + C + b / (x * x);
    }
    const double m = nl.tail_exponent();
    if (deriv) return -m * C * std::pow(x, -m - 1.0) - (m + 2.0) * b * std::pow(x, -m - 3.0);
    return C * std::pow(x, -m) + b * std::pow(x, -m - 2.0);
  }
};

inline double profile_origin_value(double alpha, const Nonlinearity& nl) {
  return nl.is_exponential() ? alpha : nl.kappa() + alpha;
}

/// Residual φ'' + ((N-1)/r - r/2) φ' + g(φ) by direct substitution.
inline double ode_residual(const Nonlinearity& nl, int N, double r, double phi, double dphi, double d2phi) {
  return d2phi + ((N - 1.0) / r - 0.5 * r) * dphi + nl.profile_reaction(phi);
}

/// Tail variable v(r): φ + 2 log r, or r^{2/(p-1)} φ.
inline double tail_variable(const Nonlinearity& nl, double r, double phi) {
  return nl.is_exponential() ? phi + 2.0 * std::log(r) : std::pow(r, nl.tail_exponent()) * phi;
}

/// r v'(r).
inline double tail_drift(const Nonlinearity& nl, double r, double phi, double dphi) {
  if (nl.is_exponential()) return r * dphi + 2.0;
  const double m = nl.tail_exponent();
  return std::pow(r, m) * (m * phi + r * dphi);
}

/// Coefficient b of the r^{-2} correction implied by the equation for a tail constant C.
inline double asymptotic_correction(const Nonlinearity& nl, int N, double C) {
  if (nl.is_exponential()) return 2.0 * (N - 2.0) - std::exp(C);
  const double m = nl.tail_exponent();
  return C * m * (N - 2.0 - m) - std::copysign(std::pow(std::fabs(C), nl.p()), C);
}

namespace detail {

using State = std::array<double, 2>;
namespace odeint = boost::numeric::odeint;

struct ProfileSystem {
  Nonlinearity nl;
  int N;
  void operator()(const State& x, State& dxdt, double r) const {
    dxdt[0] = x[1];
    dxdt[1] = -((N - 1.0) / r - 0.5 * r) * x[1] - nl.profile_reaction(x[0]);
  }
};

using Stepper = odeint::runge_kutta_dopri5<State>;
using Controlled = decltype(odeint::make_controlled(1.0, 1.0, Stepper()));

enum class StepStatus { Reached, Underflow };

/// Advances x from r to `target` (either direction) with adaptive steps that land exactly on target.
inline StepStatus advance(Controlled& stepper, const ProfileSystem& sys, State& x, double& r, double target,
                          double& h_free) {
  const double dir = target > r ? 1.0 : -1.0;
  h_free = dir * std::fabs(h_free);
  while (dir * (target - r) > 0.0) {
    const double remaining = target - r;
    double h = dir * std::min(std::fabs(h_free), std::fabs(remaining));
    const bool clamped = std::fabs(h) < std::fabs(h_free);
    const double h_in = h;
    const auto res = stepper.try_step(sys, x, r, h);
    if (res == odeint::success) {
      if (!clamped || std::fabs(h) < std::fabs(h_free)) h_free = h;
      if (clamped && h_in == remaining) r = target;
      if (std::fabs(target - r) <= 1e-14 * std::fabs(target)) r = target;
    } else {
      h_free = h;
      if (std::fabs(h) < 1e-15 * std::max(1.0, std::fabs(r))) return StepStatus::Underflow;
    }
  }
  return StepStatus::Reached;
}

inline double core_scale(const Nonlinearity& nl, int N, double phi0) {
  const double g = std::fabs(nl.profile_reaction(phi0));
  if (g == 0.0) return 1.0;
  return std::min(1.0, std::sqrt(2.0 * N / g));
}

inline double overflow_bound(const Nonlinearity& nl, double r, double guard) {
  if (nl.is_exponential()) return guard;
  return 10.0 * nl.kappa() * std::pow(r, -nl.tail_exponent()) + 100.0;
}

/// Regular series about the origin: φ(0) + b r² + c r⁴ with b = -g/(2N), c = b(1 - g')/(4(N+2)).
struct OriginSeries {
  double phi0, b, c;
  double value(double r) const { return phi0 + r * r * (b + c * r * r); }
  double slope(double r) const { return r * (2.0 * b + 4.0 * c * r * r); }
};

inline OriginSeries origin_series(const Nonlinearity& nl, int N, double phi0) {
  const double b = -nl.profile_reaction(phi0) / (2.0 * N);
  return {phi0, b, b * (1.0 - nl.profile_reaction_prime(phi0)) / (4.0 * (N + 2.0))};
}

inline double start_radius(const Nonlinearity& nl, int N, double phi0, double upper) {
  return std::min(upper, 1e-3 * core_scale(nl, N, phi0));
}

inline std::vector<double> output_grid(const Nonlinearity& nl, int N, double phi0, const ShootOptions& o) {
  const double scale = core_scale(nl, N, phi0);
  const double top = std::asinh(o.r_max / scale);
  const auto n = static_cast<std::size_t>(std::ceil(top * o.r_max / o.far_spacing));
  return numerics::sinh_graded_grid(o.r_max, std::max<std::size_t>(n, 64), scale);
}

enum class MarchEnd { Completed, Stopped, Overflow, Underflow };

struct MarchResult {
  MarchEnd end;
  double r;
};

/// Integrates outward from the origin through the grid nodes, calling
/// visit(r, φ, φ') at each node (including r = 0). visit returns false to stop.
template <class Visit>
MarchResult march(double phi0, const Nonlinearity& nl, int N, const ShootOptions& o, const std::vector<double>& grid,
                  Visit&& visit) {
  const auto series = origin_series(nl, N, phi0);
  const double r0 = start_radius(nl, N, phi0, o.start_radius);
  ProfileSystem sys{nl, N};
  auto stepper = odeint::make_controlled(o.tol, o.tol, Stepper());
  State x{series.value(r0), series.slope(r0)};
  double r = r0;
  double h = r0;
  if (!visit(0.0, phi0, 0.0)) return {MarchEnd::Stopped, 0.0};
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double target = grid[k];
    if (target <= r0) {
      if (!visit(target, series.value(target), series.slope(target))) return {MarchEnd::Stopped, target};
      continue;
    }
    if (advance(stepper, sys, x, r, target, h) == StepStatus::Underflow) return {MarchEnd::Underflow, r};
    if (!std::isfinite(x[0]) || std::fabs(x[0]) > overflow_bound(nl, r, o.exp_guard)) {
      return {MarchEnd::Overflow, r};
    }
    if (!visit(target, x[0], x[1])) return {MarchEnd::Stopped, target};
  }
  return {MarchEnd::Completed, grid.back()};
}

}  // namespace detail

/// Least-squares fit of v(r) over the outer window [r_end/2, r_end].
/// Returns the constant when the fitted log-drift is below threshold.
struct TailFit {
  double constant = 0.0;
  double correction = 0.0;
  double drift = 0.0;
  bool converged = false;
};

inline TailFit fit_tail(const RadialProfile& prof, double drift_tol = 1e-3) {
  TailFit out;
  const double r_end = prof.r_end();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    if (prof.r[i] >= 0.5 * r_end && prof.r[i] > 0.0) idx.push_back(i);
  }
  if (idx.size() < 4) return out;
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd A3(n, 3), A2(n, 2);
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r = prof.r[idx[k]];
    const double phi = prof.phi[idx[k]];
    if (!std::isfinite(phi)) return out;
    v(k) = tail_variable(prof.nl, r, phi);
    A3(k, 0) = 1.0;
    A3(k, 1) = std::log(r / r_end);
    A3(k, 2) = 1.0 / (r * r);
    A2(k, 0) = 1.0;
    A2(k, 1) = 1.0 / (r * r);
  }
  const Eigen::VectorXd c3 = A3.colPivHouseholderQr().solve(v);
  const Eigen::VectorXd c2 = A2.colPivHouseholderQr().solve(v);
  out.drift = c3(1);
  out.constant = c2(0);
  out.correction = c2(1);
  out.converged = std::isfinite(out.drift) && std::fabs(out.drift) < drift_tol;
  return out;
}

/// Tail constant C_α from the outer window, or nothing when the tail does not settle.
inline std::optional<double> tail_constant(const RadialProfile& prof, double drift_tol = 1e-3) {
  if (prof.r_end() < 10.0) throw InvalidParameter("tail_constant needs a profile integrated to r_max >= 10");
  if (prof.classification == Classification::Divergent) return std::nullopt;
  const TailFit fit = fit_tail(prof, drift_tol);
  if (!fit.converged) return std::nullopt;
  return fit.constant;
}

inline RadialProfile trivial_profile(double alpha, const Nonlinearity& nl, int N, const ShootOptions& o) {
  RadialProfile prof;
  prof.alpha = alpha;
  prof.nl = nl;
  prof.N = N;
  prof.tol = o.tol;
  prof.r = numerics::uniform_grid(o.r_max, static_cast<std::size_t>(std::ceil(o.r_max / o.far_spacing)));
  prof.phi.assign(prof.r.size(), profile_origin_value(alpha, nl));
  prof.dphi.assign(prof.r.size(), 0.0);
  prof.classification = Classification::Trivial;
  prof.diagnostic = "constant solution";
  return prof;
}

/// Integrates the profile equation outward from the origin.
inline RadialProfile shoot_profile(double alpha, const Nonlinearity& nl, int N, const ShootOptions& o = {}) {
  if (!(o.r_max > 1.0)) throw InvalidParameter("r_max must be > 1");
  if (!(o.tol > 0.0)) throw InvalidParameter("tol must be > 0");
  if (N < 1) throw InvalidParameter("dimension N must be >= 1");
  if (!std::isfinite(alpha)) throw InvalidParameter("alpha must be finite");
  if (alpha == 0.0) return trivial_profile(alpha, nl, N, o);

  const double phi0 = profile_origin_value(alpha, nl);
  RadialProfile prof;
  prof.alpha = alpha;
  prof.nl = nl;
  prof.N = N;
  prof.tol = o.tol;

  const auto grid = detail::output_grid(nl, N, phi0, o);
  const auto res = detail::march(phi0, nl, N, o, grid, [&](double r, double phi, double dphi) {
    prof.r.push_back(r);
    prof.phi.push_back(phi);
    prof.dphi.push_back(dphi);
    return true;
  });
  if (res.end == detail::MarchEnd::Underflow) {
    prof.classification = Classification::Undetermined;
    prof.diagnostic = "step-size underflow at r = " + std::to_string(res.r);
    return prof;
  }
  if (res.end == detail::MarchEnd::Overflow) {
    prof.classification = Classification::Divergent;
    prof.diagnostic = "overflow guard hit at r = " + std::to_string(res.r);
    return prof;
  }
  if (prof.r_end() < 10.0) {
    prof.classification = Classification::Undetermined;
    prof.diagnostic = "integration range too short to classify the tail";
    return prof;
  }
  const TailFit fit = fit_tail(prof, o.tail_drift_tol);
  if (fit.converged) {
    prof.classification = Classification::TailConvergent;
    prof.tail_constant = fit.constant;
    prof.tail = TailModel{fit.constant, fit.correction};
  } else {
    prof.classification = Classification::Divergent;
    prof.diagnostic = "tail drift " + std::to_string(fit.drift) + " above threshold";
  }
  return prof;
}

/// Closed-form singular steady state: -2 log r + log(2(N-2)), or L r^{-2/(p-1)}.
struct SingularProfile {
  Nonlinearity nl;
  int N;
  double constant;

  double value(double r) const {
    if (nl.is_exponential()) return -2.0 * std::log(r) + constant;
    return constant * std::pow(r, -nl.tail_exponent());
  }
  double derivative(double r) const {
    if (nl.is_exponential()) return -2.0 / r;
    const double m = nl.tail_exponent();
    return -m * constant * std::pow(r, -m - 1.0);
  }
  double second_derivative(double r) const {
    if (nl.is_exponential()) return 2.0 / (r * r);
    const double m = nl.tail_exponent();
    return m * (m + 1.0) * constant * std::pow(r, -m - 2.0);
  }
  double residual(double r) const {
    return ode_residual(nl, N, r, value(r), derivative(r), second_derivative(r));
  }
};

inline SingularProfile singular_closed_form(const Nonlinearity& nl, int N) {
  if (nl.is_exponential()) {
    if (N <= 2) throw InvalidParameter("singular exponential profile needs N >= 3 (2(N-2) > 0)");
    return {nl, N, std::log(2.0 * (N - 2.0))};
  }
  if (N < 3) throw InvalidParameter("singular power profile needs N >= 3");
  return {nl, N, singular_power_amplitude(nl.p(), N)};
}

/// Samples the singular profile on a log-spaced grid of [r_min, r_max].
inline RadialProfile singular_profile(const Nonlinearity& nl, int N, double r_min = 1e-3, double r_max = 40.0,
                                      std::size_t samples = 2001) {
  const SingularProfile s = singular_closed_form(nl, N);
  RadialProfile prof;
  prof.alpha = std::numeric_limits<double>::infinity();
  prof.nl = nl;
  prof.N = N;
  prof.tol = 0.0;
  const double a = std::log(r_min), b = std::log(r_max);
  for (std::size_t i = 0; i < samples; ++i) {
    const double r = i + 1 == samples ? r_max : std::exp(a + (b - a) * static_cast<double>(i) / (samples - 1.0));
    prof.r.push_back(r);
    prof.phi.push_back(s.value(r));
    prof.dphi.push_back(s.derivative(r));
  }
  prof.classification = Classification::TailConvergent;
  prof.tail_constant = s.constant;
  prof.tail = TailModel{s.constant, 0.0};
  prof.diagnostic = "closed-form singular steady state";
  return prof;
}

/// First sample radius (beyond r_start) where |r v'| reaches `cap`: the shot has left
/// the tail family and is running into the overflow guard. r_end when that never happens.
inline double divergence_onset(const RadialProfile& prof, double r_start = 4.0, double cap = 1.0) {
  if (prof.classification == Classification::TailConvergent || prof.classification == Classification::Trivial) {
    return prof.r_end();
  }
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    if (prof.r[i] < r_start) continue;
    if (std::fabs(tail_drift(prof.nl, prof.r[i], prof.phi[i], prof.dphi[i])) >= cap) return prof.r[i];
  }
  return prof.r_end();
}

/// Scaled residuals at interior samples: φ'' from a 5-point stencil on the φ' samples,
/// normalised by 1 + |each term|. Only samples in [r_lo, divergence onset) are checked.
inline std::vector<std::pair<double, double>> fd_residuals(const RadialProfile& prof, double r_lo = 0.0) {
  std::vector<std::pair<double, double>> out;
  const std::size_t n = prof.r.size();
  if (n < 5) return out;
  const double r_hi = divergence_onset(prof);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double r = prof.r[i];
    if (r >= r_hi) break;
    if (r <= 0.0 || r < r_lo) continue;
    const std::array<double, 5> xs{prof.r[i - 2], prof.r[i - 1], prof.r[i], prof.r[i + 1], prof.r[i + 2]};
    const auto w = numerics::fd_weights(r, xs, 1);
    double d2 = 0.0;
    for (int k = 0; k < 5; ++k) d2 += w[k] * prof.dphi[i - 2 + k];
    const double a = ((prof.N - 1.0) / r) * prof.dphi[i];
    const double b = 0.5 * r * prof.dphi[i];
    const double g = prof.nl.profile_reaction(prof.phi[i]);
    const double res = d2 + a - b + g;
    out.emplace_back(r, res / (1.0 + std::fabs(d2) + std::fabs(a) + std::fabs(b) + std::fabs(g)));
  }
  return out;
}

inline double max_fd_residual(const RadialProfile& prof, double r_lo = 0.0) {
  double m = 0.0;
  for (const auto& [r, res] : fd_residuals(prof, r_lo)) m = std::max(m, std::fabs(res));
  return m;
}

// ---------------------------------------------------------------------------
// α-scan

struct ScanOptions {
  ShootOptions shoot{};
  double defect_start = 4.0;  // drift is monitored only for r >= defect_start
  double drift_cap = 1.0;     // |r v'| at which the shot is declared to have left the tail
  double separation_tol = 1e-6;
  double match_fraction = 0.75;  // junction radius as a fraction of the reliable range
  double blend_width = 1.0;      // forward and inward solutions are blended over this width
  double min_match_radius = 5.0;
  double max_match_slope_gap = 1e-4;
  int max_bisections = 200;
};

/// Signed outward drift r v'(r) at min(r_max, onset radius); NaN when the shot overflows
/// before the monitoring window or when α gives the constant solution.
inline double defect(double alpha, const Nonlinearity& nl, int N, const ScanOptions& o) {
  if (alpha == 0.0) return std::nan("");
  const double phi0 = profile_origin_value(alpha, nl);
  const auto grid = detail::output_grid(nl, N, phi0, o.shoot);
  double drift = std::nan("");
  const auto res = detail::march(phi0, nl, N, o.shoot, grid, [&](double r, double phi, double dphi) {
    if (r < o.defect_start) return true;
    drift = tail_drift(nl, r, phi, dphi);
    return std::fabs(drift) < o.drift_cap;
  });
  if (res.end == detail::MarchEnd::Underflow) return std::nan("");
  return drift;
}

struct ScanCandidate {
  double alpha = 0.0;
  double tail_constant = 0.0;
  double scan_lo = 0.0;  // grid bracket the candidate was refined from
  double scan_hi = 0.0;
  double bracket_lo = 0.0;  // final bisection bracket
  double bracket_hi = 0.0;
  double match_radius = 0.0;
  double slope_gap = 0.0;
  RadialProfile profile;
};

struct ScanResult {
  std::vector<ScanCandidate> candidates;
  std::vector<double> alphas;
  std::vector<double> defects;
  std::vector<std::string> rejected;
  std::string diagnostic;
};

namespace detail {

/// Samples of a shot restricted to the output grid; stops at the overflow guard.
struct Trajectory {
  std::vector<double> r, phi, dphi;
};

inline Trajectory forward_trajectory(double alpha, const Nonlinearity& nl, int N, const ShootOptions& o,
                                     const std::vector<double>& grid) {
  Trajectory tr;
  march(profile_origin_value(alpha, nl), nl, N, o, grid, [&](double r, double phi, double dphi) {
    tr.r.push_back(r);
    tr.phi.push_back(phi);
    tr.dphi.push_back(dphi);
    return true;
  });
  return tr;
}

/// Inward integration from r_max along the tail family with constant C, down to grid[stop].
inline Trajectory inward_trajectory(double C, const Nonlinearity& nl, int N, const ShootOptions& o,
                                    const std::vector<double>& grid, std::size_t stop) {
  Trajectory tr;
  const double R = grid.back();
  const double b = asymptotic_correction(nl, N, C);
  State x;
  if (nl.is_exponential()) {
    x = {-2.0 * std::log(R) + C + b / (R * R), -2.0 / R - 2.0 * b / (R * R * R)};
  } else {
    const double m = nl.tail_exponent();
    x = {C * std::pow(R, -m) + b * std::pow(R, -m - 2.0),
         -m * C * std::pow(R, -m - 1.0) - (m + 2.0) * b * std::pow(R, -m - 3.0)};
  }
  ProfileSystem sys{nl, N};
  auto stepper = odeint::make_controlled(o.tol, o.tol, Stepper());
  double r = R;
  double h = -0.01;
  tr.r.push_back(R);
  tr.phi.push_back(x[0]);
  tr.dphi.push_back(x[1]);
  for (std::size_t k = grid.size() - 1; k-- > stop;) {
    if (advance(stepper, sys, x, r, grid[k], h) == StepStatus::Underflow) break;
    tr.r.push_back(grid[k]);
    tr.phi.push_back(x[0]);
    tr.dphi.push_back(x[1]);
  }
  return tr;
}

}  // namespace detail

/// Bisects the defect sign change in [lo, hi] to machine precision and continues the
/// converged shot along the stable inward tail family.
inline std::optional<ScanCandidate> refine_candidate(double lo, double hi, const Nonlinearity& nl, int N,
                                                     const ScanOptions& o, std::string* why = nullptr) {
  const double scan_lo = lo, scan_hi = hi;
  auto reject = [&](const std::string& msg) -> std::optional<ScanCandidate> {
    if (why) *why = msg;
    return std::nullopt;
  };
  double d_lo = defect(lo, nl, N, o);
  double d_hi = defect(hi, nl, N, o);
  if (!std::isfinite(d_lo) || !std::isfinite(d_hi) || (d_lo > 0) == (d_hi > 0)) {
    return reject("bracket has no defect sign change");
  }
  for (int it = 0; it < o.max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double d = defect(mid, nl, N, o);
    if (!std::isfinite(d)) return reject("defect undefined inside bracket");
    if ((d > 0) == (d_lo > 0)) {
      lo = mid;
      d_lo = d;
    } else {
      hi = mid;
      d_hi = d;
    }
  }
  const double alpha = 0.5 * (lo + hi);
  const double phi0 = profile_origin_value(alpha, nl);
  const auto grid = detail::output_grid(nl, N, phi0, o.shoot);
  const auto t_lo = detail::forward_trajectory(lo, nl, N, o.shoot, grid);
  const auto t_hi = detail::forward_trajectory(hi, nl, N, o.shoot, grid);
  const auto t_mid = detail::forward_trajectory(alpha, nl, N, o.shoot, grid);
  ShootOptions tight = o.shoot;
  tight.tol = o.shoot.tol / 16.0;
  const auto t_ref = detail::forward_trajectory(alpha, nl, N, tight, grid);

  // Reliable range: the bracket ends still agree (the root is resolved) and a tighter
  // re-shot still agrees (amplified truncation error is below separation_tol).
  std::size_t sep = std::min({t_lo.r.size(), t_hi.r.size(), t_mid.r.size(), t_ref.r.size()});
  for (std::size_t k = 0; k < sep; ++k) {
    const double scale = o.separation_tol * (1.0 + std::fabs(t_mid.phi[k]));
    if (std::fabs(t_lo.phi[k] - t_hi.phi[k]) > scale || std::fabs(t_mid.phi[k] - t_ref.phi[k]) > scale) {
      sep = k;
      break;
    }
  }
  if (sep == 0) return reject("bracket shots separate immediately");
  const double r_sep = grid[sep - 1];
  const double r_match_target = o.match_fraction * r_sep;
  if (r_match_target < o.min_match_radius) {
    return reject("shot leaves the tail family at r = " + std::to_string(r_sep));
  }
  std::size_t match = 0;
  while (match + 1 < sep && grid[match + 1] <= r_match_target) ++match;
  const double phi_match = t_mid.phi[match];
  const double dphi_match = t_mid.dphi[match];

  // secant on C so that the inward tail solution meets the forward shot at grid[match]
  auto mismatch = [&](double C) {
    const auto in = detail::inward_trajectory(C, nl, N, o.shoot, grid, match);
    if (in.r.back() != grid[match]) return std::nan("");
    return in.phi.back() - phi_match;
  };
  double c0 = tail_variable(nl, grid[match], phi_match);
  double c1 = c0 + 1e-2 * (1.0 + std::fabs(c0));
  double f0 = mismatch(c0), f1 = mismatch(c1);
  for (int it = 0; it < 60 && std::isfinite(f1) && std::fabs(f1) > 1e-14 * (1.0 + std::fabs(phi_match)); ++it) {
    if (f1 == f0) break;
    const double c2 = c1 - f1 * (c1 - c0) / (f1 - f0);
    c0 = c1;
    f0 = f1;
    c1 = c2;
    f1 = mismatch(c1);
  }
  if (!std::isfinite(f1)) return reject("tail matching failed");
  std::size_t blend = match;
  while (blend > 0 && grid[blend] > grid[match] - o.blend_width) --blend;
  const auto in = detail::inward_trajectory(c1, nl, N, o.shoot, grid, blend);
  if (in.r.back() != grid[blend]) return reject("inward tail integration failed");
  const std::size_t last = grid.size() - 1;
  const double slope_gap = std::fabs(in.dphi[last - match] - dphi_match);
  if (slope_gap > o.max_match_slope_gap * (1.0 + std::fabs(dphi_match))) {
    return reject("slope mismatch " + std::to_string(slope_gap) + " at tail junction");
  }

  // splice with a quintic smoothstep over [grid[blend], grid[match]] so the
  // tolerance-level gap between the two solutions does not become a jump
  RadialProfile prof;
  prof.alpha = alpha;
  prof.nl = nl;
  prof.N = N;
  prof.tol = o.shoot.tol;
  const double a = grid[blend], w = grid[match] - grid[blend];
  for (std::size_t k = 0; k <= last; ++k) {
    prof.r.push_back(grid[k]);
    if (k <= blend) {
      prof.phi.push_back(t_mid.phi[k]);
      prof.dphi.push_back(t_mid.dphi[k]);
    } else if (k >= match) {
      prof.phi.push_back(in.phi[last - k]);
      prof.dphi.push_back(in.dphi[last - k]);
    } else {
      const double t = (grid[k] - a) / w;
      const double chi = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
      const double dchi = 30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
      const double pf = t_mid.phi[k], pi = in.phi[last - k];
      prof.phi.push_back((1.0 - chi) * pf + chi * pi);
      prof.dphi.push_back((1.0 - chi) * t_mid.dphi[k] + chi * in.dphi[last - k] + dchi * (pi - pf));
    }
  }
  const TailFit fit = fit_tail(prof, o.shoot.tail_drift_tol);
  if (!fit.converged) return reject("continued tail does not settle");
  prof.classification = Classification::TailConvergent;
  prof.tail_constant = fit.constant;
  prof.tail = TailModel{fit.constant, fit.correction};
  prof.diagnostic = "forward shot matched to inward tail at r = " + std::to_string(grid[match]);

  ScanCandidate c;
  c.alpha = alpha;
  c.tail_constant = fit.constant;
  c.scan_lo = scan_lo;
  c.scan_hi = scan_hi;
  c.bracket_lo = lo;
  c.bracket_hi = hi;
  c.match_radius = grid[match];
  c.slope_gap = slope_gap;
  c.profile = std::move(prof);
  return c;
}

/// Grid scan of the defect over [alpha_lo, alpha_hi]; each sign change is refined.
/// Candidates only: closely spaced roots can be missed by the grid.
inline ScanResult scan_alphas(const Nonlinearity& nl, int N, double alpha_lo, double alpha_hi, int grid,
                              const ScanOptions& o = {}) {
  if (!(alpha_lo >= 0.0) || !(alpha_hi > alpha_lo)) throw InvalidParameter("alpha range must lie in (0, inf)");
  if (grid < 2) throw InvalidParameter("grid must be >= 2");
  ScanResult res;
  for (int j = 0; j < grid; ++j) {
    const double a = alpha_lo + (alpha_hi - alpha_lo) * j / (grid - 1.0);
    if (a == 0.0) continue;
    res.alphas.push_back(a);
    res.defects.push_back(defect(a, nl, N, o));
  }
  bool any_defined = false;
  for (std::size_t j = 0; j < res.defects.size(); ++j) {
    if (std::isfinite(res.defects[j])) any_defined = true;
    if (j == 0) continue;
    const double d0 = res.defects[j - 1], d1 = res.defects[j];
    if (!std::isfinite(d0) || !std::isfinite(d1) || (d0 > 0) == (d1 > 0)) continue;
    std::string why;
    if (auto c = refine_candidate(res.alphas[j - 1], res.alphas[j], nl, N, o, &why)) {
      res.candidates.push_back(std::move(*c));
    } else {
      res.rejected.push_back("[" + std::to_string(res.alphas[j - 1]) + ", " + std::to_string(res.alphas[j]) +
                             "]: " + why);
    }
  }
  if (!any_defined) res.diagnostic = "every grid shot diverged before the monitoring window";
  else if (res.candidates.empty()) res.diagnostic = "no converged sign change of the tail defect";
  return res;
}

}  // namespace blowup::profile

#endif  // BLOWUP_PROFILE_HPP
