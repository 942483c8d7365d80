#ifndef BLOWUP_EVOLVE_HPP
#define BLOWUP_EVOLVE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "blowup/core.hpp"
#include "blowup/numerics.hpp"
#include "blowup/profile.hpp"

namespace blowup::evolve {

/// Radial solution snapshot of u_t = Δu + f(u) on the ball of radius grid.back().
struct EvolutionState {
  std::vector<double> grid;
  std::vector<double> u;
  double t = 0.0;
  double dt = 0.0;
  long step_count = 0;
  int N = 3;

  double R() const { return grid.back(); }
  double h() const { return grid[1] - grid[0]; }
  double sup_norm() const {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::fabs(v));
    return m;
  }
  double max_value() const { return *std::max_element(u.begin(), u.end()); }
  double min_value() const { return *std::min_element(u.begin(), u.end()); }

  /// Linear interpolation of u at radius r ≤ R.
  double value(double r) const {
    if (r < 0.0 || r > R()) throw DomainError("radius outside the computational ball");
    const double x = r / h();
    const auto i = std::min(static_cast<std::size_t>(x), grid.size() - 2);
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * u[i] + f * u[i + 1];
  }
};

inline std::vector<double> uniform_ball_grid(double R, int M) {
  if (!(R > 0.0) || M < 4) throw InvalidParameter("grid needs R > 0 and M >= 4");
  return numerics::uniform_grid(R, static_cast<std::size_t>(M));
}

template <class F>
EvolutionState initial_state(F&& u0, int N, double R, int M = 2048) {
  if (N < 1) throw InvalidParameter("dimension N must be >= 1");
  EvolutionState s;
  s.grid = uniform_ball_grid(R, M);
  s.u.resize(s.grid.size());
  for (std::size_t i = 0; i < s.grid.size(); ++i) s.u[i] = u0(s.grid[i]);
  s.N = N;
  return s;
}

enum class StopReason { SupNormCap, StepUnderflow, TimeCap, StepCap };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::SupNormCap: return "SupNormCap";
    case StopReason::StepUnderflow: return "StepUnderflow";
    case StopReason::TimeCap: return "TimeCap";
    case StopReason::StepCap: return "StepCap";
  }
  return "?";
}

struct StepOptions {
  double c_safety = 0.1;
  double dt_max = 1e-3;
  double dt_min = 1e-14;
  double dt_fixed = 0.0;  // > 0 overrides the reaction-limited step
  bool reaction = true;   // false disables f for testing the diffusion part
  /// Dirichlet value u(R, t); empty means u(R) = 0.
  std::function<double(double)> boundary;
};

/// Reaction-limited step dt = min(dt_max, c_safety / f'(max u)).
inline double reaction_step(const EvolutionState& s, const Nonlinearity& nl, const StepOptions& o) {
  if (o.dt_fixed > 0.0) return o.dt_fixed;
  if (!o.reaction) return o.dt_max;
  const double fp = nl.f_prime(std::max(0.0, s.max_value()));
  return fp > 0.0 ? std::min(o.dt_max, o.c_safety / fp) : o.dt_max;
}

namespace detail {

/// Backward-Euler diffusion matrix I - dt Δ_h on the uniform radial grid with the regularized origin row.
inline void diffusion_system(const EvolutionState& s, double dt, std::vector<double>& sub, std::vector<double>& diag,
                             std::vector<double>& sup) {
  const std::size_t n = s.grid.size();
  const double h = s.h(), ih2 = 1.0 / (h * h);
  sub.assign(n, 0.0);
  diag.assign(n, 1.0);
  sup.assign(n, 0.0);
  diag[0] = 1.0 + dt * 2.0 * s.N * ih2;
  sup[0] = -dt * 2.0 * s.N * ih2;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double k = (s.N - 1.0) / (2.0 * h * s.grid[i]);
    sub[i] = -dt * (ih2 - k);
    diag[i] = 1.0 + 2.0 * dt * ih2;
    sup[i] = -dt * (ih2 + k);
  }
}

}  // namespace detail

/// One IMEX step: explicit reaction, implicit diffusion, Dirichlet data at R.
inline EvolutionState step(const EvolutionState& s, const Nonlinearity& nl, const StepOptions& o = {}) {
  for (double v : s.u) {
    if (!std::isfinite(v)) throw NumericalError("non-finite state");
  }
  const double dt = reaction_step(s, nl, o);
  if (dt < o.dt_min) throw NumericalError("step size underflow");
  std::vector<double> sub, diag, sup;
  detail::diffusion_system(s, dt, sub, diag, sup);
  std::vector<double> rhs(s.u);
  if (o.reaction) {
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += dt * nl.f(s.u[i]);
  }
  rhs.back() = o.boundary ? o.boundary(s.t + dt) : 0.0;
  numerics::solve_tridiagonal(sub, diag, sup, rhs);
  EvolutionState next = s;
  next.u = std::move(rhs);
  next.t = s.t + dt;
  next.dt = dt;
  next.step_count = s.step_count + 1;
  return next;
}

/// √2 e^{max u / 2} - max |u_r|; one-sided differences at the boundary, centred inside.
inline double gradient_bound_check(const EvolutionState& s, const Nonlinearity& nl) {
  if (!nl.is_exponential()) throw InvalidParameter("gradient bound is stated for the exponential nonlinearity");
  const double h = s.h();
  double g = 0.0;
  const std::size_t n = s.u.size();
  for (std::size_t i = 1; i + 1 < n; ++i) g = std::max(g, std::fabs(s.u[i + 1] - s.u[i - 1]) / (2.0 * h));
  g = std::max(g, std::fabs(3.0 * s.u[n - 1] - 4.0 * s.u[n - 2] + s.u[n - 3]) / (2.0 * h));
  return std::sqrt(2.0) * std::exp(0.5 * s.max_value()) - g;
}

struct RunTrace {
  std::vector<double> times;
  std::vector<double> sup_norms;
  std::vector<double> dts;
  std::vector<double> grad_bound_margins;  // NaN for power nonlinearities
  StopReason stop_reason = StopReason::TimeCap;
  bool min_principle_ok = true;
  std::string diagnostic;
};

struct RunOptions {
  StepOptions step;
  double u_stop = 0.0;   // 0 selects 25 (exponential) or 1e6 (power)
  double t_max = 10.0;
  long max_steps = 20'000'000;
  double min_principle_tol = 1e-10;
  /// Snapshots are stored each time the sup norm first exceeds one of these levels.
  std::vector<double> snapshot_levels;
};

struct RunResult {
  RunTrace trace;
  EvolutionState final_state;
  std::vector<EvolutionState> snapshots;
  bool blew_up() const { return trace.stop_reason == StopReason::SupNormCap; }
};

inline double default_u_stop(const Nonlinearity& nl) { return nl.is_exponential() ? 25.0 : 1e6; }

/// Steps until the sup norm reaches u_stop, the step underflows, or a time / step cap is hit.
inline RunResult run_until_blowup(EvolutionState s, const Nonlinearity& nl, const RunOptions& o = {}) {
  if (s.grid.size() < 4 || s.grid.size() != s.u.size()) throw InvalidParameter("invalid initial state");
  if (s.u.back() != 0.0 && !o.step.boundary) throw InvalidParameter("initial data must vanish at R");
  for (double v : s.u) {
    if (!std::isfinite(v)) throw InvalidParameter("initial data must be finite");
  }
  const double u_stop = o.u_stop > 0.0 ? o.u_stop : default_u_stop(nl);
  const double floor = std::min(0.0, s.min_value()) - o.min_principle_tol;
  RunResult res;
  auto& tr = res.trace;
  std::vector<double> levels = o.snapshot_levels;
  std::sort(levels.begin(), levels.end());
  std::size_t next_level = 0;
  auto record = [&](const EvolutionState& st) {
    tr.times.push_back(st.t);
    tr.sup_norms.push_back(st.sup_norm());
    tr.dts.push_back(st.dt);
    tr.grad_bound_margins.push_back(nl.is_exponential() ? gradient_bound_check(st, nl) : std::nan(""));
    if (o.step.reaction && st.min_value() < floor) tr.min_principle_ok = false;
    while (next_level < levels.size() && st.sup_norm() >= levels[next_level]) {
      res.snapshots.push_back(st);
      ++next_level;
    }
  };
  record(s);
  while (true) {
    if (s.sup_norm() >= u_stop) {
      tr.stop_reason = StopReason::SupNormCap;
      break;
    }
    if (s.t >= o.t_max) {
      tr.stop_reason = StopReason::TimeCap;
      tr.diagnostic = "no blow-up detected";
      break;
    }
    if (s.step_count >= o.max_steps) {
      tr.stop_reason = StopReason::StepCap;
      tr.diagnostic = "step cap reached";
      break;
    }
    if (reaction_step(s, nl, o.step) < o.step.dt_min) {
      tr.stop_reason = StopReason::StepUnderflow;
      tr.diagnostic = "step size underflow";
      break;
    }
    s = step(s, nl, o.step);
    record(s);
  }
  res.final_state = std::move(s);
  return res;
}

struct BlowupFit {
  double T = std::nan("");
  double slope = std::nan("");
  double C1 = std::nan("");
  double C2 = std::nan("");
  double r_squared = std::nan("");
  int samples = 0;
  bool reliable = false;
  std::string diagnostic;
};

/// Type-I fit over the final decade: e^{-‖u‖} (exponential) or ‖u‖^{-(p-1)} (power) is regressed
/// linearly on t; T is the t-intercept and (C1, C2) bound log(T-t) + ‖u‖ (exponential) or
/// (T-t)^{1/(p-1)} ‖u‖ (power) on the fitted samples.
inline BlowupFit fit_blowup(const std::vector<double>& times, const std::vector<double>& sup_norms,
                            const Nonlinearity& nl) {
  if (times.size() != sup_norms.size() || times.empty()) throw InvalidParameter("trace arrays mismatch");
  auto transform = [&](double m) { return nl.is_exponential() ? std::exp(-m) : std::pow(m, -(nl.p() - 1.0)); };
  BlowupFit fit;
  const double last = transform(sup_norms.back());
  std::size_t first = times.size();
  while (first > 0 && transform(sup_norms[first - 1]) <= 10.0 * last) --first;
  if (first == 0) {
    fit.diagnostic = "rate fit unreliable: growth spans less than a decade";
    return fit;
  }
  std::vector<double> x(times.begin() + first, times.end()), y;
  for (std::size_t i = first; i < times.size(); ++i) y.push_back(transform(sup_norms[i]));
  fit.samples = static_cast<int>(x.size());
  if (fit.samples < 20) {
    fit.diagnostic = "rate fit unreliable: fewer than 20 samples in the final decade";
    return fit;
  }
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (!(y[i] < y[i - 1])) {
      fit.diagnostic = "rate fit unreliable: non-monotone tail";
      return fit;
    }
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  fit.T = -intercept / fit.slope;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = first; i < times.size(); ++i) {
    const double gap = fit.T - times[i];
    if (!(gap > 0.0)) continue;
    const double b = nl.is_exponential() ? std::log(gap) + sup_norms[i]
                                         : std::pow(gap, 1.0 / (nl.p() - 1.0)) * sup_norms[i];
    lo = std::min(lo, b), hi = std::max(hi, b);
  }
  if (nl.is_exponential()) {
    fit.C1 = -lo, fit.C2 = hi;
  } else {
    fit.C1 = lo, fit.C2 = hi;
  }
  fit.reliable = fit.slope < 0.0 && fit.r_squared >= 0.9;
  if (!fit.reliable) fit.diagnostic = "rate fit unreliable: r^2 below 0.9 or non-negative slope";
  return fit;
}

inline BlowupFit fit_blowup(const RunTrace& trace, const Nonlinearity& nl) {
  return fit_blowup(trace.times, trace.sup_norms, nl);
}

/// u(r, t) = -log(T-t) + φ(r/√(T-t)) (exponential) or (T-t)^{-1/(p-1)} φ(r/√(T-t)) (power).
inline double selfsimilar_value(const profile::RadialProfile& prof, double T, double t, double r) {
  const double tau = T - t;
  const double y = r / std::sqrt(tau);
  if (!prof.covers(y)) throw DomainError("grid maps beyond the profile samples and tail model");
  const double phi = prof.value(y);
  return prof.nl.is_exponential() ? -std::log(tau) + phi : std::pow(tau, -1.0 / (prof.nl.p() - 1.0)) * phi;
}

inline EvolutionState exact_selfsimilar(const profile::RadialProfile& prof, double T, double t,
                                        const std::vector<double>& grid) {
  using profile::Classification;
  if (prof.classification != Classification::TailConvergent && prof.classification != Classification::Trivial) {
    throw InvalidParameter("exact self-similar solution needs a tail-convergent or trivial profile");
  }
  if (!(t < T)) throw DomainError("exact self-similar solution needs t < T");
  EvolutionState s;
  s.grid = grid;
  s.u.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) s.u[i] = selfsimilar_value(prof, T, t, grid[i]);
  s.t = t;
  s.N = prof.N;
  return s;
}

/// Max over interior nodes with r/√(T-t) ≤ y_max of the PDE residual u_t - Δu - f(u) of the exact
/// self-similar field, scaled by (T-t) (exponential) or (T-t)^{p/(p-1)} (power) so that it is the
/// profile-ODE residual. u_t is analytic, Δu uses five-point finite differences on the given grid.
inline double selfsimilar_pde_residual(const profile::RadialProfile& prof, double T, double t,
                                       const std::vector<double>& grid, double y_max = 10.0) {
  const double tau = T - t;
  const auto s = exact_selfsimilar(prof, T, t, grid);
  const bool expo = prof.nl.is_exponential();
  const double q = expo ? 0.0 : 1.0 / (prof.nl.p() - 1.0);
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < grid.size(); ++i) {
    const double r = grid[i];
    const double y = r / std::sqrt(tau);
    if (y > y_max) break;
    const std::array<double, 5> xs{grid[i - 2], grid[i - 1], grid[i], grid[i + 1], grid[i + 2]};
    const auto w1 = numerics::fd_weights(r, xs, 1);
    const auto w2 = numerics::fd_weights(r, xs, 2);
    double u1 = 0.0, u2 = 0.0;
    for (int k = 0; k < 5; ++k) u1 += w1[k] * s.u[i - 2 + k], u2 += w2[k] * s.u[i - 2 + k];
    const double phi = prof.value(y), dphi = prof.derivative(y);
    const double ut = expo ? 1.0 / tau + 0.5 * y * dphi / tau
                           : std::pow(tau, -q - 1.0) * (q * phi + 0.5 * y * dphi);
    const double lap = u2 + (prof.N - 1.0) / r * u1;
    const double res = ut - lap - prof.nl.f(s.u[i]);
    const double scale = expo ? tau : std::pow(tau, q + 1.0);
    worst = std::max(worst, std::fabs(res * scale));
  }
  return worst;
}

struct WFrameOptions {
  int M = 2048;
  double ds_max = 1e-3;
  double c_safety = 0.1;
  double w_cap = 50.0;
  std::vector<double> snapshot_times;  // empty keeps only the final state
};

struct WSnapshot {
  double s = 0.0;
  std::vector<double> w;
};

struct WFrameResult {
  std::vector<double> grid;
  std::vector<WSnapshot> snapshots;
  bool bounded = true;
  std::string diagnostic;
};

/// w_s = Δw - (y/2) w' + G(w) on |y| ≤ Y with frozen Dirichlet value `boundary` at Y, where G is the
/// profile reaction (e^w - 1, or -w/(p-1) + |w|^{p-1} w). Implicit diffusion-drift, explicit reaction.
template <class W0>
WFrameResult w_frame_evolve(W0&& w0, const Nonlinearity& nl, int N, double Y, double s_span, double boundary,
                            const WFrameOptions& o = {}) {
  if (!(Y > 0.0) || !(s_span > 0.0) || o.M < 8) throw InvalidParameter("invalid w-frame parameters");
  WFrameResult res;
  res.grid = numerics::uniform_grid(Y, static_cast<std::size_t>(o.M));
  const auto& y = res.grid;
  const std::size_t n = y.size();
  const double h = Y / o.M, ih2 = 1.0 / (h * h);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = w0(y[i]);
  w.back() = boundary;
  std::vector<double> times = o.snapshot_times;
  std::sort(times.begin(), times.end());
  times.push_back(s_span);
  double s = 0.0;
  std::size_t next = 0;
  if (!times.empty() && times.front() == 0.0) {
    res.snapshots.push_back({0.0, w});
    ++next;
  }
  std::vector<double> sub(n), dg(n), sup(n), rhs(n);
  while (next < times.size()) {
    double gmax = 0.0;
    for (double v : w) gmax = std::max(gmax, std::fabs(nl.profile_reaction_prime(v)));
    double ds = gmax > 0.0 ? std::min(o.ds_max, o.c_safety / gmax) : o.ds_max;
    ds = std::min(ds, times[next] - s);
    dg[0] = 1.0 + ds * 2.0 * N * ih2;
    sup[0] = -ds * 2.0 * N * ih2;
    sub[0] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double k = ((N - 1.0) / y[i] - 0.5 * y[i]) / (2.0 * h);
      sub[i] = -ds * (ih2 - k);
      dg[i] = 1.0 + 2.0 * ds * ih2;
      sup[i] = -ds * (ih2 + k);
    }
    sub[n - 1] = 0.0, dg[n - 1] = 1.0, sup[n - 1] = 0.0;
    for (std::size_t i = 0; i < n; ++i) rhs[i] = w[i] + ds * nl.profile_reaction(w[i]);
    rhs[n - 1] = boundary;
    numerics::solve_tridiagonal(sub, dg, sup, rhs);
    w.swap(rhs);
    s += ds;
    for (double v : w) {
      if (!std::isfinite(v) || std::fabs(v) > o.w_cap) {
        res.bounded = false;
        res.diagnostic = "w left the bounded regime";
        res.snapshots.push_back({s, w});
        return res;
      }
    }
    if (s >= times[next] - 1e-15) {
      res.snapshots.push_back({s, w});
      ++next;
    }
  }
  return res;
}

}  // namespace blowup::evolve

#endif  // BLOWUP_EVOLVE_HPP
