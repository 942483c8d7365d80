#ifndef BLOWUP_MEHLER_HPP
#define BLOWUP_MEHLER_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "blowup/core.hpp"
#include "blowup/numerics.hpp"
#include "blowup/report.hpp"
#include "blowup/weighted.hpp"

namespace blowup::semigroup {

namespace detail {

/// Far-field model of a semigroup output given the input model and the last output sample.
inline FarField output_far_field(const WeightedField& input, const std::vector<double>& values) {
  if (input.far_field().kind == FarField::Kind::PowerLaw) return FarField::power_law(input.far_field().exponent);
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::fabs(v));
  if (std::fabs(values.back()) <= 1e-6 * peak) return FarField::zero();
  return FarField::power_law(0.0);
}

inline void validate_radii(const std::vector<double>& radii) {
  if (radii.size() < 2 || radii.front() != 0.0) throw InvalidParameter("evaluation radii must start at 0");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw InvalidParameter("evaluation radii must increase strictly");
  }
}

}  // namespace detail

/// e^{At}ψ at a single radius |y| by the Mehler kernel.
inline double mehler_value(const WeightedField& psi, double t, double y) {
  const double sigma2 = -std::expm1(-t);
  const double c = std::fabs(y) * std::exp(-0.5 * t);
  const double knots[] = {psi.r_max()};
  const double I = shifted_gaussian_integral([&](double r) { return psi(r); }, psi.N(), c, sigma2, psi.parity(),
                                             knots);
  const double v = I * std::pow(4.0 * kPi * sigma2, -0.5 * psi.N());
  return (y < 0.0 && psi.parity() == Parity::Odd) ? -v : v;
}

/// e^{At}ψ sampled at eval_radii (defaults to the input knots).
inline WeightedField mehler_apply(const WeightedField& psi, double t, std::vector<double> eval_radii = {}) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidParameter("mehler_apply needs t > 0");
  if (eval_radii.empty()) eval_radii = psi.knots();
  detail::validate_radii(eval_radii);
  std::vector<double> v(eval_radii.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = mehler_value(psi, t, eval_radii[i]);
  if (psi.parity() == Parity::Odd) v.front() = 0.0;
  const FarField far = detail::output_far_field(psi, v);
  if (far.kind == FarField::Kind::Zero) v.back() = 0.0;
  return WeightedField(std::move(eval_radii), std::move(v), psi.N(), far, psi.parity());
}

/// Radii y_k = k h e^{t/2} for k h ≤ z_max: a grid on which e^{At}ψ = g(y e^{-t/2}) is resolved uniformly.
inline std::vector<double> characteristic_radii(double t, double y_max, double h = 0.025) {
  const double scale = std::exp(0.5 * t);
  const double z_max = y_max / scale;
  const int n = std::max(8, static_cast<int>(std::ceil(z_max / h)));
  std::vector<double> r(n + 1);
  for (int k = 0; k <= n; ++k) r[k] = (z_max * k / n) * scale;
  return r;
}

struct LambdaOptions {
  double dt = 0.01;           // step in t
  int intervals = 6000;       // z-grid intervals
  double z_max = 0.0;         // 0 selects the domain from the far-field model
  double grid_scale = 2.0;    // sinh grading scale of the z grid
  bool extrapolate = true;    // Richardson combination of dt and dt/2
  std::vector<double> eval_radii;  // empty selects the mapped z grid
};

namespace detail {

/// Second-order nonuniform three-point radial Laplacian Δ = ∂² + (N-1)/z ∂.
struct RadialLaplacian {
  std::vector<double> lower, diag, upper;

  RadialLaplacian(const std::vector<double>& z, int N, Parity parity) {
    const std::size_t n = z.size();
    lower.assign(n, 0.0);
    diag.assign(n, 0.0);
    upper.assign(n, 0.0);
    if (parity == Parity::Even) {
      const double h = z[1] - z[0];
      diag[0] = -2.0 * N / (h * h);
      upper[0] = 2.0 * N / (h * h);
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hm = z[i] - z[i - 1], hp = z[i + 1] - z[i], hs = hm + hp;
      const double k = (N - 1.0) / z[i];
      lower[i] = 2.0 / (hm * hs) - k * hp / (hm * hs);
      diag[i] = -2.0 / (hm * hp) + k * (hp - hm) / (hm * hp);
      upper[i] = 2.0 / (hp * hs) + k * hm / (hp * hs);
    }
  }
};

/// One integration of w_t = e^{-t} Δ_z w + Φ(z e^{t/2}) w from 0 to t with `steps` Strang steps.
inline std::vector<double> lambda_march(const std::vector<double>& z, std::vector<double> w,
                                        const PotentialField* phi, int N, Parity parity, double t, int steps) {
  const std::size_t n = z.size();
  const RadialLaplacian L(z, N, parity);
  const double dt = t / steps;
  std::vector<double> sub(n), dg(n), sup(n), rhs(n);
  auto potential_half = [&](double time, double h) {
    if (!phi || phi->is_zero()) return;
    const double scale = std::exp(0.5 * time);
    for (std::size_t i = 0; i < n; ++i) w[i] *= std::exp((*phi)(z[i] * scale) * h);
  };
  auto heat = [&](double dtau, double theta) {
    // theta = 1 gives backward Euler, theta = 1/2 Crank-Nicolson
    for (std::size_t i = 0; i < n; ++i) {
      double lw = L.diag[i] * w[i];
      if (i > 0) lw += L.lower[i] * w[i - 1];
      if (i + 1 < n) lw += L.upper[i] * w[i + 1];
      rhs[i] = w[i] + (1.0 - theta) * dtau * lw;
      sub[i] = -theta * dtau * L.lower[i];
      dg[i] = 1.0 - theta * dtau * L.diag[i];
      sup[i] = -theta * dtau * L.upper[i];
    }
    // Dirichlet rows: the origin for odd fields and the outer boundary
    if (parity == Parity::Odd) {
      sub[0] = 0.0, dg[0] = 1.0, sup[0] = 0.0, rhs[0] = 0.0;
    }
    sub[n - 1] = 0.0, dg[n - 1] = 1.0, sup[n - 1] = 0.0, rhs[n - 1] = w[n - 1];
    numerics::solve_tridiagonal(sub, dg, sup, rhs);
    w.swap(rhs);
  };
  auto step = [&](double t0, double h, double theta) {
    potential_half(t0, 0.5 * h);
    heat(std::exp(-t0) - std::exp(-(t0 + h)), theta);
    potential_half(t0 + h, 0.5 * h);
  };
  // two backward-Euler half steps damp the stiff modes before Crank-Nicolson
  step(0.0, 0.5 * dt, 1.0);
  step(0.5 * dt, 0.5 * dt, 1.0);
  for (int k = 1; k < steps; ++k) step(k * dt, dt, 0.5);
  return w;
}

}  // namespace detail

/// e^{Λt}ψ for Λ = A + Φ. In characteristic coordinates z = y e^{-t/2}, τ = 1 - e^{-t} the operator A
/// becomes the heat operator; the potential is applied by exact exponential half steps (Strang splitting)
/// and the diffusion by Crank-Nicolson on a sinh-graded z grid. With Φ = 0 the output equals e^{At}ψ.
inline WeightedField lambda_apply(const WeightedField& psi, const PotentialField& phi, double t,
                                  const LambdaOptions& o = {}) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidParameter("lambda_apply needs t > 0");
  if (phi.N() != psi.N()) throw InvalidParameter("potential and field dimensions differ");
  if (!(o.dt > 0.0) || o.intervals < 16) throw InvalidParameter("invalid lambda_apply options");
  const int steps = std::max(2, static_cast<int>(std::ceil(t / o.dt)));
  if (t / steps < 1e-12) throw NumericalError("lambda_apply step size underflow");

  // compactly supported fields need the domain to cover the support plus the diffusion range; power-law
  // fields use a distant Dirichlet boundary carrying the far-field value
  const bool compact = psi.far_field().kind == FarField::Kind::Zero;
  double z_max = o.z_max > 0.0 ? o.z_max : (compact ? psi.r_max() + 14.0 : std::max(64.0, psi.r_max() + 14.0));
  if (!o.eval_radii.empty()) z_max = std::max(z_max, o.eval_radii.back() * std::exp(-0.5 * t) + 14.0);
  const auto z = numerics::sinh_graded_grid(z_max, static_cast<std::size_t>(o.intervals), o.grid_scale);
  std::vector<double> w0(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) w0[i] = psi(z[i]);
  if (psi.parity() == Parity::Odd) w0.front() = 0.0;

  const PotentialField* pot = phi.is_zero() ? nullptr : &phi;
  std::vector<double> w = detail::lambda_march(z, w0, pot, psi.N(), psi.parity(), t, steps);
  if (o.extrapolate) {
    const auto fine = detail::lambda_march(z, w0, pot, psi.N(), psi.parity(), t, 2 * steps);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (4.0 * fine[i] - w[i]) / 3.0;
  }
  for (double v : w) {
    if (!std::isfinite(v)) throw NumericalError("lambda_apply produced non-finite values");
  }

  const numerics::CubicSpline ws(z, w, psi.parity() == Parity::Even ? 0.0 : std::nan(""));
  const double scale = std::exp(0.5 * t);
  std::vector<double> radii = o.eval_radii;
  if (radii.empty()) {
    radii.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) radii[i] = z[i] * scale;
  }
  detail::validate_radii(radii);
  std::vector<double> v(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) v[i] = ws(std::min(radii[i] / scale, z.back()));
  if (psi.parity() == Parity::Odd) v.front() = 0.0;
  const FarField far = detail::output_far_field(psi, v);
  if (far.kind == FarField::Kind::Zero) v.back() = 0.0;
  return WeightedField(std::move(radii), std::move(v), psi.N(), far, psi.parity());
}

/// Nonnegative radial bump field Σ a_k [g_k(r - c_k) + g_k(r + c_k)], g_k(x) = exp(-x²/(2 w_k²)).
struct Bump {
  double amplitude = 1.0;
  double center = 0.0;
  double width = 1.0;
};

inline WeightedField bump_field(const std::vector<Bump>& bumps, int N, double h = 0.01) {
  if (bumps.empty()) throw InvalidParameter("bump field needs at least one bump");
  double R = 0.0;
  for (const auto& b : bumps) {
    if (!(b.width > 0.0) || b.amplitude < 0.0 || b.center < 0.0) throw InvalidParameter("invalid bump");
    R = std::max(R, b.center + 12.0 * b.width);
  }
  const auto grid = numerics::uniform_grid(R, static_cast<std::size_t>(std::ceil(R / h)));
  return WeightedField::sample(
      [&](double r) {
        double s = 0.0;
        for (const auto& b : bumps) {
          const double u = (r - b.center) / b.width, v = (r + b.center) / b.width;
          s += b.amplitude * (std::exp(-0.5 * u * u) + std::exp(-0.5 * v * v));
        }
        return s;
      },
      grid, N, FarField::zero());
}

inline std::vector<Bump> random_bumps(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_real_distribution<double> amp(0.1, 2.0), center(0.0, 3.0), width(0.3, 1.2);
  std::vector<Bump> out(count(rng));
  for (auto& b : out) b = {amp(rng), center(rng), width(rng)};
  return out;
}

/// Right-hand constant of the Hermite regularization inequality, or NaN outside β - 1 - (q-1)e^{-t} > 0.
inline double hermite_constant(int N, double q, double beta, double r, double r_tilde, double t) {
  const double e = std::exp(-t);
  const double gap = beta - 1.0 - (q - 1.0) * e;
  if (!(gap > 0.0)) return std::nan("");
  const double one_e = -std::expm1(-t);
  const double bp = beta / (beta - 1.0);
  const double a = std::pow(4.0 * kPi * one_e, -0.5 * N);
  const double b = std::pow(4.0 * kPi * beta * one_e / (bp * (beta - 1.0 + e)), N / (2.0 * bp));
  const double c = std::pow(4.0 * kPi * (beta - 1.0 + e) / gap, N / (2.0 * q));
  const double d = std::max(0.0, r - r_tilde * std::exp(0.5 * t));
  return a * b * c * std::exp(e * d * d / (4.0 * gap));
}

/// Grid on which e^{At}ψ is resolved well enough for shifted norms centred within radius `reach`.
inline std::vector<double> norm_eval_radii(double t, double reach) {
  return characteristic_radii(t, reach + 16.0);
}

struct HermiteOutcome {
  VerificationReport report;
  double shifted_ratio = std::nan("");  // ℒ^q_{e^{t/2}μ}(e^{At}ψ)(1-e^{-t})^{N/(2β)} / ℒ^β_μ(ψ), μ = r̃
};

inline HermiteOutcome hermite_outcome(const WeightedField& psi, double q, double beta, double r, double r_tilde,
                                      double t) {
  if (!(q > 1.0) || !(beta > 1.0) || !std::isfinite(q) || !std::isfinite(beta)) {
    throw InvalidParameter("Hermite check needs 1 < q, beta < inf");
  }
  if (!(t > 0.0) || !(r >= 0.0) || !(r_tilde >= 0.0)) throw InvalidParameter("Hermite check needs t > 0, r >= 0");
  HermiteOutcome out;
  auto& rep = out.report;
  rep.check_name = "hermite_regularization";
  rep.parameters = {{"q", q}, {"beta", beta}, {"r", r}, {"r_tilde", r_tilde}, {"t", t}, {"N", double(psi.N())}};
  rep.tolerances["margin"] = -1e-8;
  const double K = hermite_constant(psi.N(), q, beta, r, r_tilde, t);
  if (std::isnan(K)) {
    rep.verdict = Verdict::Inapplicable;
    rep.note("validity condition beta - 1 - (q - 1) e^{-t} > 0 fails");
    return out;
  }
  if (psi.is_zero()) {
    rep.lhs = 0.0;
    rep.rhs_or_calibration = 0.0;
    rep.margin_or_ratio = 0.0;
    rep.verdict = Verdict::Pass;
    rep.note("zero field");
    return out;
  }
  const double mu = r_tilde;
  const double reach = std::max(r, std::exp(0.5 * t) * mu);
  const auto evolved = mehler_apply(psi, t, norm_eval_radii(t, reach));
  const auto sup_lhs = sup_shifted_norm(evolved, q, r);
  const auto sup_rhs = sup_shifted_norm(psi, beta, r_tilde);
  rep.lhs = sup_lhs.value;
  rep.rhs_or_calibration = K * sup_rhs.value;
  rep.margin_or_ratio = rep.rhs_or_calibration - rep.lhs;
  rep.measured["constant"] = K;
  rep.measured["lhs_argmax"] = sup_lhs.argmax;
  rep.measured["rhs_argmax"] = sup_rhs.argmax;
  rep.verdict = rep.margin_or_ratio >= rep.tolerances["margin"] ? Verdict::Pass : Verdict::Fail;

  const double e = std::exp(-t);
  if (q * e / (beta - 1.0 + e) < 1.0) {
    const double num = shifted_norm(evolved, q, std::exp(0.5 * t) * mu);
    const double den = shifted_norm(psi, beta, mu);
    out.shifted_ratio = num * std::pow(-std::expm1(-t), psi.N() / (2.0 * beta)) / den;
    rep.measured["shifted_ratio"] = out.shifted_ratio;
  } else {
    rep.note("second form not applicable: q e^{-t} / (beta - 1 + e^{-t}) >= 1");
  }
  return out;
}

/// Both sides of the Hermite regularization inequality for one field and parameter set.
inline VerificationReport check_hermite_regularization(const WeightedField& psi, double q, double beta, double r,
                                                       double r_tilde, double t) {
  return hermite_outcome(psi, q, beta, r, r_tilde, t).report;
}

struct HermiteSweepOptions {
  int draws = 1000;
  std::uint64_t seed = 20240917;
  std::vector<int> dimensions{1, 2, 3, 4};
};

/// Seeded sweep over (ψ, q, β, r, r̃, t) in the valid region. The minimal margin decides the verdict;
/// the largest second-form ratio is the empirical constant.
inline VerificationReport hermite_sweep(const HermiteSweepOptions& o = {}) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> qd(1.2, 4.0), bd(1.2, 4.0), rd(0.0, 2.0), td(0.2, 5.0);
  std::uniform_int_distribution<std::size_t> nd(0, o.dimensions.size() - 1);
  VerificationReport rep;
  rep.check_name = "hermite_regularization_sweep";
  rep.parameters = {{"draws", double(o.draws)}, {"seed", double(o.seed)}};
  rep.tolerances["margin"] = -1e-8;
  double worst = INFINITY, worst_rel = INFINITY, c_emp = 0.0;
  int failures = 0;
  for (int i = 0; i < o.draws; ++i) {
    double q, beta, t;
    do {
      q = qd(rng), beta = bd(rng), t = td(rng);
    } while (!(beta - 1.0 - (q - 1.0) * std::exp(-t) > 0.0));
    const double r = rd(rng), rt = rd(rng);
    const int N = o.dimensions[nd(rng)];
    const auto psi = bump_field(random_bumps(rng), N);
    const auto out = hermite_outcome(psi, q, beta, r, rt, t);
    if (out.report.verdict != Verdict::Pass) ++failures;
    worst = std::min(worst, out.report.margin_or_ratio);
    worst_rel = std::min(worst_rel, out.report.margin_or_ratio / out.report.rhs_or_calibration);
    if (std::isfinite(out.shifted_ratio)) c_emp = std::max(c_emp, out.shifted_ratio);
  }
  rep.margin_or_ratio = worst;
  rep.measured["min_margin"] = worst;
  rep.measured["min_relative_margin"] = worst_rel;
  rep.measured["failures"] = failures;
  rep.measured["empirical_C"] = c_emp;
  rep.verdict = failures == 0 && std::isfinite(c_emp) ? Verdict::Pass : Verdict::Fail;
  return rep;
}

/// ℒ^α_{e^{t/2}ξ}(Φ) for each t and the least-squares decay rate of log ℒ against t.
inline VerificationReport check_potential_decay(const PotentialField& phi, double alpha_exp, double xi,
                                                const std::vector<double>& t_list) {
  if (!(alpha_exp > 1.0)) throw InvalidParameter("alpha must be > 1");
  if (!(xi > 0.0)) throw InvalidParameter("xi must be > 0");
  if (t_list.size() < 2) throw InvalidParameter("need at least two times");
  VerificationReport rep;
  rep.check_name = "potential_decay";
  rep.parameters = {{"alpha", alpha_exp}, {"xi", xi}, {"Gamma", phi.gamma()}, {"decay_C", phi.decay_c()}};
  rep.tolerances["rate"] = 0.9;
  if (phi.is_zero()) {
    rep.lhs = 0.0;
    rep.verdict = Verdict::Pass;
    rep.note("vacuous pass: zero potential");
    for (double t : t_list) rep.measured["norm_t=" + std::to_string(t)] = 0.0;
    return rep;
  }
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (double t : t_list) {
    const double v = potential_shifted_norm(phi, alpha_exp, std::exp(0.5 * t) * xi);
    rep.measured["norm_t=" + std::to_string(t)] = v;
    const double l = std::log(v);
    st += t, sl += l, stt += t * t, stl += t * l;
  }
  const double n = static_cast<double>(t_list.size());
  const double slope = (n * stl - st * sl) / (n * stt - st * st);
  rep.lhs = -slope;
  rep.rhs_or_calibration = 1.0;
  rep.margin_or_ratio = -slope;
  rep.measured["rate"] = -slope;
  rep.verdict = -slope >= 0.9 ? Verdict::Pass : Verdict::Fail;
  return rep;
}

/// ℒ^p_ξ(ψ) ≤ ((4π)^{N/2} e^{(γ²-γ)|ξ|²/4})^{1/(γp)} ‖ψ‖_{L^q_ρ} with p/q + 1/γ = 1, p < q.
inline VerificationReport check_norm_comparison(const WeightedField& psi, double p, double q, double xi) {
  if (!(p > 1.0) || !(q > p)) throw InvalidParameter("norm comparison needs 1 < p < q");
  VerificationReport rep;
  rep.check_name = "norm_comparison";
  rep.parameters = {{"p", p}, {"q", q}, {"xi", xi}, {"N", double(psi.N())}};
  rep.tolerances["margin"] = -1e-8;
  const double gamma = 1.0 / (1.0 - p / q);
  const double C = std::pow(std::pow(4.0 * kPi, 0.5 * psi.N()) * std::exp((gamma * gamma - gamma) * xi * xi / 4.0),
                            1.0 / (gamma * p));
  rep.lhs = shifted_norm(psi, p, xi);
  rep.rhs_or_calibration = C * weighted_lq(psi, q);
  rep.margin_or_ratio = rep.rhs_or_calibration - rep.lhs;
  rep.measured["constant"] = C;
  rep.verdict = rep.margin_or_ratio >= -1e-8 ? Verdict::Pass : Verdict::Fail;
  return rep;
}

/// Scenario of the Λ regularization estimates.
struct LambdaScenario {
  enum class Kind { Smoothing, LongTime, Restart };
  Kind kind = Kind::LongTime;
  double s = 4.0;
  double t = 1.0;   // Smoothing: evolution time t < s; Restart: intermediate time in [s0, s0 + M]
  double s0 = 0.0;  // Restart only
  double xi = 1.0;
  double p = 2.0;
  double beta = 2.0;

  static constexpr double kDeskCap = 8.0;
};

inline const char* to_string(LambdaScenario::Kind k) {
  switch (k) {
    case LambdaScenario::Kind::Smoothing: return "smoothing";
    case LambdaScenario::Kind::LongTime: return "long_time";
    case LambdaScenario::Kind::Restart: return "restart";
  }
  return "?";
}

struct LambdaRatio {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// lhs and rhs of the selected estimate; the estimate bounds the ratio lhs / rhs by a constant.
inline LambdaRatio lambda_ratio(const WeightedField& psi, const PotentialField& phi, const LambdaScenario& sc,
                                const LambdaOptions& base = {}) {
  using K = LambdaScenario::Kind;
  double evolve_t = 0.0, shift = 0.0;
  LambdaRatio out;
  switch (sc.kind) {
    case K::Smoothing: {
      if (!(sc.t > 0.0 && sc.t < sc.s)) throw InvalidParameter("smoothing scenario needs 0 < t < s");
      evolve_t = sc.t;
      shift = std::exp(0.5 * sc.s) * sc.xi;
      const double eps = psi.N() / (2.0 * sc.beta);
      out.rhs = std::pow(-std::expm1(-sc.t), -eps) * shifted_norm(psi, sc.beta, std::exp(0.5 * (sc.s - sc.t)) * sc.xi);
      break;
    }
    case K::LongTime:
      evolve_t = sc.s;
      shift = std::exp(0.5 * sc.s) * sc.xi;
      out.rhs = weighted_lq(psi, 2.0);
      break;
    case K::Restart:
      if (!(sc.t >= sc.s0 && sc.t < sc.s)) throw InvalidParameter("restart scenario needs s0 <= t < s");
      evolve_t = sc.s - sc.t;
      shift = std::exp(0.5 * (sc.s - sc.s0)) * sc.xi;
      out.rhs = weighted_lq(psi, 2.0);
      break;
  }
  const double p = sc.kind == K::Smoothing ? sc.p : 2.0;
  LambdaOptions o = base;
  o.eval_radii = norm_eval_radii(evolve_t, shift);
  const auto evolved = lambda_apply(psi, phi, evolve_t, o);
  out.lhs = shifted_norm(evolved, p, shift);
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : std::nan("");
  return out;
}

/// Calibration sweep: three fixed bumps at the smallest desk value s = 2 of the scenario family.
inline double lambda_calibration(const PotentialField& phi, const LambdaScenario& sc, const LambdaOptions& o = {}) {
  const std::vector<std::vector<Bump>> fixed{{{1.0, 0.0, 1.0}}, {{1.0, 1.0, 0.5}}, {{0.5, 0.0, 0.4}, {1.0, 2.0, 0.7}}};
  LambdaScenario cal = sc;
  cal.s = 2.0;
  if (sc.kind == LambdaScenario::Kind::Smoothing) cal.t = std::min(sc.t, 1.0);
  if (sc.kind == LambdaScenario::Kind::Restart) cal.s0 = 0.0, cal.t = 0.0;
  double best = 0.0;
  for (const auto& b : fixed) best = std::max(best, lambda_ratio(bump_field(b, phi.N()), phi, cal, o).ratio);
  return best;
}

/// Boundedness calibration of the Λ estimates: the scenario ratio must not exceed 10 times the largest
/// ratio of the calibration sweep.
inline VerificationReport check_lambda_regularization(const WeightedField& psi, const PotentialField& phi,
                                                      const LambdaScenario& sc, const LambdaOptions& o = {}) {
  VerificationReport rep;
  rep.check_name = std::string("lambda_regularization_") + to_string(sc.kind);
  rep.parameters = {{"s", sc.s}, {"t", sc.t}, {"s0", sc.s0}, {"xi", sc.xi}, {"p", sc.p}, {"beta", sc.beta},
                    {"Gamma", phi.gamma()}, {"N", double(psi.N())}};
  rep.tolerances["calibration_factor"] = 10.0;
  if (sc.s > LambdaScenario::kDeskCap) {
    rep.verdict = Verdict::Inapplicable;
    rep.note("out of desk range: s > 8");
    return rep;
  }
  const auto r = lambda_ratio(psi, phi, sc, o);
  const double cal = lambda_calibration(phi, sc, o);
  rep.lhs = r.lhs;
  rep.measured["rhs"] = r.rhs;
  rep.measured["ratio"] = r.ratio;
  rep.rhs_or_calibration = cal;
  rep.margin_or_ratio = r.ratio;
  rep.note("calibration: max ratio over three fixed bumps at s = 2");
  rep.verdict = std::isfinite(r.ratio) && r.ratio <= 10.0 * cal ? Verdict::Pass : Verdict::Fail;
  return rep;
}

/// Defect of e^{Λt}ψ = e^{At}ψ + ∫_0^t e^{A(t-τ)} Φ e^{Λτ}ψ dτ in L²_ρ relative to ‖e^{Λt}ψ‖, with the
/// τ integral by composite Simpson on `intervals` (even) panels.
inline VerificationReport check_variation_identity(const WeightedField& psi, const PotentialField& phi, double t,
                                                   int intervals = 8, const LambdaOptions& o = {}) {
  if (intervals < 2 || intervals % 2) throw InvalidParameter("Simpson needs an even number of panels");
  VerificationReport rep;
  rep.check_name = "variation_of_constants";
  rep.parameters = {{"t", t}, {"Gamma", phi.gamma()}, {"intervals", double(intervals)}};
  rep.tolerances["relative_defect"] = 1e-4;
  const auto radii = norm_eval_radii(0.0, psi.r_max());
  LambdaOptions lo = o;
  lo.eval_radii = radii;
  const auto full = lambda_apply(psi, phi, t, lo);
  std::vector<double> acc(radii.size(), 0.0);
  const auto free = mehler_apply(psi, t, radii);
  for (std::size_t i = 0; i < radii.size(); ++i) acc[i] = free.values()[i];
  const double h = t / intervals;
  for (int k = 0; k <= intervals; ++k) {
    const double tau = k * h;
    const double weight = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const WeightedField inner = k == 0 ? psi : lambda_apply(psi, phi, tau, lo);
    std::vector<double> pv(inner.knots().size());
    for (std::size_t i = 0; i < pv.size(); ++i) pv[i] = phi(inner.knots()[i]) * inner.values()[i];
    const WeightedField forced(inner.knots(), std::move(pv), psi.N(), FarField::zero(), psi.parity());
    const WeightedField moved = k == intervals ? forced : mehler_apply(forced, t - tau, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) acc[i] += h / 3.0 * weight * moved(radii[i]);
  }
  double peak = 0.0;
  for (double v : acc) peak = std::max(peak, std::fabs(v));
  if (std::fabs(acc.back()) <= 1e-6 * peak) acc.back() = 0.0;
  const WeightedField rebuilt(radii, acc, psi.N(), detail::output_far_field(psi, acc), psi.parity());
  const double defect = weighted_l2_distance(full, rebuilt);
  const double scale = weighted_lq(full, 2.0);
  rep.lhs = defect;
  rep.rhs_or_calibration = scale;
  rep.margin_or_ratio = defect / scale;
  rep.verdict = defect / scale <= 1e-4 ? Verdict::Pass : Verdict::Fail;
  return rep;
}

}  // namespace blowup::semigroup

#endif  // BLOWUP_MEHLER_HPP
