#ifndef BLOWUP_EXPERIMENT_HPP
#define BLOWUP_EXPERIMENT_HPP

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "blowup/acceptance.hpp"
#include "blowup/config.hpp"
#include "blowup/evolve.hpp"
#include "blowup/io.hpp"
#include "blowup/mehler.hpp"
#include "blowup/profile.hpp"
#include "blowup/verify.hpp"
#include "json.hpp"

namespace blowup::harness {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitRuntime = 3 };

struct ExperimentOutcome {
  int exit_code = kExitPass;
  std::filesystem::path output_dir;
  bool verifying = false;
  std::vector<VerificationReport> reports;
  nlohmann::json error;  // null unless the run failed
};

/// Output directory: the `output` key, else $BLOWUP_OUTPUT_ROOT/<command>, else ./blowup_out/<command>.
inline std::filesystem::path resolve_output_dir(const ExperimentConfig& c) {
  if (!c.output.empty()) return c.output;
  const char* root = std::getenv("BLOWUP_OUTPUT_ROOT");
  return std::filesystem::path(root && *root ? root : "blowup_out") / c.command;
}

inline nlohmann::json error_json(const std::string& kind, const std::string& message, int exit_code) {
  return {{"error", message}, {"kind", kind}, {"exit_code", exit_code}};
}

namespace detail {

struct Context {
  const ExperimentConfig& c;
  std::filesystem::path dir;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<VerificationReport> reports;
  std::vector<std::string> artifacts;
  bool verifying = false;

  Context(const ExperimentConfig& config, std::filesystem::path out) : c(config), dir(std::move(out)) {}

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& columns) {
    write_csv(dir / name, header, columns);
    artifacts.push_back(name);
  }
  void verdict(VerificationReport rep) {
    verifying = true;
    reports.push_back(std::move(rep));
  }
};

inline Nonlinearity nonlinearity(const ExperimentConfig& c) {
  return c.nonlinearity == "power" ? Nonlinearity::power(c.p) : Nonlinearity::exponential();
}

inline nlohmann::json optional_number(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

/// A shot at `alpha` when alpha > 0, otherwise the scan candidate with index `candidate`.
inline profile::RadialProfile select_profile(Context& ctx) {
  const auto& c = ctx.c;
  const auto nl = nonlinearity(c);
  if (c.alpha > 0.0) {
    auto prof = profile::shoot_profile(c.alpha, nl, c.N);
    if (prof.classification != profile::Classification::TailConvergent) {
      throw InvalidParameter("alpha does not give a tail-convergent profile");
    }
    ctx.summary["profile_source"] = "shot";
    return prof;
  }
  auto scan = profile::scan_alphas(nl, c.N, c.alpha_lo, c.alpha_hi, c.scan_grid);
  if (c.candidate >= static_cast<int>(scan.candidates.size())) {
    throw InvalidParameter("candidate " + std::to_string(c.candidate) + " out of range: scan found " +
                           std::to_string(scan.candidates.size()));
  }
  ctx.summary["profile_source"] = "scan";
  ctx.summary["scan_candidates"] = scan.candidates.size();
  return std::move(scan.candidates[static_cast<std::size_t>(c.candidate)].profile);
}

inline void record_profile(Context& ctx, const profile::RadialProfile& prof) {
  ctx.summary["alpha"] = prof.alpha;
  ctx.summary["tail_constant"] = optional_number(prof.tail_constant);
}

inline semigroup::WeightedField bump(const ExperimentConfig& c) {
  return semigroup::bump_field({{c.bump_amplitude, c.bump_center, c.bump_width}}, c.N);
}

struct GenericRun {
  evolve::RunResult run;
  evolve::BlowupFit fit;
};

/// u₀ = amplitude (1 - r²) on the ball of radius R; snapshots at the requested sup-norm levels.
inline GenericRun generic_run(Context& ctx, std::vector<double> levels = {}) {
  const auto& c = ctx.c;
  const auto nl = nonlinearity(c);
  const double R = c.R, A = c.amplitude;
  auto s0 = evolve::initial_state([&](double r) { return A * (1.0 - (r / R) * (r / R)); }, c.N, R, c.M);
  evolve::RunOptions o;
  o.step.dt_max = c.dt_max;
  o.step.c_safety = c.c_safety;
  o.u_stop = c.u_stop;
  o.t_max = c.t_max;
  o.snapshot_levels = std::move(levels);
  GenericRun g{evolve::run_until_blowup(std::move(s0), nl, o), {}};
  g.fit = evolve::fit_blowup(g.run.trace, nl);
  ctx.summary["run"] = {{"stop_reason", evolve::to_string(g.run.trace.stop_reason)},
                        {"steps", g.run.final_state.step_count},
                        {"t_final", g.run.final_state.t},
                        {"sup_norm_final", g.run.final_state.sup_norm()},
                        {"fitted_T", blowup::detail::number_or_null(g.fit.T)},
                        {"fit_reliable", g.fit.reliable},
                        {"r_squared", blowup::detail::number_or_null(g.fit.r_squared)}};
  return g;
}

/// Snapshot levels for the similarity and refined checks on generic exponential runs.
inline std::vector<double> generic_levels() { return {9, 10, 11, 12, 13, 14, 15, 16}; }

inline void require_reliable_fit(const GenericRun& g) {
  if (!g.run.blew_up()) throw NumericalError("generic run did not blow up: " + g.run.trace.diagnostic);
  if (!g.fit.reliable) throw NumericalError(g.fit.diagnostic);
}

// -- profile -------------------------------------------------------------------

inline void profile_shoot(Context& ctx) {
  const auto& c = ctx.c;
  const auto prof = profile::shoot_profile(c.alpha, nonlinearity(c), c.N);
  ctx.csv("profile.csv", {"r", "phi", "dphi"}, {prof.r, prof.phi, prof.dphi});
  record_profile(ctx, prof);
  ctx.summary["classification"] = profile::to_string(prof.classification);
  ctx.summary["r_end"] = prof.r_end();
  ctx.summary["diagnostic"] = prof.diagnostic;
}

inline void profile_scan(Context& ctx) {
  const auto& c = ctx.c;
  const auto res = profile::scan_alphas(nonlinearity(c), c.N, c.alpha_lo, c.alpha_hi, c.scan_grid);
  ctx.csv("defects.csv", {"alpha", "defect"}, {res.alphas, res.defects});
  std::vector<std::vector<double>> cols(6);
  for (const auto& k : res.candidates) {
    for (std::size_t j = 0; j < 6; ++j) {
      const double v[] = {k.alpha, k.tail_constant, k.bracket_lo, k.bracket_hi, k.match_radius, k.slope_gap};
      cols[j].push_back(v[j]);
    }
  }
  ctx.csv("candidates.csv", {"alpha", "tail_constant", "bracket_lo", "bracket_hi", "match_radius", "slope_gap"}, cols);
  ctx.summary["candidates"] = res.candidates.size();
  ctx.summary["rejected"] = res.rejected;
  ctx.summary["diagnostic"] = res.diagnostic;
}

inline void profile_singular(Context& ctx) {
  const auto& c = ctx.c;
  const auto nl = nonlinearity(c);
  const auto closed = profile::singular_closed_form(nl, c.N);
  auto prof = profile::singular_profile(nl, c.N);
  std::vector<double> res;
  double worst = 0.0;
  for (double r : prof.r) {
    res.push_back(closed.residual(r));
    if (r >= 0.1 && r <= 10.0) worst = std::max(worst, std::fabs(res.back()));
  }
  ctx.csv("profile.csv", {"r", "phi", "residual"}, {prof.r, prof.phi, res});
  prof.tail_constant.reset();
  const auto fitted = profile::tail_constant(prof);
  const double cerr = fitted ? std::fabs(*fitted - closed.constant) : INFINITY;
  VerificationReport rep;
  rep.check_name = "singular_profile";
  rep.parameters = {{"N", double(c.N)}};
  rep.labels["nonlinearity"] = nl.name();
  rep.tolerances = {{"residual", 1e-10}, {"tail_constant", 1e-12}};
  rep.measured = {{"max_residual", worst}, {"tail_constant_error", cerr}, {"constant", closed.constant}};
  rep.lhs = worst;
  rep.rhs_or_calibration = 1e-10;
  rep.margin_or_ratio = 1e-10 - worst;
  rep.verdict = worst < 1e-10 && cerr <= 1e-12 ? Verdict::Pass : Verdict::Fail;
  ctx.verdict(rep);
}

// -- semigroup -----------------------------------------------------------------

inline void semigroup_norm(Context& ctx) {
  const auto& c = ctx.c;
  const auto psi = bump(c);
  const auto sup = semigroup::sup_shifted_norm(psi, c.q, c.r);
  ctx.csv("field.csv", {"r", "psi"}, {psi.knots(), psi.values()});
  ctx.summary["shifted_norm"] = semigroup::shifted_norm(psi, c.q, c.xi);
  ctx.summary["sup_shifted_norm"] = sup.value;
  ctx.summary["sup_argmax"] = sup.argmax;
  ctx.summary["weighted_lq"] = semigroup::weighted_lq(psi, c.q);
}

inline void semigroup_mehler(Context& ctx) {
  const auto& c = ctx.c;
  const auto psi = bump(c);
  const auto out = semigroup::mehler_apply(psi, c.t, semigroup::norm_eval_radii(c.t, 8.0));
  std::vector<double> input;
  for (double r : out.knots()) input.push_back(psi(r));
  ctx.csv("mehler.csv", {"r", "psi", "evolved"}, {out.knots(), input, out.values()});
  ctx.summary["weighted_lq_input"] = semigroup::weighted_lq(psi, c.q);
  ctx.summary["weighted_lq_evolved"] = semigroup::weighted_lq(out, c.q);
}

inline void semigroup_check(Context& ctx) {
  const auto& c = ctx.c;
  ctx.verdict(semigroup::check_hermite_regularization(bump(c), c.q, c.beta, c.r, c.r_tilde, c.t));
  semigroup::HermiteSweepOptions o;
  o.draws = c.draws;
  o.seed = static_cast<std::uint64_t>(c.seed);
  ctx.verdict(semigroup::hermite_sweep(o));
}

// -- evolve --------------------------------------------------------------------

inline void evolve_run(Context& ctx) {
  const auto& c = ctx.c;
  const auto g = generic_run(ctx);
  const auto& tr = g.run.trace;
  ctx.csv("trace.csv", {"t", "sup_norm", "dt", "grad_margin"}, {tr.times, tr.sup_norms, tr.dts, tr.grad_bound_margins});
  ctx.csv("final.csv", {"r", "u"}, {g.run.final_state.grid, g.run.final_state.u});
  const auto nl = nonlinearity(c);
  ctx.summary["grid"] = {{"R", c.R}, {"M", c.M}, {"N", c.N}};
  ctx.summary["caps"] = {{"u_stop", c.u_stop > 0.0 ? c.u_stop : evolve::default_u_stop(nl)},
                         {"t_max", c.t_max},
                         {"dt_max", c.dt_max},
                         {"c_safety", c.c_safety}};
  ctx.summary["nonlinearity"] = nl.name();
  ctx.summary["fit"] = {{"T", blowup::detail::number_or_null(g.fit.T)},
                        {"slope", blowup::detail::number_or_null(g.fit.slope)},
                        {"rate_band", {blowup::detail::number_or_null(g.fit.C1), blowup::detail::number_or_null(g.fit.C2)}},
                        {"r_squared", blowup::detail::number_or_null(g.fit.r_squared)},
                        {"samples", g.fit.samples},
                        {"reliable", g.fit.reliable},
                        {"diagnostic", g.fit.diagnostic}};
  ctx.summary["min_principle_ok"] = tr.min_principle_ok;
}

inline void evolve_wframe(Context& ctx) {
  const auto& c = ctx.c;
  const auto prof = select_profile(ctx);
  record_profile(ctx, prof);
  evolve::WFrameOptions o;
  o.M = c.M;
  o.ds_max = c.dt_max;
  o.c_safety = c.c_safety;
  o.snapshot_times = {0.0, 0.25 * c.s_span, 0.5 * c.s_span, 0.75 * c.s_span};
  const auto res = evolve::w_frame_evolve([&](double y) { return prof.value(y); }, nonlinearity(c), c.N, c.Y,
                                          c.s_span, prof.value(c.Y), o);
  std::vector<std::string> header{"y", "phi"};
  std::vector<std::vector<double>> cols{res.grid, {}};
  for (double y : res.grid) cols[1].push_back(prof.value(y));
  for (const auto& snap : res.snapshots) {
    header.push_back("w_s=" + format_number(snap.s));
    cols.push_back(snap.w);
  }
  if (res.bounded) ctx.csv("wframe.csv", header, cols);
  VerificationReport rep;
  rep.check_name = "wframe_stationarity";
  rep.parameters = {{"alpha", prof.alpha}, {"Y", c.Y}, {"s_span", c.s_span}, {"N", double(c.N)}};
  rep.tolerances["sup_deviation"] = 1e-3;
  if (!res.bounded) {
    rep.verdict = Verdict::Fail;
    rep.note(res.diagnostic);
  } else {
    double d = 0.0;
    const auto& w = res.snapshots.back().w;
    for (std::size_t i = 0; i < res.grid.size() && res.grid[i] <= c.Y / 2; ++i) {
      d = std::max(d, std::fabs(w[i] - prof.value(res.grid[i])));
    }
    rep.measured["sup_deviation"] = d;
    rep.lhs = d;
    rep.rhs_or_calibration = 1e-3;
    rep.margin_or_ratio = 1e-3 - d;
    rep.verdict = d < 1e-3 ? Verdict::Pass : Verdict::Fail;
    rep.note("deviation measured on |y| <= Y/2 at s = s_span");
  }
  ctx.verdict(rep);
}

// -- verify --------------------------------------------------------------------

inline void verify_convergence(Context& ctx) {
  const auto& c = ctx.c;
  verify::ConvergenceOptions o;
  o.tol_conv = c.tol_conv;
  if (c.source == "exact") {
    const auto prof = select_profile(ctx);
    record_profile(ctx, prof);
    std::vector<evolve::EvolutionState> snaps;
    for (double tau : {1e-3, 1e-4, 1e-5, 1e-6}) {
      snaps.push_back(evolve::exact_selfsimilar(prof, 1.0, 1.0 - tau, evolve::uniform_ball_grid(c.R, c.M)));
    }
    ctx.verdict(verify::similarity_convergence(snaps, prof, 1.0, c.Y, o));
    return;
  }
  if (c.nonlinearity != "exponential") throw InvalidParameter("source=run supports the exponential nonlinearity");
  const auto g = generic_run(ctx, generic_levels());
  require_reliable_fit(g);
  std::vector<double> ts, sups;
  for (const auto& s : g.run.snapshots) ts.push_back(s.t), sups.push_back(s.sup_norm());
  ctx.csv("snapshots.csv", {"t", "sup_norm"}, {ts, sups});
  o.trend_only = true;
  const auto zero = profile::shoot_profile(0.0, Nonlinearity::exponential(), c.N);
  ctx.verdict(verify::similarity_convergence(g.run.snapshots, zero, g.fit.T, c.Y, o));
}

inline void window_csv(Context& ctx, const std::string& name, const verify::WindowSamples& w) {
  ctx.csv(name, {"x", "g"}, {w.x, w.g});
}

inline void verify_theorem2(Context& ctx) {
  const auto& c = ctx.c;
  const auto prof = select_profile(ctx);
  record_profile(ctx, prof);
  if (!prof.tail_constant) throw NumericalError("profile has no tail constant");
  const auto s = evolve::exact_selfsimilar(prof, 1.0, 1.0 - c.tau_final, evolve::uniform_ball_grid(c.R, c.M));
  const auto est = verify::final_profile(s, nonlinearity(c), 1.0, c.x_lo, c.x_hi, *prof.tail_constant, c.tol_prof);
  if (!est.samples.x.empty()) window_csv(ctx, "window.csv", est.samples);
  ctx.verdict(est.report);
}

inline void verify_theorem4(Context& ctx) {
  const auto& c = ctx.c;
  const double L = singular_power_amplitude(c.p, c.N);
  const double m = 2.0 / (c.p - 1.0);
  const auto field = verify::synthetic_state([&](double x) { return L * std::pow(x, -m); }, c.N, c.R, c.M);
  const auto est = verify::final_profile(field, Nonlinearity::power(c.p), c.tau_final, c.x_lo, c.x_hi, L, c.tol_prof);
  if (!est.samples.x.empty()) window_csv(ctx, "window.csv", est.samples);
  ctx.summary["L"] = L;
  ctx.verdict(est.report);
}

inline void verify_loglog(Context& ctx) {
  const auto& c = ctx.c;
  const auto syn = verify::synthetic_state(
      [](double x) { return -2.0 * std::log(x) - std::log(std::fabs(std::log(x))) + 3.0; }, c.N, c.R, c.M);
  auto est = verify::loglog_profile_check(syn, c.tau_final, c.x_lo, c.x_hi, c.tol_prof);
  if (!est.samples_plus.x.empty()) {
    ctx.csv("loglog_synthetic.csv", {"x", "g_plus", "g_minus"},
            {est.samples_plus.x, est.samples_plus.g, est.samples_minus.g});
  }
  est.report.check_name = "loglog_profile_synthetic";
  ctx.verdict(est.report);
  if (c.source != "run") return;
  if (c.nonlinearity != "exponential") throw InvalidParameter("source=run supports the exponential nonlinearity");
  const auto g = generic_run(ctx);
  require_reliable_fit(g);
  const auto trend = verify::loglog_trend(g.run.final_state, g.fit.T, c.a0, c.halvings);
  ctx.csv("loglog_trend.csv", {"window_start", "oscillation_plus", "oscillation_minus"},
          {trend.window_starts, trend.oscillation_plus, trend.oscillation_minus});
  ctx.verdict(trend.report);
}

inline void verify_classify(Context& ctx) {
  const auto& c = ctx.c;
  const double pS = c.N > 2 ? (c.N + 2.0) / (c.N - 2.0) : INFINITY;
  if (!(c.p > pS)) {
    VerificationReport rep;
    rep.check_name = "matano_merle_classification";
    rep.parameters = {{"p", c.p}, {"N", double(c.N)}};
    rep.verdict = Verdict::Inapplicable;
    rep.note("classification requires p above the Sobolev exponent (N+2)/(N-2)");
    ctx.verdict(rep);
    return;
  }
  const double L = singular_power_amplitude(c.p, c.N);
  const double m = 2.0 / (c.p - 1.0);
  struct Row {
    const char* name;
    std::function<double(double)> u;
    verify::MMClass expected;
  };
  const std::vector<Row> rows{{"nonconstant", [&](double x) { return 2.0 * L * std::pow(x, -m); },
                               verify::MMClass::NonconstantProfile},
                              {"type_II", [&](double x) { return L * std::pow(x, -m); }, verify::MMClass::TypeII},
                              {"no_blowup", [](double) { return 1.0; }, verify::MMClass::NoBlowup}};
  std::vector<double> ell, osc;
  for (const auto& row : rows) {
    const auto field = verify::synthetic_state(row.u, c.N, c.R, c.M);
    auto res = verify::mm_classify(field, c.p, c.N, c.tau_final, c.x_lo, c.x_hi);
    auto rep = res.report;
    rep.check_name = std::string("matano_merle_") + row.name;
    rep.labels["expected"] = verify::to_string(row.expected);
    if (rep.verdict == Verdict::Pass) rep.verdict = res.label == row.expected ? Verdict::Pass : Verdict::Fail;
    ell.push_back(res.ell);
    osc.push_back(res.oscillation);
    ctx.verdict(rep);
  }
  ctx.csv("classification.csv", {"row", "ell", "oscillation"}, {{0.0, 1.0, 2.0}, ell, osc});
}

inline void verify_refined(Context& ctx) {
  const auto& c = ctx.c;
  const double c_true = 0.25;
  std::vector<evolve::EvolutionState> syn;
  for (double tau : {1e-4, 1e-5, 1e-6}) {
    const double lam = refined_scale_tau(tau, 2);
    syn.push_back(verify::synthetic_state(
        [&](double r) { return -std::log(tau) - std::log1p(c_true * (r / lam) * (r / lam)); }, c.N, c.R, c.M,
        1.0 - tau));
  }
  verify::RefinedFitOptions o;
  o.tol_fit = c.tol_fit;
  const auto fit = verify::refined_profile_fit(syn, 1.0, 0.0, 3.0, o);
  auto rep = fit.report;
  rep.check_name = "refined_fit_synthetic";
  rep.measured["c_error"] = std::fabs(fit.c_est - c_true);
  rep.tolerances["c_error"] = 1e-6;
  if (rep.verdict == Verdict::Pass && (fit.m_est != 2 || !(std::fabs(fit.c_est - c_true) <= 1e-6))) {
    rep.verdict = Verdict::Fail;
  }
  ctx.verdict(rep);
  if (c.source != "run") return;
  if (c.nonlinearity != "exponential") throw InvalidParameter("source=run supports the exponential nonlinearity");
  const auto g = generic_run(ctx, generic_levels());
  require_reliable_fit(g);
  if (g.run.snapshots.size() < 3) throw NumericalError("generic run produced fewer than three snapshots");
  const std::vector<evolve::EvolutionState> late(g.run.snapshots.end() - 3, g.run.snapshots.end());
  const auto gf = verify::refined_profile_fit(late, g.fit.T, 0.0, 2.0, o);
  ctx.summary["generic_fit"] = to_json(gf.report);
  ctx.csv("refined_generic.csv", {"m", "residual", "c"},
          {{o.candidates.begin(), o.candidates.end()}, gf.residuals, gf.coefficients});
  VerificationReport shape;
  shape.check_name = "refined_fit_generic_shape";
  shape.parameters = {{"T", g.fit.T}};
  shape.measured = {{"m_est", double(gf.m_est)}, {"c_est", gf.c_est}, {"residual", gf.residual}};
  shape.lhs = gf.residual;
  shape.verdict = gf.m_est == 2 && gf.c_est > 0.0 ? Verdict::Pass : Verdict::Fail;
  shape.note("passes when the quadratic candidate wins with c > 0; the residual is reported only");
  ctx.verdict(shape);
}

}  // namespace detail

// -- suites --------------------------------------------------------------------

struct SuiteSummary {
  std::vector<acceptance::CriterionResult> results;
  bool all_passed = true;
};

/// Runs the acceptance battery of a named suite, printing one line per criterion to `out`.
/// A crashing criterion is recorded as a failure and the suite continues.
inline SuiteSummary run_suite(const std::string& name, int threads, std::ostream& out) {
  const auto& names = known_suites();
  if (std::find(names.begin(), names.end(), name) == names.end()) throw ConfigError("unknown suite: " + name);
  SuiteSummary s;
  s.results = acceptance::run_criteria(acceptance::suite_criteria(name), threads,
                                       [&](const auto& r) { out << acceptance::format_line(r) << '\n' << std::flush; });
  if (name == "all") {
    s.results.push_back(acceptance::determinism(s.results, threads));
    out << acceptance::format_line(s.results.back()) << '\n';
  }
  std::size_t passed = 0;
  for (const auto& r : s.results) passed += r.passed ? 1 : 0;
  s.all_passed = passed == s.results.size();
  out << passed << "/" << s.results.size() << " criteria passed\n";
  return s;
}

namespace detail {

inline std::ostream*& suite_stream() {
  static std::ostream* out = nullptr;
  return out;
}

inline void suite(Context& ctx) {
  std::ostringstream sink;
  std::ostream& out = suite_stream() ? *suite_stream() : sink;
  const auto s = run_suite(ctx.c.suite, ctx.c.threads, out);
  std::ofstream table(ctx.dir / "verdict_table.csv");
  if (!table) throw OutputError("output not writable");
  for (const auto& r : s.results) {
    table << r.table_row() << '\n';
    VerificationReport rep;
    rep.check_name = "criterion_" + std::to_string(r.id);
    rep.labels["title"] = r.title;
    rep.measured = r.measured;
    rep.verdict = r.passed ? Verdict::Pass : Verdict::Fail;
    if (!r.error.empty()) rep.note(r.error);
    ctx.verdict(rep);
  }
  ctx.artifacts.push_back("verdict_table.csv");
}

inline const std::map<std::string, std::function<void(Context&)>>& dispatch_table() {
  static const std::map<std::string, std::function<void(Context&)>> t{
      {"profile.shoot", profile_shoot},       {"profile.scan", profile_scan},
      {"profile.singular", profile_singular}, {"semigroup.norm", semigroup_norm},
      {"semigroup.mehler", semigroup_mehler}, {"semigroup.check", semigroup_check},
      {"evolve.run", evolve_run},             {"evolve.wframe", evolve_wframe},
      {"verify.convergence", verify_convergence}, {"verify.theorem2", verify_theorem2},
      {"verify.theorem4", verify_theorem4},   {"verify.loglog", verify_loglog},
      {"verify.classify", verify_classify},   {"verify.refined", verify_refined},
      {"suite", suite}};
  return t;
}

}  // namespace detail

/// Sets the stream that suite runs print their per-criterion lines to; null silences them.
inline void set_suite_stream(std::ostream* out) { detail::suite_stream() = out; }

/// Dispatches the configured command, writes its artifacts, `config.ini`, `reports.json` and
/// `manifest.json` into the output directory, and returns the exit code. Errors are reported as JSON in
/// the outcome and, when the directory is writable, in `error.json`.
inline ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  ExperimentOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  try {
    validate(config);
  } catch (const ConfigError& e) {
    outcome.exit_code = kExitUsage;
    outcome.error = error_json("usage", e.what(), kExitUsage);
    return outcome;
  }
  outcome.output_dir = resolve_output_dir(config);
  try {
    ensure_writable(outcome.output_dir);
  } catch (const OutputError& e) {
    outcome.exit_code = kExitRuntime;
    outcome.error = error_json("output", e.what(), kExitRuntime);
    outcome.error["path"] = outcome.output_dir.string();
    return outcome;
  }
  std::error_code ignored;
  std::filesystem::remove(outcome.output_dir / "error.json", ignored);
  detail::Context ctx{config, outcome.output_dir};
  try {
    detail::dispatch_table().at(config.command)(ctx);
    bool all_pass = true;
    for (const auto& r : ctx.reports) all_pass = all_pass && r.passed();
    outcome.exit_code = all_pass ? kExitPass : kExitFail;
  } catch (const ConfigError& e) {
    outcome.exit_code = kExitUsage;
    outcome.error = error_json("usage", e.what(), kExitUsage);
  } catch (const InvalidParameter& e) {
    outcome.exit_code = kExitUsage;
    outcome.error = error_json("invalid_parameter", e.what(), kExitUsage);
  } catch (const OutputError& e) {
    outcome.exit_code = kExitRuntime;
    outcome.error = error_json("output", e.what(), kExitRuntime);
  } catch (const std::exception& e) {
    outcome.exit_code = kExitRuntime;
    outcome.error = error_json("runtime", e.what(), kExitRuntime);
  }
  outcome.verifying = ctx.verifying;
  outcome.reports = ctx.reports;
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    {
      std::ofstream cfg(outcome.output_dir / "config.ini");
      if (!cfg) throw OutputError("output not writable");
      cfg << serialize(config);
    }
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : ctx.reports) reports.push_back(to_json(r));
    write_json(outcome.output_dir / "reports.json", reports);
    if (!outcome.error.is_null()) write_json(outcome.output_dir / "error.json", outcome.error);
    nlohmann::json manifest{{"command", config.command},
                            {"config", serialize(config)},
                            {"config_file", "config.ini"},
                            {"rerun", "blowup run --config config.ini"},
                            {"seed", config.seed},
                            {"versions", version_info()},
                            {"wall_time_seconds", wall},
                            {"verifying", ctx.verifying},
                            {"verdicts", verdict_table(ctx.reports)},
                            {"summary", ctx.summary},
                            {"artifacts", ctx.artifacts},
                            {"exit_code", outcome.exit_code}};
    if (!outcome.error.is_null()) manifest["error"] = outcome.error;
    write_json(outcome.output_dir / "manifest.json", manifest);
  } catch (const std::exception& e) {
    outcome.exit_code = kExitRuntime;
    outcome.error = error_json("output", "output not writable", kExitRuntime);
  }
  return outcome;
}

}  // namespace blowup::harness

#endif  // BLOWUP_EXPERIMENT_HPP
