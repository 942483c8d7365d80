#ifndef BLOWUP_ACCEPTANCE_HPP
#define BLOWUP_ACCEPTANCE_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "blowup/evolve.hpp"
#include "blowup/io.hpp"
#include "blowup/mehler.hpp"
#include "blowup/profile.hpp"
#include "blowup/verify.hpp"

namespace blowup::acceptance {

/// One acceptance criterion. `measured` holds the quantities compared against thresholds; together with
/// `passed` it forms the verdict-table row used for the determinism check.
struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::map<std::string, double> measured;
  std::string error;  // non-empty when the criterion crashed
  double seconds = 0.0;

  /// Verdict-table row: id, verdict and every measured value at full precision. Wall time is excluded.
  std::string table_row() const {
    std::string row = std::to_string(id) + "," + (passed ? "pass" : "fail");
    for (const auto& [k, v] : measured) row += "," + k + "=" + harness::format_number(v);
    if (!error.empty()) row += ",error=" + error;
    return row;
  }
};

namespace detail {

inline const Nonlinearity kExp = Nonlinearity::exponential();

struct Recorder {
  CriterionResult& res;
  bool ok = true;

  /// Records `value` under `key` and requires `cond`.
  void check(const std::string& key, double value, bool cond) {
    res.measured[key] = value;
    ok = ok && cond;
  }
};

inline double sup_abs(const std::function<double(double)>& f, double lo, double hi, double step) {
  double w = 0.0;
  for (double x = lo; x <= hi + 1e-12; x += step) w = std::max(w, std::fabs(f(x)));
  return w;
}

inline evolve::RunResult generic_run(int M = 2048, std::vector<double> levels = {}) {
  auto s0 = evolve::initial_state([](double r) { return 8.0 * (1.0 - r * r); }, 3, 1.0, M);
  evolve::RunOptions o;
  o.snapshot_levels = std::move(levels);
  return evolve::run_until_blowup(s0, kExp, o);
}

inline void singular_profiles(Recorder& rec) {
  double res = 0.0, cerr = 0.0;
  auto visit = [&](const Nonlinearity& nl, int N, double expected) {
    const auto s = profile::singular_closed_form(nl, N);
    for (double r = 0.1; r <= 10.0; r *= 1.01) res = std::max(res, std::fabs(s.residual(r)));
    auto prof = profile::singular_profile(nl, N);
    prof.tail_constant.reset();
    const auto c = profile::tail_constant(prof);
    cerr = std::max(cerr, c ? std::fabs(*c - expected) : INFINITY);
  };
  for (int N = 3; N <= 9; ++N) visit(kExp, N, std::log(2.0 * (N - 2.0)));
  for (auto [N, p] : std::vector<std::pair<int, double>>{{5, 3.0}, {4, 5.0}, {6, 3.0}}) {
    visit(Nonlinearity::power(p), N, singular_power_amplitude(p, N));
  }
  rec.check("max_residual", res, res < 1e-10);
  rec.check("max_tail_constant_error", cerr, cerr <= 1e-12);
}

inline void kappa_identities(Recorder& rec) {
  rec.check("kappa_p2", Nonlinearity::power(2.0).kappa(), Nonlinearity::power(2.0).kappa() == 1.0);
  const double k3 = Nonlinearity::power(3.0).kappa();
  rec.check("kappa_p3", k3, std::fabs(k3 - 0.707106781) <= 1e-9);
  double worst = 0.0;
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    const double k = Nonlinearity::power(p).kappa();
    worst = std::max(worst, std::fabs(std::pow(k, p - 1.0) * (p - 1.0) - 1.0));
  }
  rec.check("max_identity_defect", worst, worst <= 1e-12);
}

inline void mehler_engine(Recorder& rec) {
  using namespace semigroup;
  const auto one = WeightedField::constant(1.0, 3);
  double mass = 0.0;
  for (double t : {0.1, 1.0, 10.0}) {
    mass = std::max(mass, sup_abs([&](double y) { return mehler_value(one, t, y) - 1.0; }, 0.0, 4.0, 0.05));
  }
  rec.check("mass_defect", mass, mass < 1e-6);
  const WeightedField y1({0.0, 5.0, 10.0}, {0.0, 5.0, 10.0}, 1, FarField::power_law(-1.0), Parity::Odd);
  double eig = 0.0;
  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    eig = std::max(eig, sup_abs([&](double y) { return mehler_value(y1, t, y) - std::exp(-0.5 * t) * y; }, -4.0,
                                4.0, 0.1));
  }
  rec.check("eigen_decay_error", eig, eig < 1e-6);
  const auto psi = bump_field({{1.0, 0.5, 0.6}, {0.5, 2.0, 0.4}}, 3);
  double law = 0.0;
  for (double t : {0.3, 0.7}) {
    for (double s : {0.3, 0.7}) {
      const auto inner = mehler_apply(psi, s, norm_eval_radii(s, 30.0));
      const auto twice = mehler_apply(inner, t, norm_eval_radii(t + s, 8.0));
      const auto once = mehler_apply(psi, t + s, norm_eval_radii(t + s, 8.0));
      law = std::max(law, weighted_l2_distance(once, twice));
    }
  }
  rec.check("semigroup_law_defect", law, law < 1e-5);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> td(0.05, 5.0);
  double ratio = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto f = bump_field(random_bumps(rng), 1 + i % 4);
    const double t = td(rng);
    ratio = std::max(ratio, weighted_lq(mehler_apply(f, t, norm_eval_radii(t, 8.0))) / weighted_lq(f));
  }
  rec.check("max_contraction_ratio", ratio, ratio <= 1.0 + 1e-8);
}

inline void hermite_regularization(Recorder& rec) {
  const auto start = std::chrono::steady_clock::now();
  const auto rep = semigroup::hermite_sweep({});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rec.check("draws", rep.parameters.at("draws"), rep.parameters.at("draws") >= 1000);
  rec.check("min_margin", rep.margin_or_ratio, rep.margin_or_ratio >= -1e-8);
  rec.check("failures", rep.measured.at("failures"), rep.measured.at("failures") == 0);
  rec.ok = rec.ok && secs < 120.0;
  if (secs >= 120.0) rec.res.error = "runtime budget of 2 minutes exceeded";
}

inline void lambda_semigroup(Recorder& rec) {
  using namespace semigroup;
  const auto psi = bump_field({{1.0, 0.5, 0.6}, {0.5, 2.0, 0.4}}, 3);
  const PotentialField zero(WeightedField::zero(3, 64.0));
  double agree = 0.0, scale = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    LambdaOptions o;
    o.eval_radii = norm_eval_radii(t, 8.0);
    agree = std::max(agree, weighted_l2_distance(lambda_apply(psi, zero, t, o), mehler_apply(psi, t, o.eval_radii)));
  }
  rec.check("zero_potential_agreement", agree, agree < 1e-5);
  for (double t : {0.5, 2.0}) {
    LambdaOptions o;
    o.eval_radii = norm_eval_radii(t, 8.0);
    const auto l = lambda_apply(psi, constant_potential(0.7, 3), t, o);
    scale = std::max(scale, weighted_l2_distance(l, mehler_apply(psi, t, o.eval_radii).scaled(std::exp(0.7 * t))));
  }
  rec.check("constant_potential_scaling", scale, scale < 1e-5);
  std::mt19937_64 rng(3);
  double growth = 0.0;
  for (const auto& phi : {singular_potential(3, 2.0), regularized_potential(3, 1.0), constant_potential(0.5, 3)}) {
    for (double t : {0.5, 2.0}) {
      const auto f = bump_field(random_bumps(rng), 3);
      LambdaOptions o;
      o.eval_radii = norm_eval_radii(t, 8.0);
      growth = std::max(growth, weighted_lq(lambda_apply(f, phi, t, o)) / (std::exp(phi.gamma() * t) * weighted_lq(f)));
    }
  }
  rec.check("growth_ratio", growth, growth <= 1.0 + 1e-6);
  const auto decay = check_potential_decay(singular_potential(3, 2.0), 2.0, 1.0, {2, 3, 4, 5, 6, 7, 8});
  rec.check("potential_decay_rate", decay.measured.at("rate"), decay.measured.at("rate") >= 0.9);
  const auto g = bump_field({{0.5, 0.0, 1.0}}, 3);
  const auto phi = singular_potential(3, 2.0);
  double trend = 0.0;
  for (double xi : {0.5, 1.0, 2.0}) {
    LambdaScenario sc;
    sc.kind = LambdaScenario::Kind::LongTime;
    sc.xi = xi;
    sc.s = 4.0;
    const double base = lambda_ratio(g, phi, sc).ratio;
    for (double s : {6.0, 8.0}) {
      sc.s = s;
      trend = std::max(trend, lambda_ratio(g, phi, sc).ratio / base);
    }
  }
  rec.check("long_time_trend_ratio", trend, trend <= 2.0);
}

inline void profile_scan(Recorder& rec) {
  const auto coarse = profile::scan_alphas(kExp, 3, 0.0, 20.0, 200);
  rec.check("candidates", double(coarse.candidates.size()), !coarse.candidates.empty());
  profile::ScanOptions half;
  half.shoot.tol = 0.5e-10;
  double dc = 0.0;
  for (const auto& c : coarse.candidates) {
    const auto again = profile::refine_candidate(c.scan_lo, c.scan_hi, kExp, 3, half);
    dc = std::max(dc, again ? std::fabs(again->tail_constant - c.tail_constant) : INFINITY);
  }
  rec.check("max_tolerance_halving_dC", dc, dc < 1e-4);
  const auto fine = profile::scan_alphas(kExp, 3, 0.0, 20.0, 400);
  double missing = 0.0;
  for (const auto& c : coarse.candidates) {
    bool found = false;
    for (const auto& f : fine.candidates) found = found || std::fabs(f.alpha - c.alpha) < 1e-6;
    if (!found) missing += 1.0;
  }
  rec.check("candidates_missing_after_refinement", missing, missing == 0.0);
}

inline void evolution_convergence(Recorder& rec) {
  using namespace evolve;
  const auto prof = profile::scan_alphas(kExp, 3, 0.0, 20.0, 200).candidates.at(0).profile;
  auto manufactured = [&](int M, double dt) {
    auto s = exact_selfsimilar(prof, 1.0, 1.0 - 1e-2, uniform_ball_grid(1.0, M));
    StepOptions o;
    o.dt_fixed = dt;
    o.boundary = [&](double t) { return selfsimilar_value(prof, 1.0, t, 1.0); };
    const long n = std::lround(1e-4 / dt);
    for (long k = 0; k < n; ++k) s = step(s, kExp, o);
    const auto ex = exact_selfsimilar(prof, 1.0, s.t, s.grid);
    double err = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) err = std::max(err, std::fabs(s.u[i] - ex.u[i]));
    return err;
  };
  double space = INFINITY, time = INFINITY, prev = 0.0;
  for (int M : {256, 512, 1024, 2048}) {
    const double e = manufactured(M, 1e-8);
    if (prev > 0.0) space = std::min(space, std::log2(prev / e));
    prev = e;
  }
  rec.check("spatial_order", space, space >= 1.9);
  prev = 0.0;
  for (double dt : {5e-6, 2.5e-6, 1.25e-6}) {
    const double e = manufactured(16384, dt);
    if (prev > 0.0) time = std::min(time, std::log2(prev / e));
    prev = e;
  }
  rec.check("temporal_order", time, time >= 0.9);
  std::vector<double> ts, us;
  for (int k = 0; k <= 200; ++k) {
    const double tau = std::pow(10.0, -1.0 - 7.0 * k / 200.0);
    ts.push_back(1.0 - tau);
    us.push_back(-std::log(tau) + prof.alpha);
  }
  const auto exact_fit = fit_blowup(ts, us, kExp);
  rec.check("exact_trace_T_error", std::fabs(exact_fit.T - 1.0), std::fabs(exact_fit.T - 1.0) < 1e-8);
  const auto run = generic_run();
  const auto fit = fit_blowup(run.trace, kExp);
  rec.check("generic_r_squared", fit.r_squared, run.blew_up() && fit.reliable && fit.r_squared >= 0.999);
  double worst = INFINITY;
  for (std::size_t i = 0; i < run.trace.times.size(); ++i) {
    const double slack = 1e-2 * std::sqrt(2.0) * std::exp(0.5 * run.trace.sup_norms[i]);
    worst = std::min(worst, run.trace.grad_bound_margins[i] / slack);
  }
  rec.check("min_gradient_margin_over_slack", worst, worst >= -1.0);
}

inline void final_profile_checks(Recorder& rec) {
  const auto prof = profile::scan_alphas(kExp, 3, 0.0, 20.0, 200).candidates.at(0).profile;
  const auto s = evolve::exact_selfsimilar(prof, 1.0, 1.0 - 1e-8, evolve::uniform_ball_grid(1.0, 2048));
  const auto t2 = verify::final_profile(s, kExp, 1.0, 1e-3, 0.1, *prof.tail_constant);
  rec.check("exponential_C_error", std::fabs(t2.C_est - *prof.tail_constant), std::fabs(t2.C_est - *prof.tail_constant) <= 0.05);
  rec.check("exponential_oscillation", t2.oscillation, t2.oscillation <= 0.05);
  const double L = singular_power_amplitude(3.0, 5);
  const auto field = verify::synthetic_state([&](double x) { return L / x; }, 5, 1.0, 2048);
  const auto t4 = verify::final_profile(field, Nonlinearity::power(3.0), 1e-12, 1e-3, 0.1, L);
  rec.check("power_oscillation", t4.oscillation, t4.oscillation <= 1e-12);
  rec.check("power_C_error", std::fabs(t4.C_est - L), std::fabs(t4.C_est - L) <= 1e-12);
}

inline void loglog_branch(Recorder& rec) {
  const auto syn = verify::synthetic_state(
      [](double x) { return -2.0 * std::log(x) - std::log(std::fabs(std::log(x))) + 3.0; }, 3, 1.0, 2048);
  const auto est = verify::loglog_profile_check(syn, 1e-12, 1e-3, 0.1);
  rec.check("synthetic_C_error", std::fabs(est.C_est() - 3.0), std::fabs(est.C_est() - 3.0) <= 1e-12);
  const auto run = generic_run();
  const auto fit = evolve::fit_blowup(run.trace, kExp);
  const auto trend = verify::loglog_trend(run.final_state, fit.T, 0.04, 3);
  rec.check("trend_final_over_initial_oscillation", trend.report.margin_or_ratio, trend.report.passed());
  rec.check("fitting_convention_minus", trend.best == verify::LogLogSign::Minus ? 1.0 : 0.0, true);
}

inline void wframe_stationarity(Recorder& rec) {
  const auto prof = profile::scan_alphas(kExp, 6, 0.0, 20.0, 200).candidates.at(0).profile;
  const double Y = 10.0;
  const auto r = evolve::w_frame_evolve([&](double y) { return prof.value(y); }, kExp, 6, Y, 1.0, prof.value(Y));
  double d = INFINITY;
  if (r.bounded) {
    d = 0.0;
    const auto& w = r.snapshots.back().w;
    for (std::size_t i = 0; i < r.grid.size() && r.grid[i] <= Y / 2; ++i) {
      d = std::max(d, std::fabs(w[i] - prof.value(r.grid[i])));
    }
  }
  rec.check("alpha", prof.alpha, true);
  rec.check("sup_deviation", d, d < 1e-3);
}

inline void matano_merle(Recorder& rec) {
  const double L = singular_power_amplitude(3.0, 5);
  struct Row {
    const char* key;
    std::function<double(double)> u;
    verify::MMClass expected;
  };
  const std::vector<Row> rows{{"row_nonconstant", [&](double x) { return 2.0 * L / x; }, verify::MMClass::NonconstantProfile},
                              {"row_type_II", [&](double x) { return L / x; }, verify::MMClass::TypeII},
                              {"row_no_blowup", [](double) { return 1.0; }, verify::MMClass::NoBlowup}};
  for (const auto& row : rows) {
    const auto res = verify::mm_classify(verify::synthetic_state(row.u, 5, 1.0, 2048), 3.0, 5, 1e-12, 1e-3, 0.1);
    rec.check(row.key, res.ell, res.label && *res.label == row.expected);
  }
}

}  // namespace detail

struct CriterionSpec {
  int id;
  const char* title;
  void (*body)(detail::Recorder&);
};

inline const std::vector<CriterionSpec>& criteria() {
  static const std::vector<CriterionSpec> c{
      {1, "singular-profile residuals and tail constants", detail::singular_profiles},
      {2, "kappa identities", detail::kappa_identities},
      {3, "Mehler engine", detail::mehler_engine},
      {4, "Hermite regularization sweep", detail::hermite_regularization},
      {5, "Lambda semigroup", detail::lambda_semigroup},
      {6, "profile scan", detail::profile_scan},
      {7, "evolution convergence", detail::evolution_convergence},
      {8, "final-profile desk checks", detail::final_profile_checks},
      {9, "log-log branch", detail::loglog_branch},
      {10, "w-frame stationarity", detail::wframe_stationarity},
      {11, "Matano-Merle classifier", detail::matano_merle},
  };
  return c;
}

inline constexpr int kDeterminismId = 12;

inline CriterionResult run_criterion(int id) {
  CriterionResult res;
  res.id = id;
  const auto start = std::chrono::steady_clock::now();
  const auto& all = criteria();
  const auto it = std::find_if(all.begin(), all.end(), [&](const auto& c) { return c.id == id; });
  if (it == all.end()) throw InvalidParameter("unknown criterion " + std::to_string(id));
  res.title = it->title;
  detail::Recorder rec{res};
  try {
    it->body(rec);
    res.passed = rec.ok;
  } catch (const std::exception& e) {
    res.passed = false;
    res.error = e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

/// Criteria of a named suite; "all" also carries the determinism criterion.
inline std::vector<int> suite_criteria(const std::string& name) {
  if (name == "semigroup") return {3, 4, 5};
  if (name == "profiles") return {1, 2, 6};
  if (name == "evolution") return {7, 10};
  if (name == "theorems") return {8, 9, 11};
  if (name == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  throw InvalidParameter("unknown suite: " + name);
}

/// Runs the criteria on up to `threads` workers; results come back in the order of `ids`.
inline std::vector<CriterionResult> run_criteria(const std::vector<int>& ids, int threads = 1,
                                                 const std::function<void(const CriterionResult&)>& on_done = {}) {
  std::vector<CriterionResult> out(ids.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out[i] = run_criterion(ids[i]);
      if (on_done) on_done(out[i]);
    }
    return out;
  }
  std::size_t next = 0;
  while (next < ids.size()) {
    std::vector<std::future<CriterionResult>> batch;
    const std::size_t first = next;
    for (int w = 0; w < threads && next < ids.size(); ++w, ++next) {
      batch.push_back(std::async(std::launch::async, run_criterion, ids[next]));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) {
      out[first + k] = batch[k].get();
      if (on_done) on_done(out[first + k]);
    }
  }
  return out;
}

/// Determinism criterion: reruns the criteria of `first` and compares verdict tables row by row.
inline CriterionResult determinism(const std::vector<CriterionResult>& first, int threads = 1) {
  CriterionResult res;
  res.id = kDeterminismId;
  res.title = "determinism of the verdict table";
  const auto start = std::chrono::steady_clock::now();
  std::vector<int> ids;
  for (const auto& r : first) ids.push_back(r.id);
  const auto second = run_criteria(ids, threads);
  double mismatches = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].table_row() != second[i].table_row()) mismatches += 1.0;
  }
  res.measured["rows"] = static_cast<double>(first.size());
  res.measured["mismatched_rows"] = mismatches;
  res.passed = mismatches == 0.0;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

inline std::string format_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-48s", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str());
  std::string line = head;
  for (const auto& [k, v] : r.measured) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " %s=%.6g", k.c_str(), v);
    line += buf;
  }
  char tail[32];
  std::snprintf(tail, sizeof tail, " (%.1f s)", r.seconds);
  line += tail;
  if (!r.error.empty()) line += " error: " + r.error;
  return line;
}

}  // namespace blowup::acceptance

#endif  // BLOWUP_ACCEPTANCE_HPP
