#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "blowup/evolve.hpp"

using namespace blowup;
using namespace blowup::evolve;

namespace {

const Nonlinearity kExp = Nonlinearity::exponential();

const profile::RadialProfile& n3_profile() {
  static const auto prof = profile::scan_alphas(kExp, 3, 0.0, 20.0, 200).candidates.at(0).profile;
  return prof;
}

const profile::RadialProfile& n6_profile() {
  static const auto prof = profile::scan_alphas(kExp, 6, 0.0, 20.0, 200).candidates.at(0).profile;
  return prof;
}

const RunResult& generic_run(int M = 2048) {
  static std::map<int, RunResult> cache;
  auto it = cache.find(M);
  if (it == cache.end()) {
    auto s0 = initial_state([](double r) { return 8.0 * (1.0 - r * r); }, 3, 1.0, M);
    it = cache.emplace(M, run_until_blowup(s0, kExp)).first;
  }
  return it->second;
}

double max_error_vs_exact(const EvolutionState& s, const profile::RadialProfile& prof, double T) {
  const auto ex = exact_selfsimilar(prof, T, s.t, s.grid);
  double err = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i) err = std::max(err, std::fabs(s.u[i] - ex.u[i]));
  return err;
}

/// Advances the exact self-similar state from T - t = 1e-2 over 1e-4 with exact Dirichlet data at R = 1.
double manufactured_error(int M, double dt) {
  const auto& prof = n3_profile();
  const double T = 1.0;
  auto s = exact_selfsimilar(prof, T, T - 1e-2, uniform_ball_grid(1.0, M));
  StepOptions o;
  o.dt_fixed = dt;
  o.boundary = [&](double t) { return selfsimilar_value(prof, T, t, 1.0); };
  const long n = std::lround(1e-4 / dt);
  for (long k = 0; k < n; ++k) s = step(s, kExp, o);
  return max_error_vs_exact(s, prof, T);
}

double deviation(const WFrameResult& r, const std::vector<double>& w, const profile::RadialProfile& prof, double y_max) {
  double d = 0.0;
  for (std::size_t i = 0; i < r.grid.size() && r.grid[i] <= y_max; ++i) {
    d = std::max(d, std::fabs(w[i] - prof.value(r.grid[i])));
  }
  return d;
}

}  // namespace

TEST(Step, HeatOnlyNeverIncreasesSupNorm) {
  auto s = initial_state([](double r) { return 3.0 * std::cos(0.5 * kPi * r); }, 3, 1.0, 256);
  StepOptions o;
  o.reaction = false;
  for (int k = 0; k < 200; ++k) {
    const double before = s.sup_norm();
    s = step(s, kExp, o);
    EXPECT_LE(s.sup_norm(), before + 1e-14);
    EXPECT_EQ(s.u.back(), 0.0);
  }
}

TEST(Step, DirichletBoundaryFunctionIsExact) {
  auto s = initial_state([](double r) { return 1.0 - r * r; }, 2, 1.0, 128);
  StepOptions o;
  o.dt_fixed = 1e-4;
  o.boundary = [](double t) { return std::sin(t); };
  for (int k = 0; k < 10; ++k) {
    s = step(s, kExp, o);
    EXPECT_EQ(s.u.back(), std::sin(s.t));
  }
}

TEST(Step, ReactionLimitedStep) {
  auto s = initial_state([](double r) { return 8.0 * (1.0 - r * r); }, 3, 1.0, 64);
  EXPECT_NEAR(reaction_step(s, kExp, {}), 0.1 * std::exp(-8.0), 1e-15);
  auto small = initial_state([](double) { return 0.0; }, 3, 1.0, 64);
  EXPECT_EQ(reaction_step(small, kExp, {}), 1e-3);
}

TEST(Run, GenericBlowupIsTypeOne) {
  const auto& run = generic_run();
  ASSERT_TRUE(run.blew_up());
  EXPECT_TRUE(run.trace.min_principle_ok);
  const auto fit = fit_blowup(run.trace, kExp);
  ASSERT_TRUE(fit.reliable) << fit.diagnostic;
  EXPECT_GE(fit.r_squared, 0.999);
  EXPECT_GE(fit.samples, 20);
  EXPECT_NEAR(fit.T, 3.58309712e-4, 1e-11);
  EXPECT_LT(fit.T - run.final_state.t, 1e-8);
}

TEST(Run, GridDoublingMovesBlowupTimeLittle) {
  const double T1 = fit_blowup(generic_run(2048).trace, kExp).T;
  const double T2 = fit_blowup(generic_run(4096).trace, kExp).T;
  EXPECT_LT(std::fabs(T1 - T2) / T2, 1e-2);
}

TEST(Run, GradientBoundMarginWithinSlack) {
  const auto& tr = generic_run().trace;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double slack = 1e-2 * std::sqrt(2.0) * std::exp(0.5 * tr.sup_norms[i]);
    EXPECT_GE(tr.grad_bound_margins[i], -slack) << "step " << i;
  }
}

TEST(Run, ZeroDataHitsTimeCap) {
  auto s = initial_state([](double) { return 0.0; }, 3, 1.0, 128);
  RunOptions o;
  o.t_max = 0.05;
  const auto run = run_until_blowup(s, kExp, o);
  EXPECT_EQ(run.trace.stop_reason, StopReason::TimeCap);
  EXPECT_EQ(run.trace.diagnostic, "no blow-up detected");
  EXPECT_FALSE(run.blew_up());
}

TEST(Run, PowerBlowupFit) {
  const auto pw = Nonlinearity::power(3.0);
  auto s = initial_state([](double r) { return 6.0 * (1.0 - r * r); }, 3, 1.0, 1024);
  const auto run = run_until_blowup(s, pw);
  ASSERT_TRUE(run.blew_up());
  const auto fit = fit_blowup(run.trace, pw);
  EXPECT_TRUE(fit.reliable) << fit.diagnostic;
  EXPECT_GE(fit.r_squared, 0.999);
  EXPECT_TRUE(std::isnan(run.trace.grad_bound_margins.front()));
}

TEST(Run, RejectsNonvanishingBoundaryData) {
  auto s = initial_state([](double) { return 1.0; }, 3, 1.0, 64);
  EXPECT_THROW(run_until_blowup(s, kExp), InvalidParameter);
}

TEST(Fit, ExactTypeOneTrace) {
  std::vector<double> t, u;
  for (int k = 0; k <= 300; ++k) {
    const double tau = std::pow(10.0, -1.0 - 6.0 * k / 300.0);
    t.push_back(1.0 - tau);
    u.push_back(-std::log(tau));
  }
  const auto fit = fit_blowup(t, u, kExp);
  ASSERT_TRUE(fit.reliable);
  EXPECT_NEAR(fit.T, 1.0, 1e-10);
  EXPECT_NEAR(fit.slope, -1.0, 1e-10);
  EXPECT_NEAR(fit.C1, 0.0, 1e-8);
  EXPECT_NEAR(fit.C2, 0.0, 1e-8);
}

TEST(Fit, ExactSelfSimilarTraceRecoversT) {
  const double alpha = n3_profile().alpha;
  std::vector<double> t, u;
  for (int k = 0; k <= 200; ++k) {
    const double tau = std::pow(10.0, -1.0 - 7.0 * k / 200.0);
    t.push_back(1.0 - tau);
    u.push_back(-std::log(tau) + alpha);
  }
  const auto fit = fit_blowup(t, u, kExp);
  ASSERT_TRUE(fit.reliable);
  EXPECT_LT(std::fabs(fit.T - 1.0), 1e-8);
  EXPECT_NEAR(fit.slope, -std::exp(-alpha), 1e-12);
}

TEST(Fit, BoundedTraceIsUnreliable) {
  std::vector<double> t, u;
  for (int k = 0; k < 100; ++k) t.push_back(0.01 * k), u.push_back(1.0 - std::exp(-0.01 * k));
  const auto fit = fit_blowup(t, u, kExp);
  EXPECT_FALSE(fit.reliable);
  EXPECT_NE(fit.diagnostic.find("rate fit unreliable"), std::string::npos);
}

TEST(SelfSimilar, OriginValue) {
  const auto& prof = n3_profile();
  const auto s = exact_selfsimilar(prof, 1.0, 1.0 - 1e-2, uniform_ball_grid(1.0, 64));
  EXPECT_NEAR(s.u[0], -std::log(1e-2) + prof.alpha, 1e-12);
}

TEST(SelfSimilar, PdeResidualSmall) {
  EXPECT_LT(selfsimilar_pde_residual(n3_profile(), 1.0, 1.0 - 1e-2, uniform_ball_grid(1.0, 4096)), 1e-4);
}

TEST(SelfSimilar, GradientBoundHolds) {
  for (double tau : {1e-2, 1e-4}) {
    const auto s = exact_selfsimilar(n3_profile(), 1.0, 1.0 - tau, uniform_ball_grid(1.0, 2048));
    EXPECT_GE(gradient_bound_check(s, kExp), 0.0) << tau;
  }
}

TEST(SelfSimilar, ConstantStateMargin) {
  auto s = initial_state([](double) { return 2.0; }, 3, 1.0, 32);
  EXPECT_NEAR(gradient_bound_check(s, kExp), std::sqrt(2.0) * std::exp(1.0), 1e-14);
}

TEST(SelfSimilar, RejectsPastBlowupTime) {
  EXPECT_THROW(exact_selfsimilar(n3_profile(), 1.0, 1.0, uniform_ball_grid(1.0, 16)), DomainError);
}

TEST(Manufactured, SpatialOrder) {
  double prev = 0.0;
  for (int M : {256, 512, 1024, 2048}) {
    const double err = manufactured_error(M, 1e-8);
    if (prev > 0.0) EXPECT_GE(std::log2(prev / err), 1.9) << M;
    prev = err;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Manufactured, TemporalOrder) {
  double prev = 0.0;
  for (double dt : {5e-6, 2.5e-6, 1.25e-6}) {
    const double err = manufactured_error(16384, dt);
    if (prev > 0.0) EXPECT_GE(std::log2(prev / err), 0.9) << dt;
    prev = err;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(WFrame, ZeroStaysZero) {
  const auto r = w_frame_evolve([](double) { return 0.0; }, kExp, 3, 10.0, 1.0, 0.0);
  ASSERT_TRUE(r.bounded);
  for (double v : r.snapshots.back().w) EXPECT_EQ(v, 0.0);
}

TEST(WFrame, ProfileIsStationary) {
  const auto& prof = n6_profile();
  const double Y = 10.0;
  WFrameOptions o;
  o.snapshot_times = {0.25, 0.5, 0.75};
  const auto r = w_frame_evolve([&](double y) { return prof.value(y); }, kExp, 6, Y, 1.0, prof.value(Y), o);
  ASSERT_TRUE(r.bounded) << r.diagnostic;
  ASSERT_EQ(r.snapshots.size(), 4u);
  EXPECT_NEAR(r.snapshots.back().s, 1.0, 1e-12);
  for (const auto& sn : r.snapshots) EXPECT_LT(deviation(r, sn.w, prof, Y / 2), 1e-3) << sn.s;
}

TEST(WFrame, PerturbedProfileStaysBounded) {
  const auto& prof = n6_profile();
  const double Y = 10.0;
  auto w0 = [&](double y) { return prof.value(y) + 0.01 * std::exp(-y * y); };
  auto deviations = [&](double ds_max) {
    WFrameOptions o;
    o.ds_max = ds_max;
    for (int k = 1; k < 10; ++k) o.snapshot_times.push_back(0.05 * k);
    const auto r = w_frame_evolve(w0, kExp, 6, Y, 0.5, prof.value(Y), o);
    EXPECT_TRUE(r.bounded) << r.diagnostic;
    std::vector<double> d;
    for (const auto& sn : r.snapshots) d.push_back(deviation(r, sn.w, prof, Y / 2));
    return d;
  };
  const auto d1 = deviations(1e-3), d2 = deviations(5e-4), d4 = deviations(2.5e-4);
  ASSERT_EQ(d1.size(), 10u);
  double prev = 0.01;
  for (std::size_t k = 0; k < d1.size(); ++k) {
    EXPECT_GT(d1[k], prev) << k;
    EXPECT_LT(d1[k], 4.0 * prev) << k;
    EXPECT_LT(std::fabs(d2[k] - d4[k]), std::fabs(d1[k] - d2[k])) << k;
    if (k + 2 < d1.size()) EXPECT_LT(std::fabs(d1[k] - d2[k]), 0.05 * d2[k]) << k;
    prev = d1[k];
  }
}

TEST(WFrame, Preconditions) {
  EXPECT_THROW(w_frame_evolve([](double) { return 0.0; }, kExp, 3, -1.0, 1.0, 0.0), InvalidParameter);
  EXPECT_THROW(w_frame_evolve([](double) { return 0.0; }, kExp, 3, 1.0, 0.0, 0.0), InvalidParameter);
}
