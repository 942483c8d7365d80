#include <gtest/gtest.h>

#include <cmath>

#include "blowup/verify.hpp"

using namespace blowup;
using namespace blowup::evolve;
using namespace blowup::verify;

namespace {

const Nonlinearity kExp = Nonlinearity::exponential();

const profile::ScanResult& n3_scan() {
  static const auto scan = profile::scan_alphas(kExp, 3, 0.0, 20.0, 200);
  return scan;
}

const profile::RadialProfile& n3_profile() { return n3_scan().candidates.at(0).profile; }

std::vector<EvolutionState> exact_snapshots(const profile::RadialProfile& prof) {
  std::vector<EvolutionState> out;
  for (double tau : {1e-3, 1e-4, 1e-5, 1e-6}) {
    out.push_back(exact_selfsimilar(prof, 1.0, 1.0 - tau, uniform_ball_grid(1.0, 2048)));
  }
  return out;
}

struct GenericRun {
  RunResult run;
  BlowupFit fit;
};

const GenericRun& generic_run() {
  static const GenericRun g = [] {
    auto s0 = initial_state([](double r) { return 8.0 * (1.0 - r * r); }, 3, 1.0, 16384);
    RunOptions o;
    o.snapshot_levels = {9, 10, 11, 12, 13, 14, 15, 16};
    GenericRun out{run_until_blowup(s0, kExp, o), {}};
    out.fit = fit_blowup(out.run.trace, kExp);
    return out;
  }();
  return g;
}

/// Snapshots u(r, t) = -log τ + v(r / λ_m(τ)) with v = -log(1 + c ξ^m).
std::vector<EvolutionState> refined_snapshots(int m, double c) {
  std::vector<EvolutionState> out;
  for (double tau : {1e-4, 1e-5, 1e-6}) {
    const double lam = refined_scale_tau(tau, m);
    out.push_back(synthetic_state(
        [&](double r) { return -std::log(tau) - std::log1p(c * std::pow(r / lam, m)); }, 3, 1.0, 8192, 1.0 - tau));
  }
  return out;
}

constexpr double kSyntheticT = 1e-12;  // synthetic final states sit at t = 0 just before T

}  // namespace

TEST(SimilarityConvergence, ExactFamilyConverges) {
  const auto rep = similarity_convergence(exact_snapshots(n3_profile()), n3_profile(), 1.0, 5.0);
  EXPECT_EQ(rep.verdict, Verdict::Pass);
  EXPECT_LT(rep.measured.at("d_max"), 1e-6);
}

TEST(SimilarityConvergence, EveryScannedProfileConverges) {
  for (const auto& c : n3_scan().candidates) {
    const auto rep = similarity_convergence(exact_snapshots(c.profile), c.profile, 1.0, 5.0);
    EXPECT_EQ(rep.verdict, Verdict::Pass) << c.alpha;
  }
}

TEST(SimilarityConvergence, MismatchedProfileFails) {
  const auto& a = n3_scan().candidates.at(0).profile;
  const auto& b = n3_scan().candidates.at(1).profile;
  const auto rep = similarity_convergence(exact_snapshots(a), b, 1.0, 5.0);
  EXPECT_EQ(rep.verdict, Verdict::Fail);
  double gap = 0.0;
  for (double y = 0.0; y <= 5.0; y += 1e-3) gap = std::max(gap, std::fabs(a.value(y) - b.value(y)));
  EXPECT_NEAR(rep.measured.at("d_final"), gap, 1e-2 * gap);
}

TEST(SimilarityConvergence, GenericRunTrendsToConstantProfile) {
  const auto& g = generic_run();
  ASSERT_TRUE(g.fit.reliable);
  ASSERT_EQ(g.run.snapshots.size(), 8u);
  const auto zero = profile::shoot_profile(0.0, kExp, 3);
  ConvergenceOptions o;
  o.trend_only = true;
  const auto rep = similarity_convergence(g.run.snapshots, zero, g.fit.T, 1.0, o);
  EXPECT_EQ(rep.verdict, Verdict::Pass);
  EXPECT_EQ(rep.measured.at("decreasing"), 1.0);
  EXPECT_LT(rep.measured.at("d_final"), 0.07);
}

TEST(SimilarityConvergence, CoarseSnapshotsAreInconclusive) {
  std::vector<EvolutionState> snaps;
  for (double tau : {1e-8, 1e-9, 1e-10}) {
    snaps.push_back(exact_selfsimilar(n3_profile(), 1.0, 1.0 - tau, uniform_ball_grid(1.0, 256)));
  }
  EXPECT_EQ(similarity_convergence(snaps, n3_profile(), 1.0, 1.0).verdict, Verdict::Inconclusive);
}

TEST(FinalProfile, ExponentialProfileOnExactFamily) {
  const auto& prof = n3_profile();
  const auto s = exact_selfsimilar(prof, 1.0, 1.0 - 1e-8, uniform_ball_grid(1.0, 2048));
  const auto est = final_profile(s, kExp, 1.0, 1e-3, 0.1, *prof.tail_constant);
  EXPECT_EQ(est.report.verdict, Verdict::Pass);
  EXPECT_LE(std::fabs(est.C_est - *prof.tail_constant), 0.05);
  EXPECT_LE(est.oscillation, 0.05);
  EXPECT_EQ(est.samples.x.size(), est.samples.g.size());
}

TEST(FinalProfile, PowerProfileOnSyntheticField) {
  const auto pw = Nonlinearity::power(3.0);
  const double L = singular_power_amplitude(3.0, 5);
  const auto s = synthetic_state([&](double x) { return L / x; }, 5, 1.0, 2048);
  const auto est = final_profile(s, pw, kSyntheticT, 1e-3, 0.1, L);
  EXPECT_EQ(est.report.verdict, Verdict::Pass);
  EXPECT_NEAR(est.C_est, std::sqrt(2.0), 1e-12);
  EXPECT_LT(est.oscillation, 1e-12);
}

TEST(FinalProfile, LogLogFieldFailsPlainLogWindow) {
  const auto s = synthetic_state([](double x) { return -2.0 * std::log(x) + std::log(std::fabs(std::log(x))) + 5.0; },
                                 3, 1.0, 2048);
  const auto est = final_profile(s, kExp, kSyntheticT, 1e-3, 0.1);
  EXPECT_EQ(est.report.verdict, Verdict::Fail);
  EXPECT_GT(est.oscillation, 1.0);
}

TEST(FinalProfile, WindowPolicy) {
  const auto s = exact_selfsimilar(n3_profile(), 1.0, 1.0 - 1e-8, uniform_ball_grid(1.0, 2048));
  EXPECT_EQ(final_profile(s, kExp, 1.0, 5e-4, 0.1).report.verdict, Verdict::Inapplicable);
  EXPECT_EQ(final_profile(s, kExp, 1.0, 1e-3, 0.2).report.verdict, Verdict::Inapplicable);
  EXPECT_EQ(final_profile(s, kExp, 1.0, 0.1, 0.01).report.verdict, Verdict::Inapplicable);
}

TEST(LogLog, SyntheticInverseRecoversConstant) {
  const auto s = synthetic_state([](double x) { return -2.0 * std::log(x) - std::log(std::fabs(std::log(x))) + 3.0; },
                                 3, 1.0, 2048);
  const auto est = loglog_profile_check(s, kSyntheticT, 1e-3, 0.1);
  EXPECT_EQ(est.report.verdict, Verdict::Pass);
  EXPECT_EQ(est.best, LogLogSign::Plus);
  EXPECT_NEAR(est.C_est(), 3.0, 1e-12);
  EXPECT_LT(est.oscillation(), 1e-12);
}

TEST(LogLog, OtherSignConventionIsRecognized) {
  const auto s = synthetic_state([](double x) { return -2.0 * std::log(x) + std::log(std::fabs(std::log(x))) + 1.5; },
                                 3, 1.0, 2048);
  const auto est = loglog_profile_check(s, kSyntheticT, 1e-3, 0.1);
  EXPECT_EQ(est.best, LogLogSign::Minus);
  EXPECT_NEAR(est.C_minus, 1.5, 1e-12);
  EXPECT_EQ(est.report.labels.at("fitting_convention"), "u+2log|x|-log|log|x||");
}

TEST(LogLog, ExactNonconstantProfileFails) {
  const auto s = exact_selfsimilar(n3_profile(), 1.0, 1.0 - 1e-8, uniform_ball_grid(1.0, 2048));
  EXPECT_EQ(loglog_profile_check(s, 1.0, 1e-3, 0.1).report.verdict, Verdict::Fail);
}

TEST(LogLog, WindowMustAvoidUnitLog) {
  const auto s = synthetic_state([](double x) { return -2.0 * std::log(x); }, 3, 10.0, 2048);
  EXPECT_EQ(loglog_profile_check(s, kSyntheticT, 0.1, 0.5).report.verdict, Verdict::Inapplicable);
}

TEST(LogLog, GenericRunOscillationTrend) {
  const auto& g = generic_run();
  const auto trend = loglog_trend(g.run.final_state, g.fit.T, 0.04, 3);
  EXPECT_EQ(trend.report.verdict, Verdict::Pass);
  ASSERT_EQ(trend.oscillation_minus.size(), 4u);
  EXPECT_EQ(trend.best, LogLogSign::Minus);
  for (std::size_t k = 1; k < 4; ++k) {
    EXPECT_LT(trend.oscillation_plus[k], trend.oscillation_plus[k - 1]);
    EXPECT_LT(trend.oscillation_minus[k], trend.oscillation_minus[k - 1]);
  }
}

TEST(MatanoMerle, SyntheticTableRows) {
  const double p = 3.0;
  const int N = 5;
  const double L = singular_power_amplitude(p, N);
  auto classify = [&](auto u) {
    return mm_classify(synthetic_state(u, N, 1.0, 2048), p, N, kSyntheticT, 1e-3, 0.1);
  };
  const auto two = classify([&](double x) { return 2.0 * L / x; });
  ASSERT_TRUE(two.label);
  EXPECT_EQ(*two.label, MMClass::NonconstantProfile);
  EXPECT_NEAR(two.ell, 2.0, 1e-12);
  const auto one = classify([&](double x) { return L / x; });
  ASSERT_TRUE(one.label);
  EXPECT_EQ(*one.label, MMClass::TypeII);
  const auto bounded = classify([](double) { return 1.0; });
  ASSERT_TRUE(bounded.label);
  EXPECT_EQ(*bounded.label, MMClass::NoBlowup);
  const auto big = classify([&](double x) { return 100.0 * L / x; });
  ASSERT_TRUE(big.label);
  EXPECT_EQ(*big.label, MMClass::ConstantProfile);
}

TEST(MatanoMerle, LabelStableUnderSubWindow) {
  const double L = singular_power_amplitude(3.0, 5);
  const auto s = synthetic_state([&](double x) { return 2.0 * L / x; }, 5, 1.0, 2048);
  const auto wide = mm_classify(s, 3.0, 5, kSyntheticT, 1e-3, 0.1);
  const auto narrow = mm_classify(s, 3.0, 5, kSyntheticT, 1e-2, 0.05);
  ASSERT_TRUE(wide.label && narrow.label);
  EXPECT_EQ(*wide.label, *narrow.label);
}

TEST(MatanoMerle, SubcriticalIsInapplicable) {
  const auto s = synthetic_state([](double) { return 1.0; }, 5, 1.0, 256);
  const auto r = mm_classify(s, 2.0, 5, kSyntheticT, 1e-2, 0.1);
  EXPECT_EQ(r.report.verdict, Verdict::Inapplicable);
  EXPECT_FALSE(r.label);
}

TEST(RefinedFit, RecoversQuadraticModel) {
  const auto fit = refined_profile_fit(refined_snapshots(2, 0.25), 1.0, 0.0, 3.0);
  EXPECT_EQ(fit.report.verdict, Verdict::Pass);
  EXPECT_EQ(fit.m_est, 2);
  EXPECT_NEAR(fit.c_est, 0.25, 1e-8);
}

TEST(RefinedFit, RecoversQuarticModel) {
  const auto fit = refined_profile_fit(refined_snapshots(4, 0.1), 1.0, 0.0, 3.0);
  EXPECT_EQ(fit.report.verdict, Verdict::Pass);
  EXPECT_EQ(fit.m_est, 4);
  EXPECT_NEAR(fit.c_est, 0.1, 1e-8);
}

TEST(RefinedFit, GenericRunPrefersQuadratic) {
  const auto& g = generic_run();
  std::vector<EvolutionState> late(g.run.snapshots.end() - 3, g.run.snapshots.end());
  const auto fit = refined_profile_fit(late, g.fit.T, 0.0, 2.0);
  EXPECT_EQ(fit.m_est, 2);
  EXPECT_GT(fit.c_est, 0.0);
  EXPECT_TRUE(std::isfinite(fit.residual));
  EXPECT_LT(fit.residuals[0], fit.residuals[1]);
}
