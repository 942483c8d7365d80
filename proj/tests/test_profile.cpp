#include <cmath>

#include <gtest/gtest.h>

#include "blowup/profile.hpp"

using namespace blowup;
using namespace blowup::profile;

TEST(ShootProfile, ZeroAlphaIsTrivialExponential) {
  const auto p = shoot_profile(0.0, Nonlinearity::exponential(), 3);
  EXPECT_EQ(p.classification, Classification::Trivial);
  for (double v : p.phi) EXPECT_EQ(v, 0.0);
  EXPECT_FALSE(p.tail_constant.has_value());
  EXPECT_EQ(p.r.front(), 0.0);
  EXPECT_DOUBLE_EQ(p.r.back(), 40.0);
}

TEST(ShootProfile, ZeroAlphaIsTrivialPower) {
  const auto nl = Nonlinearity::power(3.0);
  const auto p = shoot_profile(0.0, nl, 5);
  EXPECT_EQ(p.classification, Classification::Trivial);
  EXPECT_NEAR(p.phi.front(), std::sqrt(0.5), 1e-15);
  for (double v : p.phi) EXPECT_EQ(v, p.phi.front());
}

TEST(ShootProfile, TaylorOracleNearOrigin) {
  const auto nl = Nonlinearity::exponential();
  const auto p = shoot_profile(0.1, nl, 3);
  EXPECT_EQ(p.phi.front(), 0.1);
  EXPECT_EQ(p.dphi.front(), 0.0);
  const double expected = 0.1 - std::expm1(0.1) * 0.01 / 6.0;
  EXPECT_NEAR(p.value(0.1), expected, 1e-6);
  EXPECT_NEAR(p.value(0.1), 0.0998247, 1e-7);
  const double taylor = 0.1 - std::expm1(0.1) * 1e-4 / 6.0;
  EXPECT_NEAR(p.value(1e-2), taylor, 1e-8);
}

TEST(ShootProfile, PowerOriginNormalisation) {
  const auto nl = Nonlinearity::power(3.0);
  const auto p = shoot_profile(0.2, nl, 5);
  EXPECT_NEAR(p.phi.front(), nl.kappa() + 0.2, 1e-15);
  const double g = nl.profile_reaction(p.phi.front());
  EXPECT_NEAR(p.value(1e-2), p.phi.front() - g * 1e-4 / 10.0, 1e-8);
}

TEST(ShootProfile, Preconditions) {
  const auto e = Nonlinearity::exponential();
  ShootOptions o;
  o.r_max = 1.0;
  EXPECT_THROW(shoot_profile(1.0, e, 3, o), InvalidParameter);
  o.r_max = 40.0;
  o.tol = 0.0;
  EXPECT_THROW(shoot_profile(1.0, e, 3, o), InvalidParameter);
}

TEST(ShootProfile, ResidualSmallAwayFromOverflow) {
  const auto e = Nonlinearity::exponential();
  for (double alpha : {0.5, 3.0, 8.0}) {
    const auto p = shoot_profile(alpha, e, 3);
    EXPECT_LE(max_fd_residual(p), 1e-8) << "alpha = " << alpha;
  }
  const auto pw = shoot_profile(0.5, Nonlinearity::power(3.0), 5);
  EXPECT_LE(max_fd_residual(pw), 1e-8);
}

TEST(ShootProfile, GenericShotsDiverge) {
  const auto p = shoot_profile(3.0, Nonlinearity::exponential(), 3);
  EXPECT_EQ(p.classification, Classification::Divergent);
  EXPECT_FALSE(p.tail_constant.has_value());
}

TEST(TailConstant, ExactSingularExponential) {
  const auto p = singular_profile(Nonlinearity::exponential(), 3);
  RadialProfile copy = p;
  copy.tail_constant.reset();
  const auto c = tail_constant(copy);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(*c, std::log(2.0), 1e-12);
  EXPECT_NEAR(*c, 0.693147, 1e-6);
}

TEST(TailConstant, ConstantProfileHasNone) {
  const auto p = shoot_profile(0.0, Nonlinearity::exponential(), 3);
  EXPECT_FALSE(tail_constant(p).has_value());
}

TEST(TailConstant, ExactSingularPower) {
  const auto p = singular_profile(Nonlinearity::power(3.0), 5);
  const auto c = tail_constant(p);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(*c, std::sqrt(2.0), 1e-12);
}

TEST(TailConstant, ShortProfileRejected) {
  ShootOptions o;
  o.r_max = 5.0;
  const auto p = shoot_profile(0.5, Nonlinearity::exponential(), 3, o);
  EXPECT_EQ(p.classification, Classification::Undetermined);
  EXPECT_THROW(tail_constant(p), InvalidParameter);
}

TEST(SingularProfile, ExponentialResidualsAndConstants) {
  const auto e = Nonlinearity::exponential();
  for (int N = 3; N <= 9; ++N) {
    const auto s = singular_closed_form(e, N);
    EXPECT_NEAR(s.constant, std::log(2.0 * (N - 2)), 1e-12);
    for (double r = 0.1; r <= 10.0; r *= 1.01) EXPECT_LT(std::fabs(s.residual(r)), 1e-10) << N << " " << r;
    const auto p = singular_profile(e, N);
    EXPECT_EQ(p.classification, Classification::TailConvergent);
  }
  EXPECT_NEAR(singular_closed_form(e, 9).constant, 2.639057, 1e-6);
  EXPECT_THROW(singular_profile(e, 2), InvalidParameter);
}

TEST(SingularProfile, PowerResidualsAndConstants) {
  for (auto [N, p] : std::vector<std::pair<int, double>>{{5, 3.0}, {4, 5.0}, {6, 3.0}}) {
    const auto nl = Nonlinearity::power(p);
    const auto s = singular_closed_form(nl, N);
    EXPECT_NEAR(s.constant, singular_power_amplitude(p, N), 1e-12);
    for (double r = 0.1; r <= 10.0; r *= 1.01) {
      EXPECT_LT(std::fabs(s.residual(r)), 1e-10) << N << " " << p << " " << r;
    }
  }
  EXPECT_NEAR(singular_closed_form(Nonlinearity::power(3.0), 5).constant, std::sqrt(2.0), 1e-15);
}

TEST(Scan, SubcriticalDimensionHasNoCandidates) {
  const auto res = scan_alphas(Nonlinearity::exponential(), 2, 0.0, 20.0, 200);
  EXPECT_TRUE(res.candidates.empty());
}

TEST(Scan, SupercriticalCandidatesAreSelfConsistent) {
  const auto e = Nonlinearity::exponential();
  const auto coarse = scan_alphas(e, 3, 0.0, 20.0, 200);
  ASSERT_FALSE(coarse.candidates.empty());
  EXPECT_NEAR(coarse.candidates.front().alpha, 5.5151, 1e-3);

  ScanOptions half;
  half.shoot.tol = 0.5e-10;
  for (const auto& c : coarse.candidates) {
    const auto again = refine_candidate(c.scan_lo, c.scan_hi, e, 3, half);
    ASSERT_TRUE(again.has_value());
    EXPECT_LT(std::fabs(again->tail_constant - c.tail_constant), 1e-4);
    EXPECT_LE(max_fd_residual(c.profile), 1e-8);
  }

  const auto fine = scan_alphas(e, 3, 0.0, 20.0, 400);
  for (const auto& c : coarse.candidates) {
    bool found = false;
    for (const auto& f : fine.candidates) found = found || std::fabs(f.alpha - c.alpha) < 1e-6;
    EXPECT_TRUE(found) << "alpha " << c.alpha;
  }
}
