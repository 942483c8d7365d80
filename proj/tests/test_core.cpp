#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "blowup/core.hpp"
#include "blowup/numerics.hpp"

using namespace blowup;

TEST(Nonlinearity, PowerRequiresExponentAboveOne) {
  EXPECT_THROW(Nonlinearity::power(1.0), InvalidParameter);
  EXPECT_THROW(Nonlinearity::power(0.5), InvalidParameter);
  EXPECT_NO_THROW(Nonlinearity::power(1.5));
}

TEST(Nonlinearity, ValuesAtZero) {
  EXPECT_EQ(Nonlinearity::exponential().f(0.0), 1.0);
  EXPECT_EQ(Nonlinearity::power(3.0).f(0.0), 0.0);
  EXPECT_TRUE(std::isnan(Nonlinearity::exponential().p()));
}

TEST(Nonlinearity, KappaOnlyForPower) {
  EXPECT_THROW(Nonlinearity::exponential().kappa(), InvalidParameter);
  EXPECT_EQ(Nonlinearity::power(2.0).kappa(), 1.0);
  EXPECT_NEAR(Nonlinearity::power(3.0).kappa(), 0.707106781, 1e-9);
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    const double k = Nonlinearity::power(p).kappa();
    EXPECT_NEAR(std::pow(k, p - 1.0) * (p - 1.0), 1.0, 1e-12) << "p = " << p;
  }
}

TEST(Nonlinearity, ConstantProfileIsStationary) {
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    const auto nl = Nonlinearity::power(p);
    EXPECT_NEAR(nl.profile_reaction(nl.kappa()), 0.0, 1e-14);
  }
  EXPECT_EQ(Nonlinearity::exponential().profile_reaction(0.0), 0.0);
}

TEST(Similarity, ForwardExamples) {
  const auto e = Nonlinearity::exponential();
  const double T = 2.0;
  auto a = to_similarity(0.0, T - 1.0, T, 3.0, e);
  EXPECT_EQ(a.y, 0.0);
  EXPECT_EQ(a.s, 0.0);
  EXPECT_EQ(a.w, 3.0);

  auto b = to_similarity_tau(0.5, 0.25, 0.0, e);
  EXPECT_DOUBLE_EQ(b.y, 1.0);
  EXPECT_NEAR(b.s, 1.386294, 1e-6);
  EXPECT_DOUBLE_EQ(b.w, -std::log(4.0));

  auto c = to_similarity_tau(0.0, 0.01, 10.0, Nonlinearity::power(2.0));
  EXPECT_NEAR(c.w, 0.1, 1e-15);
}

TEST(Similarity, Errors) {
  const auto e = Nonlinearity::exponential();
  EXPECT_THROW(to_similarity(0.0, 1.0, 1.0, 0.0, e), DomainError);
  EXPECT_THROW(to_similarity(0.0, 2.0, 1.0, 0.0, e), DomainError);
  EXPECT_THROW(to_similarity(0.0, 0.0, 0.0, 0.0, e), InvalidParameter);
  EXPECT_THROW(to_similarity(0.0, 0.0, -1.0, 0.0, e), InvalidParameter);
  EXPECT_THROW(from_similarity(NAN, 0.0, 0.0, 1.0, e), InvalidParameter);
}

TEST(Similarity, InverseExamples) {
  const auto e = Nonlinearity::exponential();
  auto a = from_similarity(0.0, 0.0, 3.0, 5.0, e);
  EXPECT_EQ(a.r, 0.0);
  EXPECT_EQ(a.t, 4.0);
  EXPECT_EQ(a.u, 3.0);

  auto b = from_similarity(2.0, 2.0, 0.0, 1.0, e);
  EXPECT_NEAR(b.r, 2.0 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(b.t, 1.0 - std::exp(-2.0), 1e-15);
  EXPECT_EQ(b.u, 2.0);
}

TEST(Similarity, RoundTripRandom) {
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto nl = i % 2 ? Nonlinearity::exponential() : Nonlinearity::power(1.5 + 3.0 * U(rng));
    const double T = 0.1 + 2.0 * U(rng);
    const double tau = T * std::pow(10.0, -8.0 * U(rng));
    const double r = 3.0 * U(rng);
    const double u = 1.0 + 20.0 * U(rng);
    const auto sim = to_similarity_tau(r, tau, u, nl);
    const auto back = from_similarity(sim.y, sim.s, sim.w, T, nl);
    auto rel = [](double a, double b) { return b == 0.0 ? std::fabs(a) : std::fabs(a - b) / std::fabs(b); };
    worst = std::max({worst, rel(back.r, r), rel(back.tau, tau), rel(back.u, u)});
  }
  EXPECT_LT(worst, 1e-14);
}

TEST(Similarity, MonotoneInTimeAndRadius) {
  const auto e = Nonlinearity::exponential();
  double prev_s = -INFINITY;
  for (double t = 0.0; t < 0.999; t += 0.01) {
    const double s = to_similarity(0.0, t, 1.0, 0.0, e).s;
    EXPECT_GT(s, prev_s);
    prev_s = s;
  }
  EXPECT_LT(to_similarity(0.1, 0.5, 1.0, 0.0, e).y, to_similarity(0.2, 0.5, 1.0, 0.0, e).y);
}

TEST(RefinedScale, Examples) {
  EXPECT_NEAR(refined_scale_tau(std::exp(-4.0), 2), 4.0 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(refined_scale_tau(1e-6, 3), 1e-2, 1e-15);
  EXPECT_THROW(refined_scale_tau(0.1, 1), InvalidParameter);
  EXPECT_THROW(refined_scale(1.0, 1.0, 2), DomainError);
  double prev = 0.0;
  for (int k = 2; k <= 8; ++k) {
    const double tau = std::pow(10.0, -k);
    const double ratio = refined_scale_tau(tau, 2) / std::sqrt(tau);
    EXPECT_GT(ratio, prev);
    prev = ratio;
  }
}

TEST(SingularAmplitude, MatchesClosedForm) {
  EXPECT_NEAR(singular_power_amplitude(3.0, 5), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(singular_power_amplitude(3.0, 3), InvalidParameter);
  EXPECT_DOUBLE_EQ(sobolev_exponent(3), 5.0);
}

TEST(Numerics, GaussLegendreIntegratesPolynomials) {
  const std::vector<double> breaks{0.0, 0.5, 2.0};
  const auto q = numerics::composite_nodes<10>(breaks);
  double s = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * std::pow(q.x[i], 7);
  EXPECT_NEAR(s, std::pow(2.0, 8) / 8.0, 1e-12);
}

TEST(Numerics, SplineReproducesCubicWithExactEndConditions) {
  std::vector<double> x, f;
  for (int i = 0; i <= 40; ++i) {
    x.push_back(0.1 * i);
    f.push_back(std::cos(x.back()));
  }
  numerics::CubicSpline s(x, f, 0.0);
  EXPECT_NEAR(s(1.234), std::cos(1.234), 1e-5);
  EXPECT_NEAR(s.derivative(0.0), 0.0, 1e-14);
}

TEST(Numerics, FornbergWeightsDifferentiateExactly) {
  const std::vector<double> xs{0.0, 0.1, 0.25, 0.3, 0.5};
  const auto w = numerics::fd_weights(0.25, xs, 1);
  double d = 0.0;
  for (int i = 0; i < 5; ++i) d += w[i] * std::pow(xs[i], 4);
  EXPECT_NEAR(d, 4.0 * std::pow(0.25, 3), 1e-12);
}

TEST(Numerics, TridiagonalSolve) {
  std::vector<double> sub{0, -1, -1}, diag{2, 2, 2}, sup{-1, -1, 0}, rhs{1, 0, 1};
  numerics::solve_tridiagonal(sub, diag, sup, rhs);
  for (double v : rhs) EXPECT_NEAR(v, 1.0, 1e-15);
}
