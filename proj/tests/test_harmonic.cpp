#include "oracles.hpp"

#include <condwalk/errors.hpp>
#include <condwalk/exact.hpp>
#include <condwalk/verify.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace condwalk;
using namespace condwalk::exact;

TEST(Harmonic, IidWalkBallotIdentity) {
  // Exits of the +-1 walk land exactly on 0, so E(y + S_n; tau > n) = y for
  // every n; check the enumeration first, then the solver.
  const auto c = oracle::iid_pm1();
  for (int y = 1; y <= 4; ++y) {
    const auto sums = oracle::enumerate_paths(c, 1, Rational(y), 16);
    for (const auto& e : sums.e) ASSERT_EQ(e, y);
  }
  for (int y = 1; y <= 10; ++y) {
    for (std::size_t x = 0; x < 2; ++x) {
      const auto v = harmonic_value_dp(c, x, Rational(y));
      EXPECT_NEAR(v.value, y, 1e-6) << "y=" << y;
      EXPECT_TRUE(v.converged);
    }
  }
}

TEST(Harmonic, ZeroOnHalvingRegime) {
  const auto v = harmonic_value_dp(oracle::finite4(), 1, Rational(3));
  EXPECT_EQ(v.value, 0.0);
  EXPECT_TRUE(v.heuristic);
}

TEST(Harmonic, ZeroWhenExtinct) {
  const auto v = harmonic_value_dp(oracle::finite4(), 0, Rational(0));
  EXPECT_EQ(v.value, 0.0);
  EXPECT_FALSE(v.heuristic);
  ASSERT_TRUE(v.converged_at.has_value());
  EXPECT_EQ(*v.converged_at, 2);
}

TEST(Harmonic, MatchesRichardsonExtrapolatedDenseRecursion) {
  const auto c = oracle::finite4();
  const auto e = oracle::expectation_dense(c, 2, Rational(2), Rational(1, 6), {512, 2048});
  // e_n = V + c / sqrt(n) + o(1 / sqrt n)
  const double extrapolated = 2.0 * e[1] - e[0];
  const auto v = harmonic_value_dp(c, 2, Rational(2));
  EXPECT_TRUE(v.converged);
  EXPECT_NEAR(v.value, extrapolated, 1e-4);
  EXPECT_NEAR(v.value, 2.5772870076435, 1e-8);
}

TEST(Harmonic, LinearGrowthAtLargeY) {
  const auto v = harmonic_value_dp(oracle::finite4(), 3, Rational(100));
  EXPECT_TRUE(v.converged);
  EXPECT_GE(v.value / 100.0, 0.9);
  EXPECT_LE(v.value / 100.0, 1.1);
}

TEST(Harmonic, NonDecreasingInY) {
  const auto c = oracle::finite4();
  double previous = 0.0;
  for (const Rational y : {Rational(1, 2), Rational(1), Rational(2), Rational(4), Rational(8), Rational(16)}) {
    const auto v = harmonic_value_dp(c, 3, y);
    EXPECT_GE(v.value, previous - v.error_bound) << "y=" << y;
    previous = v.value;
  }
}

TEST(Harmonic, DiscreteHarmonicityOnGrid) {
  const auto c = oracle::finite4();
  std::vector<DomainPoint> points;
  for (std::size_t x = 0; x < c.size(); ++x) {
    for (int y : {1, 5, 25}) points.emplace_back(x, Rational(y));
  }
  const auto report = verify::harmonicity(c, points);
  ASSERT_EQ(report.checks.size(), points.size());
  for (const auto& check : report.checks) EXPECT_TRUE(check.pass) << check.name << " " << check.detail;
}

TEST(Harmonic, RequiresCenteredNonDegenerateChain) {
  FiniteChainSpec biased = oracle::iid_pm1();
  biased.f_values[0] = Rational(-1, 2);
  EXPECT_THROW(harmonic_value_dp(biased, 0, Rational(1)), NotCentered);
  FiniteChainSpec flat = oracle::iid_pm1();
  flat.f_values = {Rational(0), Rational(0)};
  EXPECT_THROW(harmonic_value_dp(flat, 0, Rational(1)), DegenerateVariance);
}
