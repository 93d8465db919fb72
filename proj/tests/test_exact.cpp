#include "oracles.hpp"

#include <condwalk/errors.hpp>
#include <condwalk/exact.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace condwalk;
using namespace condwalk::exact;

namespace {

FiniteChainSpec one_state_zero() {
  FiniteChainSpec c;
  c.labels = {"a"};
  c.f_values = {Rational(0)};
  c.transition = {{Rational(1)}};
  return c;
}

FiniteChainSpec two_state_symmetric() {
  FiniteChainSpec c;
  c.labels = {"+", "-"};
  c.f_values = {Rational(1), Rational(-1)};
  c.transition = {{Rational(1, 3), Rational(2, 3)}, {Rational(2, 3), Rational(1, 3)}};
  return c;
}

}  // namespace

TEST(Stationary, FourStateChain) {
  const auto nu = stationary_distribution(oracle::finite4());
  const std::vector<Rational> expected{Rational(2, 15), Rational(4, 15), Rational(1, 5), Rational(2, 5)};
  EXPECT_EQ(nu, expected);
}

TEST(Stationary, TrivialCases) {
  EXPECT_EQ(stationary_distribution(one_state_zero()), std::vector<Rational>{Rational(1)});
  const auto nu = stationary_distribution(oracle::iid_pm1());
  EXPECT_EQ(nu, (std::vector<Rational>{Rational(1, 2), Rational(1, 2)}));
}

TEST(Stationary, ReducibleChainThrows) {
  FiniteChainSpec c = two_state_symmetric();
  c.transition = {{Rational(1), Rational(0)}, {Rational(1, 2), Rational(1, 2)}};
  EXPECT_THROW(stationary_distribution(c), NotIrreducible);
}

TEST(Centering, ExactZeroes) {
  const auto c = oracle::finite4();
  EXPECT_EQ(centering_check(c, stationary_distribution(c)), 0);
  const auto z = one_state_zero();
  EXPECT_EQ(centering_check(z, stationary_distribution(z)), 0);
  const auto s = two_state_symmetric();
  EXPECT_EQ(centering_check(s, stationary_distribution(s)), 0);
}

TEST(Variance, IidEqualsSecondMoment) {
  const auto c = oracle::iid_pm1();
  EXPECT_NEAR(asymptotic_variance(c, stationary_distribution(c)), 1.0, 1e-14);
}

TEST(Variance, FourStateMatchesMomentRecursion) {
  const auto c = oracle::finite4();
  const double sigma2 = asymptotic_variance(c, stationary_distribution(c));
  EXPECT_NEAR(sigma2, 53.0 / 90.0, 1e-12);
  for (std::size_t x = 0; x < c.size(); ++x) {
    const double per_step = oracle::variance_of_sum(c, x, 4096) / 4096.0;
    EXPECT_NEAR(per_step / sigma2, 1.0, 0.02) << "x=" << c.labels[x];
  }
}

TEST(Variance, Errors) {
  const auto z = one_state_zero();
  EXPECT_THROW(asymptotic_variance(z, stationary_distribution(z)), DegenerateVariance);
  FiniteChainSpec biased = oracle::iid_pm1();
  biased.f_values[0] = Rational(-1, 2);
  EXPECT_THROW(asymptotic_variance(biased, stationary_distribution(biased)), NotCentered);
}

TEST(SurvivalDp, HalvingRegime) {
  const auto run = survival_dp<Rational>(oracle::finite4(), 1, Rational(2), 5);
  EXPECT_EQ(run.curve.p[5], Rational(1, 32));
  for (int n = 0; n <= 5; ++n) EXPECT_EQ(run.curve.p[static_cast<std::size_t>(n)], Rational(1, 1 << n));
}

TEST(SurvivalDp, ImmediateDeath) {
  const auto run = survival_dp<Rational>(oracle::finite4(), 1, Rational(1), 1);
  EXPECT_EQ(run.curve.p[1], 0);
  const auto half = survival_dp<Rational>(oracle::finite4(), 1, Rational(1, 2), 1);
  EXPECT_EQ(half.curve.p[1], 0);
}

TEST(SurvivalDp, HorizonZero) {
  const auto run = survival_dp<Rational>(oracle::finite4(), 3, Rational(5, 2), 0);
  ASSERT_EQ(run.curve.p.size(), 1u);
  EXPECT_EQ(run.curve.p[0], 1);
  EXPECT_EQ(run.curve.e[0], Rational(5, 2));
}

TEST(SurvivalDp, EnumerationOracleBitExact) {
  const auto c = oracle::finite4();
  for (std::size_t x = 0; x < c.size(); ++x) {
    for (const Rational y : {Rational(-1), Rational(1, 2), Rational(2), Rational(5, 2), Rational(4)}) {
      const auto run = survival_dp<Rational>(c, x, y, 12);
      const auto oracle_sums = oracle::enumerate_paths(c, x, y, 12);
      for (std::size_t n = 1; n <= 12; ++n) {
        ASSERT_EQ(run.curve.p[n], oracle_sums.p[n]) << "x=" << c.labels[x] << " y=" << y << " n=" << n;
        ASSERT_EQ(run.curve.e[n], oracle_sums.e[n]) << "x=" << c.labels[x] << " y=" << y << " n=" << n;
      }
    }
  }
}

TEST(SurvivalDp, ConservationExactAndFloat) {
  const auto c = oracle::finite4();
  const auto exact_run = survival_dp<Rational>(c, 0, Rational(3), 200);
  Rational exited = 0;
  for (std::size_t n = 0; n < exact_run.curve.p.size(); ++n) {
    exited += exact_run.curve.exit_mass[n];
    ASSERT_EQ(exact_run.curve.p[n] + exited, 1) << n;
  }
  const auto float_run = survival_dp<double>(c, 0, Rational(3), 4096);
  double total = 0.0;
  for (std::size_t n = 0; n < float_run.curve.p.size(); ++n) {
    total += float_run.curve.exit_mass[n];
    ASSERT_NEAR(float_run.curve.p[n] + total, 1.0, 1e-12) << n;
  }
}

TEST(SurvivalDp, SurvivalIsNonIncreasing) {
  const auto run = survival_dp<double>(oracle::finite4(), 2, Rational(2), 2000);
  for (std::size_t n = 1; n < run.curve.p.size(); ++n) ASSERT_LE(run.curve.p[n], run.curve.p[n - 1]);
}

TEST(SurvivalDp, FloatAgreesWithExact) {
  const auto c = oracle::finite4();
  const auto a = survival_dp<Rational>(c, 2, Rational(2), 64);
  const auto b = survival_dp<double>(c, 2, Rational(2), 64);
  for (std::size_t n = 0; n <= 64; ++n) {
    EXPECT_NEAR(b.curve.p[n], to_double(a.curve.p[n]), 1e-14);
    EXPECT_NEAR(b.curve.e[n], to_double(a.curve.e[n]), 1e-12);
  }
}

TEST(SurvivalDp, ThreadCountInvariant) {
  const auto c = oracle::finite4();
  LatticeOptions one, four;
  four.threads = 4;
  const auto a = survival_dp<double>(c, 2, Rational(2), 1500, one);
  const auto b = survival_dp<double>(c, 2, Rational(2), 1500, four);
  EXPECT_EQ(a.curve.p, b.curve.p);
  EXPECT_EQ(a.curve.e, b.curve.e);
  EXPECT_EQ(a.frontier.mass, b.frontier.mass);
}

TEST(SurvivalDp, CellBudgetGuard) {
  LatticeOptions tiny;
  tiny.cell_budget = 1000;
  EXPECT_THROW(survival_dp<double>(oracle::finite4(), 2, Rational(2), 500, tiny), CellBudgetExceeded);
}

TEST(SurvivalDp, FineLatticeRejectedInExactModeBinnedInFloat) {
  LatticeOptions opt;
  opt.max_denominator = 100;
  EXPECT_THROW(survival_dp<Rational>(oracle::finite4(), 0, Rational(1, 1009), 4, opt), NonLatticeInput);
  opt.float_grid = Rational(1, 6);
  const auto run = survival_dp<double>(oracle::finite4(), 0, Rational(1, 1009), 4, opt);
  EXPECT_TRUE(run.lattice.binned);
  EXPECT_EQ(run.curve.p.size(), 5u);
}

TEST(SurvivalDp, CsvLayout) {
  const auto run = survival_dp<Rational>(oracle::finite4(), 1, Rational(2), 3);
  std::ostringstream out;
  write_survival_csv(out, run.curve);
  EXPECT_EQ(out.str(), "n,p_n,e_n,exit_mass_n\n0,1,2,0\n1,1/2,1/2,1/2\n2,1/4,1/2,1/4\n3,1/8,1/8,1/8\n");
  const auto f = survival_dp<double>(oracle::finite4(), 1, Rational(2), 1);
  std::ostringstream fout;
  write_survival_csv(fout, f.curve);
  EXPECT_NE(fout.str().find("1,0.5,0.5,0.5"), std::string::npos) << fout.str();
}

TEST(ConditionalLaw, SingleAtomAfterForcedStep) {
  const auto c = oracle::finite4();
  const double sigma = std::sqrt(53.0 / 90.0);
  const auto law = conditional_law_dp(c, 2, Rational(1), 1, sigma);
  ASSERT_EQ(law.t.size(), 1u);
  EXPECT_NEAR(law.t[0], (1.0 + 7.0 / 6.0) / sigma, 1e-14);
  EXPECT_DOUBLE_EQ(law.cdf[0], 1.0);
  EXPECT_DOUBLE_EQ(law(std::numeric_limits<double>::infinity()), 1.0);
}

TEST(ConditionalLaw, CdfIsProbabilityOnPositiveAxis) {
  const double sigma = std::sqrt(53.0 / 90.0);
  const auto law = conditional_law_dp(oracle::finite4(), 3, Rational(1), 256, sigma);
  EXPECT_GT(law.t.front(), 0.0);
  for (std::size_t i = 1; i < law.cdf.size(); ++i) ASSERT_GE(law.cdf[i], law.cdf[i - 1]);
  EXPECT_NEAR(law.cdf.back(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(law(0.0), 0.0);
  EXPECT_NEAR(law(std::numeric_limits<double>::infinity()), 1.0, 1e-12);
  std::ostringstream out;
  write_cdf_csv(out, law);
  EXPECT_EQ(out.str().rfind("t,cdf\n", 0), 0u);
}

TEST(ConditionalLaw, ExtinctThrows) {
  EXPECT_THROW(conditional_law_dp(oracle::finite4(), 1, Rational(1, 2), 3, 1.0), ExtinctAtHorizon);
}
