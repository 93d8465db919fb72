#include "oracles.hpp"

#include <condwalk/brownian.hpp>
#include <condwalk/errors.hpp>
#include <condwalk/exact.hpp>
#include <condwalk/monte_carlo.hpp>
#include <condwalk/stats.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

using namespace condwalk;
using namespace condwalk::mc;

namespace {

McOptions samples(long n, std::uint64_t seed = 77) {
  McOptions opt;
  opt.n_samples = n;
  opt.seed = seed;
  return opt;
}

const double kSigma4 = std::sqrt(53.0 / 90.0);

}  // namespace

TEST(Survival, HorizonZeroIsCertain) {
  const auto model = WalkModel::finite(oracle::finite4());
  const auto e = estimate_survival(model, State{std::size_t{0}}, 1.0, 0, samples(1000));
  EXPECT_EQ(e.value, 1.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(Survival, HalvingRegime) {
  const auto model = WalkModel::finite(oracle::finite4());
  const auto e = estimate_survival(model, State{std::size_t{1}}, 2.0, 10, samples(1000000));
  EXPECT_LE(std::abs(e.value - std::ldexp(1.0, -10)), 4.0 * e.std_error);
  EXPECT_EQ(e.n_effective, 1000000);
}

TEST(Survival, AffineImmediateDeath) {
  const auto model = load_model_file(oracle::fixture("affine1d.json"));
  const auto e = estimate_survival(model, State{0.0}, -1.5, 1, samples(1000000));
  EXPECT_EQ(e.value, 0.0);
}

TEST(Survival, AgreesWithExactDp) {
  const auto c = oracle::finite4();
  const auto model = WalkModel::finite(c);
  const auto dp = exact::survival_dp<Rational>(c, 2, Rational(2), 256);
  const std::vector<int> horizons{4, 16, 64, 256};
  const auto curve = estimate_survival_curve(model, State{std::size_t{2}}, 2.0, horizons, samples(1000000));
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const double exact = to_double(dp.curve.p[static_cast<std::size_t>(horizons[i])]);
    EXPECT_LE(std::abs(curve[i].value - exact), 4.0 * curve[i].std_error) << "n=" << horizons[i];
  }
}

TEST(Survival, ThreadAndSeedDeterminism) {
  const auto model = load_model_file(oracle::fixture("affine1d.json"));
  auto opt = samples(50000);
  const auto a = estimate_survival(model, State{0.0}, 2.0, 64, opt);
  opt.threads = 4;
  const auto b = estimate_survival(model, State{0.0}, 2.0, 64, opt);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  opt.seed = 78;
  const auto c = estimate_survival(model, State{0.0}, 2.0, 64, opt);
  EXPECT_NE(a.value, c.value);
}

TEST(ConditionalLaw, SupportIsPositive) {
  const auto model = WalkModel::finite(oracle::finite4());
  const auto law = conditional_law_mc(model, State{std::size_t{3}}, 1.0, 32, kSigma4, samples(20000));
  ASSERT_GT(law.survivors, 0);
  EXPECT_TRUE(std::is_sorted(law.values.begin(), law.values.end()));
  EXPECT_GT(law.values.front(), 0.0);
}

TEST(ConditionalLaw, MatchesExactDpWithinDkw) {
  const auto c = oracle::finite4();
  const auto model = WalkModel::finite(c);
  const int n = 64;
  const auto exact_law = exact::conditional_law_dp(c, 3, Rational(1), n, kSigma4);
  const auto law = conditional_law_mc(model, State{std::size_t{3}}, 1.0, n, kSigma4, samples(200000));
  std::vector<double> t, cdf;
  stats::empirical_cdf(law.values, t, cdf);
  const double distance = stats::sup_distance_steps(t, cdf, exact_law.t, exact_law.cdf);
  EXPECT_LE(distance, 4.0 * stats::dkw_epsilon(static_cast<std::size_t>(law.survivors)));
}

TEST(ConditionalLaw, AffineApproachesRayleigh) {
  const auto model = load_model_file(oracle::fixture("affine1d.json"));
  const double sigma = std::sqrt(exact::affine_asymptotic_variance(model));
  const auto law = conditional_law_mc(model, State{0.0}, 2.0, 4096, sigma, samples(500000));
  EXPECT_GE(law.survivors, 20000);
  EXPECT_LE(law.ks_rayleigh, 0.05);
}

TEST(ConditionalLaw, NoSurvivorsThrows) {
  const auto model = WalkModel::finite(oracle::finite4());
  EXPECT_THROW(conditional_law_mc(model, State{std::size_t{1}}, 0.5, 4, kSigma4, samples(100)), NoSurvivors);
}

TEST(BerryEsseen, IidWalkMatchesEnumeration) {
  // S_4 of the +-1 walk: binomial atoms at -4, -2, 0, 2, 4.
  const double weights[] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  double exact = 0.0, cum = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double t = (2.0 * k - 4.0) / 2.0;
    const double phi = brownian::normal_cdf(t);
    exact = std::max(exact, std::abs(cum - phi));
    cum += weights[k];
    exact = std::max(exact, std::abs(cum - phi));
  }
  const auto model = load_model_file(oracle::fixture("iid_pm1.json"));
  const auto diag = berry_esseen_diag(model, State{std::size_t{0}}, 4, 1.0, samples(1000000));
  EXPECT_LE(std::abs(diag.distance - exact), stats::dkw_epsilon(1000000));
}

TEST(BerryEsseen, DistanceShrinksWithN) {
  const auto model = WalkModel::finite(oracle::finite4());
  const auto start = std::chrono::steady_clock::now();
  const auto small = berry_esseen_diag(model, State{std::size_t{0}}, 64, kSigma4, samples(1000000));
  const auto large = berry_esseen_diag(model, State{std::size_t{0}}, 4096, kSigma4, samples(1000000));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RecordProperty("seconds", std::to_string(seconds));
  EXPECT_LT(large.distance, small.distance);
}

TEST(Variance, IidWalk) {
  const auto model = load_model_file(oracle::fixture("iid_pm1.json"));
  const auto v = estimate_variance(model, State{std::size_t{0}}, 256, samples(100000));
  EXPECT_LE(std::abs(v.at_n.value - 1.0), 3.0 * v.at_n.std_error);
}

TEST(Variance, FourStateMatchesExact) {
  const auto model = WalkModel::finite(oracle::finite4());
  const auto v = estimate_variance(model, State{std::size_t{0}}, 4096, samples(20000));
  EXPECT_LE(std::abs(v.at_n.value - 53.0 / 90.0), 3.0 * v.at_n.std_error);
}

TEST(Variance, AffineIsStable) {
  const auto model = load_model_file(oracle::fixture("affine1d.json"));
  const auto v = estimate_variance(model, State{0.0}, 512, samples(100000));
  EXPECT_GT(v.at_n.value, 0.0);
  EXPECT_TRUE(v.stable);
  EXPECT_LE(std::abs(v.at_n.value - exact::affine_asymptotic_variance(model)), 3.0 * v.at_n.std_error);
}
