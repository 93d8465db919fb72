#pragma once

// Seeded Monte Carlo estimators. Sample i always uses
// Rng::for_stream(seed, i), and reductions run in a fixed block order, so
// results do not depend on the thread count.

#include <condwalk/models.hpp>
#include <condwalk/random.hpp>

#include <cstdint>
#include <vector>

namespace condwalk::mc {

struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  long n_effective = 0;
  std::uint64_t seed = kDefaultSeed;
};

struct McOptions {
  long n_samples = 1000000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
};

/// P_x(tau_y > n): fraction of paths with y + S_k > 0 for 1 <= k <= n.
EstimateWithError estimate_survival(const WalkModel& model, const State& x, double y, int n,
                                    const McOptions& options = {});

/// Survival at several horizons from the same paths.
std::vector<EstimateWithError> estimate_survival_curve(const WalkModel& model, const State& x, double y,
                                                       const std::vector<int>& horizons,
                                                       const McOptions& options = {});

struct EmpiricalLaw {
  std::vector<double> values;  // sorted (y + S_n) / (sigma sqrt n) over survivors
  long survivors = 0;
  long samples = 0;
  double ks_rayleigh = 0.0;    // sup |ECDF - (1 - e^{-t^2/2})|
};

/// Conditional law of (y + S_n) / (sigma sqrt n) given tau_y > n. Throws
/// NoSurvivors when no path survives.
EmpiricalLaw conditional_law_mc(const WalkModel& model, const State& x, double y, int n, double sigma,
                                const McOptions& options = {});

struct BerryEsseenDiag {
  double distance = 0.0;  // sup_t |P(S_n / sqrt n <= t) - Phi(t / sigma)|, empirical
  long samples = 0;
};

BerryEsseenDiag berry_esseen_diag(const WalkModel& model, const State& x, int n, double sigma,
                                  const McOptions& options = {});

struct VarianceEstimate {
  EstimateWithError at_n;   // Var(S_n) / n with block-jackknife std error
  EstimateWithError at_2n;  // Var(S_2n) / 2n from the same paths
  bool stable = false;      // |at_n - at_2n| <= 3 sqrt(se_n^2 + se_2n^2)
};

VarianceEstimate estimate_variance(const WalkModel& model, const State& x, int n, const McOptions& options = {});

}  // namespace condwalk::mc
