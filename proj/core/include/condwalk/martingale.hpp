#pragma once

// Gordin martingale approximation of the walk. With Theta solving the Poisson
// equation Theta - P Theta = f and r = P Theta, the process
//   M_n = sum_{k<=n} [Theta(X_k) - r(X_{k-1})]
// is a zero-mean martingale and z + M_n = y + S_n + r(X_n) with z = y + r(x).
// T_z is the first k >= 1 with z + M_k <= 0; T_hat_z the first k >= tau_y.

#include <condwalk/exact.hpp>
#include <condwalk/models.hpp>
#include <condwalk/random.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace condwalk::martingale {

struct PoissonSolution {
  // Finite chains: exact values per state, with double copies for simulation.
  std::vector<Rational> theta_exact;
  std::vector<Rational> r_exact;
  std::vector<double> theta;
  std::vector<double> r;
  // Affine models: Theta(x) = <theta_coef, x> + shift, r(x) = <r_coef, x> + shift.
  Eigen::VectorXd theta_coef;
  Eigen::VectorXd r_coef;
  double shift = 0.0;
  bool linear = false;
  double residual = 0.0;  // max |Theta - P Theta - f|

  double theta_at(std::size_t s) const { return theta[s]; }
  double theta_at(double x) const { return theta_coef[0] * x + shift; }
  double theta_at(const Eigen::VectorXd& x) const { return theta_coef.dot(x) + shift; }
  double r_at(std::size_t s) const { return r[s]; }
  double r_at(double x) const { return r_coef[0] * x + shift; }
  double r_at(const Eigen::VectorXd& x) const { return r_coef.dot(x) + shift; }
  double r_at(const State& s) const;
  double theta_at(const State& s) const;

  /// Theta + c (and hence r + c). Leaves every martingale increment unchanged.
  PoissonSolution shifted(double c) const;
};

/// Solves Theta - P Theta = f with nu(Theta) = 0 exactly, via the
/// fundamental matrix (I - P + 1 nu^T) Theta = f. Throws
/// SingularBeyondNullspace when nu(f) != 0.
PoissonSolution solve_poisson(const FiniteChainSpec& chain, const std::vector<Rational>& nu);

/// Finite chains go through the exact solver; affine models use the linear
/// closed form Theta(x) = <u, (I - E A)^{-1} x>.
PoissonSolution solve_poisson(const WalkModel& model);

struct ExitTriple {
  std::optional<long> tau;    // tau_y, nullopt when censored
  std::optional<long> T;      // T_z
  std::optional<long> T_hat;  // T_hat_z
  double M_at_tau = 0.0;
  double M_at_T = 0.0;
  double M_at_T_hat = 0.0;
  long steps = 0;
  long path_checks = 0;  // steps at which z + M_n = y + S_n + r(X_n) was verified
  bool censored() const { return !T_hat.has_value(); }
};

inline constexpr double kIdentityTolerance = 1e-10;

/// Simulates one path until T_hat_z (which bounds tau_y and T_z) or n_max
/// steps. Throws IdentityViolation if the coupling identity ever fails.
ExitTriple martingale_path(const WalkModel& model, const State& x, double y, const PoissonSolution& poisson,
                           long n_max, Rng& rng);

struct MartingaleOptions {
  long n_samples = 100000;
  long n_max = 1000000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  double max_censored_fraction = 0.10;
};

/// Per-sample exit triples; sample i uses Rng::for_stream(seed, i).
std::vector<ExitTriple> simulate_exit_triples(const WalkModel& model, const State& x, double y,
                                              const PoissonSolution& poisson, const MartingaleOptions& options);

/// CSV `sample,tau,T,That,M_at_tau,censored`; censored times are written as
/// "CENSORED".
void write_exit_triples_csv(std::ostream& out, const std::vector<ExitTriple>& triples);

struct MartingaleEstimate {
  exact::HarmonicEstimate estimate;
  double mc_error = 0.0;         // 3 sd / sqrt(n)
  double censoring_bias = 0.0;   // p_censored * max |M|
  double censored_fraction = 0.0;
  long identity_violations = 0;  // always 0: a violation throws
  long path_checks = 0;
};

/// V(x, y) = -E_x(M_{tau_y}).
MartingaleEstimate estimate_V_martingale(const WalkModel& model, const State& x, double y,
                                         const PoissonSolution& poisson, const MartingaleOptions& options);
/// W(x, z) = -E_x(M_{T_z}).
MartingaleEstimate estimate_W(const WalkModel& model, const State& x, double z, const PoissonSolution& poisson,
                              const MartingaleOptions& options);
/// W_hat(x, z) = -E_x(M_{T_hat_z}).
MartingaleEstimate estimate_W_hat(const WalkModel& model, const State& x, double z, const PoissonSolution& poisson,
                                  const MartingaleOptions& options);

/// Exact conditional mean E[xi_1 | X_0 = s] = P Theta(s) - r(s), per state.
std::vector<Rational> increment_conditional_means(const FiniteChainSpec& chain, const PoissonSolution& poisson);

}  // namespace condwalk::martingale
