#pragma once

// Exact computations for finite chains: stationary law, centring, the
// asymptotic variance, and the lattice dynamic programme for the joint law of
// (X_n, y + S_n) on the survival event {tau_y > n}.

#include <condwalk/models.hpp>
#include <condwalk/rational.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string_view>
#include <utility>
#include <vector>

namespace condwalk::exact {

using condwalk::to_string;

/// Unique invariant probability of an irreducible chain, exact.
/// Throws NotIrreducible.
std::vector<Rational> stationary_distribution(const FiniteChainSpec& chain);

/// mu = nu(f), exact. The caller decides what to do when mu != 0.
Rational centering_check(const FiniteChainSpec& chain, const std::vector<Rational>& nu);

struct VarianceSeries {
  double sigma2 = 0.0;
  std::size_t terms = 0;
  double last_term = 0.0;
};

struct VarianceOptions {
  double term_cutoff = 1e-14;
  std::size_t max_terms = 100000;
  double degeneracy_threshold = 1e-12;
};

/// sigma^2 = nu(f^2) + 2 sum_{n>=1} nu(f P^n f), summed until the term drops
/// below the cutoff. Throws NotCentered if nu(f) != 0 and DegenerateVariance
/// if sigma^2 <= threshold.
VarianceSeries asymptotic_variance_series(const FiniteChainSpec& chain, const std::vector<Rational>& nu,
                                          const VarianceOptions& options = {});

inline double asymptotic_variance(const FiniteChainSpec& chain, const std::vector<Rational>& nu,
                                  const VarianceOptions& options = {}) {
  return asymptotic_variance_series(chain, nu, options).sigma2;
}

/// Closed-form sigma^2 for affine models with E(B) = 0, from the stationary
/// covariance Sigma = E[A Sigma A^T] + E[B B^T]. Throws DomainError when E(A)
/// or the second-moment operator is not contracting.
double affine_asymptotic_variance(const WalkModel& model);

// ---- lattice dynamic programme ----

enum class DpMode { kExactRational, kFloat };

struct LatticeOptions {
  std::uint64_t cell_budget = std::uint64_t{1} << 31;
  // Exact mode refuses lattices finer than 1/max_denominator.
  long max_denominator = 1000000;
  // Float mode bins f and y onto this grid when the exact lattice is too fine.
  Rational float_grid = Rational(1, 10000);
  unsigned threads = 1;
};

/// Integer coordinates: position value = index * unit. Every f value and the
/// start y are integer multiples of unit (after binning in float mode).
struct Lattice {
  Rational unit;
  std::vector<long> steps;  // f(x) / unit per state
  long start = 0;           // y / unit
  bool binned = false;

  long max_step() const;
  long min_step() const;
};

Lattice build_lattice(const FiniteChainSpec& chain, const Rational& y, DpMode mode,
                      const LatticeOptions& options = {});

/// Sub-probability over (state, lattice index). Only indices >= 1 (strictly
/// positive positions) ever carry mass.
template <class T>
struct LatticeFrontier {
  Rational unit;
  long lo = 1;  // lattice index of mass[s][0]
  std::vector<std::vector<T>> mass;
  int horizon = 0;

  long hi() const { return lo + static_cast<long>(width()) - 1; }
  std::size_t width() const { return mass.empty() ? 0 : mass[0].size(); }
  T total() const;
};

template <class T>
struct SurvivalCurve {
  std::vector<T> p;          // P_x(tau_y > n)
  std::vector<T> e;          // E_x(y + S_n; tau_y > n)
  std::vector<T> exit_mass;  // P_x(tau_y = n); exit_mass[0] = 0
};

/// Forward recursion on (X_k, y + S_k). A step landing exactly on 0 exits.
template <class T>
class LatticeDp {
 public:
  LatticeDp(const FiniteChainSpec& chain, std::size_t x, const Lattice& lattice, const LatticeOptions& options = {});

  void step();
  int horizon() const { return frontier_.horizon; }
  const T& survival() const { return survival_; }
  /// E_x(y + S_n; tau_y > n) at the current horizon.
  T expectation() const;
  const T& last_exit_mass() const { return last_exit_; }
  const T& total_exit_mass() const { return total_exit_; }
  const LatticeFrontier<T>& frontier() const { return frontier_; }
  const Lattice& lattice() const { return lattice_; }

  /// Mass at positions strictly above the given value.
  T mass_above(const Rational& level) const;

 private:
  void trim();

  std::vector<std::vector<T>> trans_;  // trans_[to][from] = P(from, to)
  Lattice lattice_;
  LatticeOptions options_;
  LatticeFrontier<T> frontier_;
  T survival_;
  T last_exit_;
  T total_exit_;
};

extern template class LatticeDp<Rational>;
extern template class LatticeDp<double>;

template <class T>
struct SurvivalRun {
  Lattice lattice;
  SurvivalCurve<T> curve;
  LatticeFrontier<T> frontier;
};

/// Runs the DP to n_max. Throws CellBudgetExceeded when the worst-case
/// frontier would exceed options.cell_budget, NonLatticeInput when the exact
/// lattice is too fine.
template <class T>
SurvivalRun<T> survival_dp(const FiniteChainSpec& chain, std::size_t x, const Rational& y, int n_max,
                           const LatticeOptions& options = {});

extern template SurvivalRun<Rational> survival_dp(const FiniteChainSpec&, std::size_t, const Rational&, int,
                                                  const LatticeOptions&);
extern template SurvivalRun<double> survival_dp(const FiniteChainSpec&, std::size_t, const Rational&, int,
                                                const LatticeOptions&);

/// CSV with header `n,p_n,e_n,exit_mass_n`: exact "p/q" strings for rational
/// curves, 17 significant digits for floating ones.
void write_survival_csv(std::ostream& out, const SurvivalCurve<Rational>& curve);
void write_survival_csv(std::ostream& out, const SurvivalCurve<double>& curve);

// ---- harmonic function ----

enum class HarmonicMethod { kDpLimit, kExitSolve, kMartingaleMc };
std::string_view to_string(HarmonicMethod m);

struct HarmonicEstimate {
  double value = 0.0;
  HarmonicMethod method = HarmonicMethod::kDpLimit;
  double error_bound = 0.0;
  std::optional<int> converged_at;  // DP horizon, when the DP limit was reached
  bool converged = true;
  // Set when V = 0 was inferred from geometric decay of the survival curve.
  bool heuristic = false;
};

struct HarmonicOptions {
  double tol = 1e-8;
  int n_cap = 1 << 16;
  // Horizon of the DP Cauchy probe before switching to the exit solve.
  int probe_cap = 1024;
  // Exit solve: the lattice is truncated at level y + base_level_spans * span
  // (span = max f - min f) and refined by doubling until two levels agree.
  double base_level_spans = 32.0;
  int max_refinements = 4;
  LatticeOptions lattice{};
};

/// V(x, y) = lim_n E_x(y + S_n; tau_y > n). Requires nu(f) = 0 and
/// sigma^2 > 0. The DP sequence is tried first (doubling-gap Cauchy test);
/// when it has not settled by the probe horizon, V is obtained from
/// V = y + r(x) - E_x[(y + S_tau) + r(X_tau)], the exit functional being
/// solved on a truncated lattice. converged == false signals that neither
/// route met the tolerance; the value and bound are still reported.
HarmonicEstimate harmonic_value_dp(const FiniteChainSpec& chain, std::size_t x, const Rational& y,
                                   const HarmonicOptions& options = {});

// ---- conditional law ----

struct ConditionalLaw {
  std::vector<double> t;    // sorted atoms of (y + S_n) / (sigma sqrt n)
  std::vector<double> cdf;  // right-continuous CDF at each atom
  double survival = 0.0;    // p_n

  double operator()(double x) const;  // CDF evaluated anywhere
};

/// Law of (y + S_n) / (sigma sqrt n) given tau_y > n, from the float DP.
/// Throws ExtinctAtHorizon if p_n = 0.
ConditionalLaw conditional_law_dp(const FiniteChainSpec& chain, std::size_t x, const Rational& y, int n,
                                  double sigma, const LatticeOptions& options = {});

void write_cdf_csv(std::ostream& out, const ConditionalLaw& law);

// ---- positivity domain ----

enum class DomainKind { kPositive, kZeroImmediate, kZeroExponential, kUnknown };
std::string_view to_string(DomainKind k);

struct DomainVerdict {
  std::size_t x = 0;
  Rational y;
  DomainKind kind = DomainKind::kUnknown;
  int witness_n = 0;                 // POSITIVE: first n0 with y + S_n0 > gamma reachable
  double witness_probability = 0.0;  // P_x(y + S_n0 > gamma, tau_y > n0)
  double rate = 0.0;                 // ZERO_EXPONENTIAL: decay rate (inf when extinct)
  int extinct_at = 0;                // first n with p_n = 0, 0 if none within horizon
  int horizon = 0;
};

using DomainPoint = std::pair<std::size_t, Rational>;

/// Classifies each point against D_gamma (N = 0 for finite chains).
std::vector<DomainVerdict> classify_domain(const FiniteChainSpec& chain, const std::vector<DomainPoint>& points,
                                           double gamma, int horizon);

/// Least-squares fit of log p_n against n over [n_from, n_to]. Returns
/// (slope, R^2); p_n must be positive on the window.
std::pair<double, double> log_linear_fit(const std::vector<double>& p, int n_from, int n_to);

/// True when the curve drops at least e-fold over [n_from, n_to] and
/// log p_n is linear in n with R^2 > 0.999.
bool decays_geometrically(const std::vector<double>& p, int n_from, int n_to, double* rate = nullptr);

}  // namespace condwalk::exact
