#pragma once

// Model families for Markov walks S_n = f(X_1) + ... + f(X_n): finite chains
// with exact rational data, and affine recursions X_{n+1} = A X_n + B in one
// or d dimensions. All models are immutable once built and can be shared
// across threads; randomness always comes from a caller-owned Rng.

#include <condwalk/random.hpp>
#include <condwalk/rational.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace condwalk {

struct FiniteChainSpec {
  std::vector<std::string> labels;
  std::vector<Rational> f_values;
  std::vector<std::vector<Rational>> transition;  // row-stochastic

  std::size_t size() const { return labels.size(); }
  /// Index of the state with the given label; throws SchemaError if absent.
  std::size_t index_of(std::string_view label) const;
  /// True when every row equals the first (i.i.d. increments).
  bool rows_identical() const;
};

struct DiscreteLaw {
  std::vector<double> support;
  std::vector<double> probs;

  double mean() const;
  double moment(double p) const;  // E|v|^p
};

struct UniformLaw {
  double lo = 0.0;
  double hi = 0.0;
};

using BLaw = std::variant<UniformLaw, DiscreteLaw>;

struct Affine1DSpec {
  DiscreteLaw a;
  BLaw b;
  double n_epsilon = 0.1;
};

struct AffineMap {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  double prob = 0.0;
};

struct AffineRdSpec {
  int dimension = 0;
  std::vector<AffineMap> g;
  Eigen::VectorXd u;
  double n_epsilon = 0.1;
};

double b_mean(const BLaw& law);
double b_second_moment(const BLaw& law);

/// A point of the state space: a state index (finite chains), a real
/// (1-d affine), or a vector (d-dim affine).
using State = std::variant<std::size_t, double, Eigen::VectorXd>;

/// Simulated positions y + S_k at or below this count as exits. Lattice
/// sums such as 7/6 + 7/6 - 1 carry rounding in double.
inline constexpr double kExitEps = 1e-9;
inline bool exited(double position) { return position <= kExitEps; }

enum class ModelKind { kFinite, kIid, kAffine1D, kAffineRd };

std::string_view to_string(ModelKind kind);

// Typed one-step samplers. The simulation loops are templates over these so
// the hot path never touches std::variant.

class FiniteWalker {
 public:
  using state_type = std::size_t;

  explicit FiniteWalker(const FiniteChainSpec& spec);

  state_type step(state_type s, Rng& rng) const {
    const auto& cum = cumulative_[s];
    const double u = rng.uniform();
    std::size_t j = 0;
    while (j + 1 < cum.size() && !(cum[j] > u)) ++j;
    return j;
  }
  double f(state_type s) const { return f_[s]; }
  double control(state_type) const { return 0.0; }
  std::size_t size() const { return f_.size(); }

 private:
  std::vector<std::vector<double>> cumulative_;
  std::vector<double> f_;
};

class Affine1DWalker {
 public:
  using state_type = double;

  explicit Affine1DWalker(const Affine1DSpec& spec);

  state_type step(state_type x, Rng& rng) const {
    const double a = draw(a_support_, a_cum_, rng);
    const double b = b_uniform_ ? rng.uniform(b_lo_, b_hi_) : draw(b_support_, b_cum_, rng);
    return a * x + b;
  }
  double f(state_type x) const { return x; }
  double control(state_type x) const { return std::pow(std::abs(x), 1.0 + epsilon_); }

 private:
  static double draw(const std::vector<double>& support, const std::vector<double>& cum, Rng& rng) {
    const double u = rng.uniform();
    std::size_t j = 0;
    while (j + 1 < cum.size() && !(cum[j] > u)) ++j;
    return support[j];
  }

  std::vector<double> a_support_, a_cum_;
  bool b_uniform_ = true;
  double b_lo_ = 0.0, b_hi_ = 0.0;
  std::vector<double> b_support_, b_cum_;
  double epsilon_ = 0.1;
};

class AffineRdWalker {
 public:
  using state_type = Eigen::VectorXd;

  explicit AffineRdWalker(const AffineRdSpec& spec);

  state_type step(const state_type& x, Rng& rng) const {
    const double u = rng.uniform();
    std::size_t j = 0;
    while (j + 1 < cum_.size() && !(cum_[j] > u)) ++j;
    return maps_[j].A * x + maps_[j].B;
  }
  double f(const state_type& x) const { return u_.dot(x); }
  double control(const state_type& x) const { return std::pow(x.norm(), 1.0 + epsilon_); }

 private:
  std::vector<AffineMap> maps_;
  std::vector<double> cum_;
  Eigen::VectorXd u_;
  double epsilon_ = 0.1;
};

class WalkModel {
 public:
  using Spec = std::variant<FiniteChainSpec, Affine1DSpec, AffineRdSpec>;

  /// Validates invariants (stochasticity, dimensions, centering of B).
  static WalkModel finite(FiniteChainSpec spec);
  static WalkModel affine1d(Affine1DSpec spec);
  static WalkModel affine_rd(AffineRdSpec spec);

  ModelKind kind() const;
  const Spec& spec() const { return spec_; }
  const FiniteChainSpec* finite_spec() const { return std::get_if<FiniteChainSpec>(&spec_); }
  const Affine1DSpec* affine1d_spec() const { return std::get_if<Affine1DSpec>(&spec_); }
  const AffineRdSpec* affine_rd_spec() const { return std::get_if<AffineRdSpec>(&spec_); }

  /// One transition draw; deterministic given the generator state.
  State step(const State& state, Rng& rng) const;
  double f(const State& state) const;
  /// The control function N: 0 for finite chains, |x|^{1+eps} for affine ones.
  double control(const State& state) const;

  /// State from CLI text: a label for finite chains, a real for 1-d affine,
  /// comma-separated components for d-dim affine.
  State parse_state(std::string_view text) const;
  std::string format_state(const State& state) const;

  /// Calls fn(walker, start) with the typed walker for this model.
  template <class Fn>
  decltype(auto) visit_walker(const State& start, Fn&& fn) const;

 private:
  explicit WalkModel(Spec spec);

  Spec spec_;
  std::variant<FiniteWalker, Affine1DWalker, AffineRdWalker> walker_;
};

template <class Fn>
decltype(auto) WalkModel::visit_walker(const State& start, Fn&& fn) const {
  return std::visit(
      [&](const auto& walker) -> decltype(auto) {
        using W = std::decay_t<decltype(walker)>;
        using S = typename W::state_type;
        return fn(walker, std::get<S>(start));
      },
      walker_);
}

// ---- configuration ingestion (JSON) ----

WalkModel load_model(std::string_view config_document);
WalkModel load_model_file(const std::filesystem::path& path);

// ---- hypothesis validators ----

enum class Verdict { kPass, kFail, kUndecided };
std::string_view to_string(Verdict v);

struct HypothesisCheck {
  std::string name;
  Verdict verdict = Verdict::kUndecided;
  std::string reason;
};

struct ValidationReport {
  ModelKind kind = ModelKind::kFinite;
  std::vector<HypothesisCheck> checks;

  bool any_fail() const;
  bool all_pass() const;
  const HypothesisCheck* find(std::string_view name) const;
};

struct ValidationOptions {
  // Contraction estimate for affine models: E||A_n...A_1||^{2+2 delta}.
  double delta = 0.1;
  int product_length = 20;
  int samples = 100000;
  std::uint64_t seed = kDefaultSeed;
};

ValidationReport validate_model(const WalkModel& model, const ValidationOptions& options = {});

// Graph helpers shared with the exact engine.
bool is_irreducible(const FiniteChainSpec& chain);
/// gcd of cycle lengths of the transition graph; 0 if the graph has no cycle.
std::size_t chain_period(const FiniteChainSpec& chain);

}  // namespace condwalk
