#include <condwalk/errors.hpp>
#include <condwalk/exact.hpp>
#include <condwalk/models.hpp>

#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace condwalk {
namespace {

std::vector<std::vector<std::size_t>> adjacency(const FiniteChainSpec& chain, bool reversed) {
  const std::size_t n = chain.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (sgn(chain.transition[i][j]) > 0) adj[reversed ? j : i].push_back(reversed ? i : j);
    }
  }
  return adj;
}

std::vector<long> bfs_levels(const std::vector<std::vector<std::size_t>>& adj, std::size_t root) {
  std::vector<long> level(adj.size(), -1);
  std::queue<std::size_t> q;
  level[root] = 0;
  q.push(root);
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (auto v : adj[u]) {
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  return level;
}

// True when some cycle of the transition graph has a nonzero f-sum. On a
// strongly connected graph every cycle sum vanishes iff f is a coboundary:
// f(v) = phi(v) - phi(u) along every edge u -> v.
bool has_nonzero_cycle(const FiniteChainSpec& chain, std::string* witness) {
  const auto adj = adjacency(chain, false);
  const std::size_t n = chain.size();
  std::vector<Rational> phi(n);
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> q;
  seen[0] = true;
  q.push(0);
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        phi[v] = phi[u] + chain.f_values[v];
        q.push(v);
      }
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (auto v : adj[u]) {
      if (phi[v] != phi[u] + chain.f_values[v]) {
        if (witness) *witness = "edge " + chain.labels[u] + " -> " + chain.labels[v] + " closes a cycle with nonzero f-sum";
        return true;
      }
    }
  }
  return false;
}

ValidationReport validate_finite(const FiniteChainSpec& chain, ModelKind kind) {
  ValidationReport report;
  report.kind = kind;
  const bool irreducible = is_irreducible(chain);
  report.checks.push_back({"irreducible", irreducible ? Verdict::kPass : Verdict::kFail,
                           irreducible ? "transition graph is strongly connected"
                                       : "transition graph is not strongly connected"});
  if (!irreducible) {
    report.checks.push_back({"aperiodic", Verdict::kUndecided, "period is defined for irreducible chains only"});
    report.checks.push_back({"centering", Verdict::kUndecided, "no unique stationary law"});
    report.checks.push_back({"non_degenerate", Verdict::kUndecided, "needs an irreducible chain"});
    return report;
  }
  const std::size_t period = chain_period(chain);
  report.checks.push_back({"aperiodic", period == 1 ? Verdict::kPass : Verdict::kFail,
                           "period " + std::to_string(period)});

  const auto nu = exact::stationary_distribution(chain);
  const Rational mu = exact::centering_check(chain, nu);
  std::ostringstream nu_text;
  for (std::size_t i = 0; i < nu.size(); ++i) nu_text << (i ? "," : "") << to_string(nu[i]);
  report.checks.push_back({"centering", mu == 0 ? Verdict::kPass : Verdict::kFail,
                           "nu = (" + nu_text.str() + "), nu(f) = " + to_string(mu)});

  std::string witness;
  const bool nondegenerate = has_nonzero_cycle(chain, &witness);
  report.checks.push_back({"non_degenerate", nondegenerate ? Verdict::kPass : Verdict::kFail,
                           nondegenerate ? witness : "every cycle has zero f-sum (f is a coboundary)"});
  return report;
}

struct ContractionEstimate {
  double value = 0.0;      // (E ||Pi_n||^{p})^{1/n}
  double upper = 0.0;      // same with the mean replaced by mean + 3 se
  double lower = 0.0;
};

template <class ProductNorm>
ContractionEstimate estimate_contraction(const ValidationOptions& opt, ProductNorm&& product_norm) {
  const double power = 2.0 + 2.0 * opt.delta;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < opt.samples; ++i) {
    Rng rng = Rng::for_stream(opt.seed, static_cast<std::uint64_t>(i));
    const double v = std::pow(product_norm(rng), power);
    sum += v;
    sum_sq += v * v;
  }
  const double n = opt.samples;
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  const double se = std::sqrt(var / n);
  const double inv = 1.0 / opt.product_length;
  ContractionEstimate c;
  c.value = std::pow(mean, inv);
  c.upper = std::pow(mean + 3.0 * se, inv);
  c.lower = std::pow(std::max(mean - 3.0 * se, 0.0), inv);
  return c;
}

void add_affine_common(ValidationReport& report, double mean_b_abs, const ContractionEstimate& k,
                       const ValidationOptions& opt) {
  report.checks.push_back({"H4_centering", mean_b_abs <= 1e-12 ? Verdict::kPass : Verdict::kFail,
                           "|E(B)| = " + std::to_string(mean_b_abs)});
  std::ostringstream msg;
  msg.precision(6);
  msg << "k(delta) ~ (E||A_n...A_1||^{2+2delta})^{1/n} = " << k.value << " [" << k.lower << ", " << k.upper
      << "] with delta=" << opt.delta << ", n=" << opt.product_length << ", " << opt.samples << " samples";
  Verdict v = Verdict::kUndecided;
  if (k.upper < 1.0) v = Verdict::kPass;
  else if (k.lower > 1.0) v = Verdict::kFail;
  report.checks.push_back({"H1_contraction", v, msg.str()});
  report.checks.push_back({"H2_no_invariant_subspace", Verdict::kUndecided,
                           "no decision procedure implemented for the absence of invariant affine subspaces"});
  report.checks.push_back({"H3_fixed_vector", Verdict::kUndecided,
                           "no decision procedure implemented for the transposed-inverse fixed-vector condition"});
}

}  // namespace

bool is_irreducible(const FiniteChainSpec& chain) {
  if (chain.size() == 0) return false;
  for (bool reversed : {false, true}) {
    const auto level = bfs_levels(adjacency(chain, reversed), 0);
    for (long l : level) {
      if (l < 0) return false;
    }
  }
  return true;
}

std::size_t chain_period(const FiniteChainSpec& chain) {
  const auto adj = adjacency(chain, false);
  const auto level = bfs_levels(adj, 0);
  std::size_t g = 0;
  for (std::size_t u = 0; u < adj.size(); ++u) {
    if (level[u] < 0) continue;
    for (auto v : adj[u]) {
      const long d = level[u] + 1 - level[v];
      g = std::gcd(g, static_cast<std::size_t>(d < 0 ? -d : d));
    }
  }
  return g;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "PASS";
    case Verdict::kFail: return "FAIL";
    case Verdict::kUndecided: return "UNDECIDED";
  }
  return "UNDECIDED";
}

bool ValidationReport::any_fail() const {
  for (const auto& c : checks) {
    if (c.verdict == Verdict::kFail) return true;
  }
  return false;
}

bool ValidationReport::all_pass() const {
  for (const auto& c : checks) {
    if (c.verdict != Verdict::kPass) return false;
  }
  return true;
}

const HypothesisCheck* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ValidationReport validate_model(const WalkModel& model, const ValidationOptions& options) {
  if (const auto* chain = model.finite_spec()) return validate_finite(*chain, model.kind());

  ValidationReport report;
  report.kind = model.kind();
  if (const auto* s = model.affine1d_spec()) {
    const auto& a = s->a;
    std::vector<double> cum(a.probs.size());
    std::partial_sum(a.probs.begin(), a.probs.end(), cum.begin());
    const auto k = estimate_contraction(options, [&](Rng& rng) {
      double prod = 1.0;
      for (int i = 0; i < options.product_length; ++i) {
        const double u = rng.uniform();
        std::size_t j = 0;
        while (j + 1 < cum.size() && !(cum[j] > u)) ++j;
        prod *= a.support[j];
      }
      return std::abs(prod);
    });
    add_affine_common(report, std::abs(b_mean(s->b)), k, options);
    return report;
  }
  const auto& rd = *model.affine_rd_spec();
  std::vector<double> cum;
  double running = 0.0;
  Eigen::VectorXd mean_b = Eigen::VectorXd::Zero(rd.dimension);
  for (const auto& g : rd.g) {
    running += g.prob;
    cum.push_back(running);
    mean_b += g.prob * g.B;
  }
  const auto k = estimate_contraction(options, [&](Rng& rng) {
    Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(rd.dimension, rd.dimension);
    for (int i = 0; i < options.product_length; ++i) {
      const double u = rng.uniform();
      std::size_t j = 0;
      while (j + 1 < cum.size() && !(cum[j] > u)) ++j;
      prod = rd.g[j].A * prod;
    }
    return prod.operatorNorm();
  });
  add_affine_common(report, mean_b.cwiseAbs().maxCoeff(), k, options);
  return report;
}

}  // namespace condwalk
