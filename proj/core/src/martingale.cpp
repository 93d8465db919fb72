#include <condwalk/errors.hpp>
#include <condwalk/martingale.hpp>
#include <condwalk/parallel.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace condwalk::martingale {
namespace {

// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

enum class StopAt { kTau, kT, kTHat };

template <class Walker, class S>
ExitTriple run_path(const Walker& walker, const S& x0, double y, const PoissonSolution& poisson, long n_max,
                    Rng& rng, StopAt stop) {
  ExitTriple out;
  const double z = y + poisson.r_at(x0);
  CompensatedSum m_sum, s_sum;
  S prev = x0;
  for (long k = 1; k <= n_max; ++k) {
    S next = walker.step(prev, rng);
    m_sum.add(poisson.theta_at(next) - poisson.r_at(prev));
    s_sum.add(walker.f(next));
    const double m = m_sum.value();
    const double walk = y + s_sum.value();
    const double lhs = z + m;
    const double rhs = walk + poisson.r_at(next);
    if (!(std::abs(lhs - rhs) <= kIdentityTolerance)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "z + M_n = %.17g but y + S_n + r(X_n) = %.17g at n = %ld", lhs, rhs, k);
      throw IdentityViolation(buf);
    }
    ++out.path_checks;
    out.steps = k;
    if (!out.tau && exited(walk)) {
      out.tau = k;
      out.M_at_tau = m;
    }
    if (!out.T && exited(lhs)) {
      out.T = k;
      out.M_at_T = m;
    }
    if (out.tau && !out.T_hat && exited(lhs)) {
      out.T_hat = k;
      out.M_at_T_hat = m;
    }
    const bool done = (stop == StopAt::kTau && out.tau) || (stop == StopAt::kT && out.T) ||
                      (stop == StopAt::kTHat && out.T_hat);
    if (done) break;
    prev = std::move(next);
  }
  return out;
}

ExitTriple path_for_model(const WalkModel& model, const State& x, double y, const PoissonSolution& poisson,
                          long n_max, Rng& rng, StopAt stop) {
  return model.visit_walker(x, [&](const auto& walker, const auto& start) {
    return run_path(walker, start, y, poisson, n_max, rng, stop);
  });
}

std::vector<ExitTriple> simulate(const WalkModel& model, const State& x, double y, const PoissonSolution& poisson,
                                 const MartingaleOptions& options, StopAt stop) {
  if (options.n_samples < 1) throw DomainError("n_samples must be positive");
  std::vector<ExitTriple> triples(static_cast<std::size_t>(options.n_samples));
  parallel_blocks(triples.size(), 256, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = Rng::for_stream(options.seed, i);
      triples[i] = path_for_model(model, x, y, poisson, options.n_max, rng, stop);
    }
  });
  return triples;
}

// Deterministic bound on |M| at any of the three stopping times for finite
// chains: the overshoot below 0 is at most one increment.
double finite_stop_bound(const FiniteChainSpec& chain, const PoissonSolution& poisson, double z) {
  double f_min = 0.0, r_abs = 0.0, xi_min = 0.0;
  for (std::size_t s = 0; s < chain.size(); ++s) {
    f_min = std::min(f_min, to_double(chain.f_values[s]));
    r_abs = std::max(r_abs, std::abs(poisson.r[s]));
    for (std::size_t t = 0; t < chain.size(); ++t) {
      if (sgn(chain.transition[s][t]) > 0) xi_min = std::min(xi_min, poisson.theta[t] - poisson.r[s]);
    }
  }
  return std::abs(z) + std::max(std::abs(f_min) + r_abs, std::abs(xi_min));
}

MartingaleEstimate summarize(const WalkModel& model, const std::vector<ExitTriple>& triples,
                             const PoissonSolution& poisson, const State& x, double start,
                             const MartingaleOptions& options, StopAt stop) {
  const double n = static_cast<double>(triples.size());
  double sum = 0.0, sum_sq = 0.0, observed_max = 0.0;
  long censored = 0;
  MartingaleEstimate out;
  for (const auto& t : triples) {
    out.path_checks += t.path_checks;
    std::optional<long> time;
    double m = 0.0;
    switch (stop) {
      case StopAt::kTau: time = t.tau; m = t.M_at_tau; break;
      case StopAt::kT: time = t.T; m = t.M_at_T; break;
      case StopAt::kTHat: time = t.T_hat; m = t.M_at_T_hat; break;
    }
    if (!time) {
      ++censored;
      continue;
    }
    sum += m;
    sum_sq += m * m;
    observed_max = std::max(observed_max, std::abs(m));
  }
  out.censored_fraction = censored / n;
  if (out.censored_fraction > options.max_censored_fraction) {
    throw TooManyCensored(std::to_string(censored) + " of " + std::to_string(triples.size()) +
                          " paths censored at n_max = " + std::to_string(options.n_max));
  }
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  out.mc_error = 3.0 * std::sqrt(var / n);
  double bound = observed_max;
  if (const auto* chain = model.finite_spec()) {
    const double z = stop == StopAt::kTau ? start + poisson.r_at(x) : start;
    bound = finite_stop_bound(*chain, poisson, z);
  }
  out.censoring_bias = out.censored_fraction * bound;
  out.estimate.value = -mean;
  out.estimate.method = exact::HarmonicMethod::kMartingaleMc;
  out.estimate.error_bound = out.mc_error + out.censoring_bias;
  out.estimate.converged = true;
  return out;
}

}  // namespace

double PoissonSolution::theta_at(const State& s) const {
  return std::visit([&](const auto& v) { return theta_at(v); }, s);
}

double PoissonSolution::r_at(const State& s) const {
  return std::visit([&](const auto& v) { return r_at(v); }, s);
}

PoissonSolution PoissonSolution::shifted(double c) const {
  PoissonSolution out = *this;
  if (linear) {
    out.shift += c;
  } else {
    const Rational exact_c(c);
    for (auto& v : out.theta_exact) v += exact_c;
    for (auto& v : out.r_exact) v += exact_c;
    for (std::size_t i = 0; i < out.theta.size(); ++i) {
      out.theta[i] = to_double(out.theta_exact[i]);
      out.r[i] = to_double(out.r_exact[i]);
    }
  }
  return out;
}

PoissonSolution solve_poisson(const FiniteChainSpec& chain, const std::vector<Rational>& nu) {
  const Rational mu = exact::centering_check(chain, nu);
  if (mu != 0) {
    throw SingularBeyondNullspace("Poisson equation is inconsistent: nu(f) = " + to_string(mu));
  }
  const std::size_t n = chain.size();
  // Gauss-Jordan on (I - P + 1 nu^T) Theta = f.
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = (i == j ? 1 : 0) - chain.transition[i][j] + nu[j];
    a[i][n] = chain.f_values[i];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) throw SingularBeyondNullspace("fundamental matrix is singular (chain not irreducible?)");
    std::swap(a[pivot], a[col]);
    const Rational inv = 1 / a[col][col];
    for (std::size_t j = col; j <= n; ++j) a[col][j] *= inv;
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const Rational factor = a[row][col];
      for (std::size_t j = col; j <= n; ++j) a[row][j] -= factor * a[col][j];
    }
  }
  PoissonSolution sol;
  for (std::size_t i = 0; i < n; ++i) sol.theta_exact.push_back(a[i][n]);
  Rational residual = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Rational pt = 0;
    for (std::size_t j = 0; j < n; ++j) pt += chain.transition[i][j] * sol.theta_exact[j];
    sol.r_exact.push_back(pt);
    Rational res = sol.theta_exact[i] - pt - chain.f_values[i];
    if (abs(res) > residual) residual = abs(res);
  }
  for (std::size_t i = 0; i < n; ++i) {
    sol.theta.push_back(to_double(sol.theta_exact[i]));
    sol.r.push_back(to_double(sol.r_exact[i]));
  }
  sol.residual = to_double(residual);
  return sol;
}

PoissonSolution solve_poisson(const WalkModel& model) {
  if (const auto* chain = model.finite_spec()) return solve_poisson(*chain, exact::stationary_distribution(*chain));
  Eigen::MatrixXd mean_a;
  Eigen::VectorXd u;
  if (const auto* s = model.affine1d_spec()) {
    mean_a = Eigen::MatrixXd::Constant(1, 1, s->a.mean());
    u = Eigen::VectorXd::Ones(1);
  } else {
    const auto& rd = *model.affine_rd_spec();
    mean_a = Eigen::MatrixXd::Zero(rd.dimension, rd.dimension);
    for (const auto& g : rd.g) mean_a += g.prob * g.A;
    u = rd.u;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(mean_a, false);
  if (!(es.eigenvalues().cwiseAbs().maxCoeff() < 1.0)) {
    throw SingularBeyondNullspace("E(A) has spectral radius >= 1: the Poisson series diverges");
  }
  const Eigen::Index d = mean_a.rows();
  PoissonSolution sol;
  sol.linear = true;
  sol.theta_coef = (Eigen::MatrixXd::Identity(d, d) - mean_a.transpose()).partialPivLu().solve(u);
  sol.r_coef = mean_a.transpose() * sol.theta_coef;
  sol.residual = (sol.theta_coef - sol.r_coef - u).cwiseAbs().maxCoeff();
  return sol;
}

ExitTriple martingale_path(const WalkModel& model, const State& x, double y, const PoissonSolution& poisson,
                           long n_max, Rng& rng) {
  return path_for_model(model, x, y, poisson, n_max, rng, StopAt::kTHat);
}

std::vector<ExitTriple> simulate_exit_triples(const WalkModel& model, const State& x, double y,
                                              const PoissonSolution& poisson, const MartingaleOptions& options) {
  return simulate(model, x, y, poisson, options, StopAt::kTHat);
}

void write_exit_triples_csv(std::ostream& out, const std::vector<ExitTriple>& triples) {
  out << "sample,tau,T,That,M_at_tau,censored\n";
  auto time = [](const std::optional<long>& t) { return t ? std::to_string(*t) : std::string("CENSORED"); };
  char buf[40];
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    std::snprintf(buf, sizeof buf, "%.17g", t.M_at_tau);
    out << i << ',' << time(t.tau) << ',' << time(t.T) << ',' << time(t.T_hat) << ',' << (t.tau ? buf : "") << ','
        << (t.censored() ? 1 : 0) << '\n';
  }
}

MartingaleEstimate estimate_V_martingale(const WalkModel& model, const State& x, double y,
                                         const PoissonSolution& poisson, const MartingaleOptions& options) {
  const auto triples = simulate(model, x, y, poisson, options, StopAt::kTau);
  return summarize(model, triples, poisson, x, y, options, StopAt::kTau);
}

MartingaleEstimate estimate_W(const WalkModel& model, const State& x, double z, const PoissonSolution& poisson,
                              const MartingaleOptions& options) {
  const double y = z - poisson.r_at(x);
  const auto triples = simulate(model, x, y, poisson, options, StopAt::kT);
  return summarize(model, triples, poisson, x, z, options, StopAt::kT);
}

MartingaleEstimate estimate_W_hat(const WalkModel& model, const State& x, double z, const PoissonSolution& poisson,
                                  const MartingaleOptions& options) {
  const double y = z - poisson.r_at(x);
  const auto triples = simulate(model, x, y, poisson, options, StopAt::kTHat);
  return summarize(model, triples, poisson, x, z, options, StopAt::kTHat);
}

std::vector<Rational> increment_conditional_means(const FiniteChainSpec& chain, const PoissonSolution& poisson) {
  std::vector<Rational> out;
  for (std::size_t s = 0; s < chain.size(); ++s) {
    Rational mean = 0;
    for (std::size_t t = 0; t < chain.size(); ++t) mean += chain.transition[s][t] * poisson.theta_exact[t];
    out.push_back(mean - poisson.r_exact[s]);
  }
  return out;
}

}  // namespace condwalk::martingale
