#include <condwalk/errors.hpp>
#include <condwalk/exact.hpp>
#include <condwalk/martingale.hpp>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <optional>

namespace condwalk::exact {
namespace {

// Exit functional on a lattice truncated at level K (lattice units):
//   H(s, k) = sum_t P(s, t) [k' <= 0 ? k' unit + r(t) : H(t, k')],  k' = k + step(t),
// where cells above K are folded back by K / 2. Returns
// V = y + r(x) - E_x[(y + S_tau) + r(X_tau)].
double exit_solve(const FiniteChainSpec& chain, std::size_t x, const Lattice& lattice,
                  const martingale::PoissonSolution& poisson, long level) {
  const std::size_t n = chain.size();
  const long fold = level / 2;
  const double unit = to_double(lattice.unit);
  std::vector<std::vector<double>> p(n, std::vector<double>(n));
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) p[s][t] = to_double(chain.transition[s][t]);
  }
  auto index = [&](std::size_t s, long k) { return static_cast<Eigen::Index>((k - 1) * static_cast<long>(n) + s); };
  auto target = [&](long k) { return k > level ? k - fold : k; };

  const Eigen::Index size = static_cast<Eigen::Index>(level) * static_cast<Eigen::Index>(n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(size) * (n + 1));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  for (long k = 1; k <= level; ++k) {
    for (std::size_t s = 0; s < n; ++s) {
      const auto row = index(s, k);
      triplets.emplace_back(row, row, 1.0);
      for (std::size_t t = 0; t < n; ++t) {
        if (p[s][t] == 0.0) continue;
        const long next = k + lattice.steps[t];
        if (next <= 0) {
          rhs[row] += p[s][t] * (static_cast<double>(next) * unit + poisson.r[t]);
        } else {
          triplets.emplace_back(row, index(t, target(next)), -p[s][t]);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> a(size, size);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) throw DomainError("exit functional system is singular");
  const Eigen::VectorXd h = lu.solve(rhs);

  // First step from the start, which may itself sit at or below 0.
  double exit_value = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (p[x][t] == 0.0) continue;
    const long next = lattice.start + lattice.steps[t];
    if (next <= 0) {
      exit_value += p[x][t] * (static_cast<double>(next) * unit + poisson.r[t]);
    } else {
      exit_value += p[x][t] * h[index(t, target(next))];
    }
  }
  return static_cast<double>(lattice.start) * unit + poisson.r[x] - exit_value;
}

}  // namespace

HarmonicEstimate harmonic_value_dp(const FiniteChainSpec& chain, std::size_t x, const Rational& y,
                                   const HarmonicOptions& options) {
  if (x >= chain.size()) throw DomainError("start state out of range");
  const auto nu = stationary_distribution(chain);
  asymptotic_variance_series(chain, nu);  // NotCentered / DegenerateVariance
  const Lattice lattice = build_lattice(chain, y, DpMode::kExactRational, options.lattice);

  // Cauchy probe on e_n over doubling gaps. Far from 0, e_n sits on a plateau
  // near y + r(x) until n ~ y^2, so a small gap alone is not trusted.
  const int probe = std::max(2, std::min(options.n_cap, options.probe_cap));
  LatticeDp<double> dp(chain, x, lattice, options.lattice);
  std::vector<double> p{1.0};
  double previous = to_double(y);
  int small_gaps = 0;
  std::optional<HarmonicEstimate> cauchy;
  for (int n = 1; n <= probe; ++n) {
    dp.step();
    p.push_back(dp.survival());
    if (dp.survival() == 0.0) {
      HarmonicEstimate out;
      out.value = 0.0;
      out.converged_at = n;
      return out;
    }
    if ((n & (n - 1)) != 0) continue;
    const double e = dp.expectation();
    small_gaps = std::abs(e - previous) < options.tol ? small_gaps + 1 : 0;
    previous = e;
    if (small_gaps >= 2) {
      HarmonicEstimate out;
      out.value = std::max(e, 0.0);
      out.error_bound = options.tol;
      out.converged_at = n;
      if (decays_geometrically(p, n / 2, n)) {
        out.value = 0.0;
        out.heuristic = true;
        return out;
      }
      cauchy = out;
      break;
    }
  }

  const auto poisson = martingale::solve_poisson(chain, nu);
  const long span = std::max(1L, lattice.max_step() - lattice.min_step());
  long level = 2 * std::max(lattice.start, 0L) +
               static_cast<long>(std::ceil(options.base_level_spans * static_cast<double>(span)));
  level = std::max(level, 2 * span);
  double v = exit_solve(chain, x, lattice, poisson, level);
  HarmonicEstimate out;
  out.method = HarmonicMethod::kExitSolve;
  out.converged = false;
  for (int i = 0; i < options.max_refinements; ++i) {
    level *= 2;
    const double refined = exit_solve(chain, x, lattice, poisson, level);
    const double gap = std::abs(refined - v);
    v = refined;
    out.error_bound = gap + 1e-12 * std::max(1.0, std::abs(v));
    if (gap <= options.tol) {
      out.converged = true;
      break;
    }
  }
  out.value = std::max(v, 0.0);
  if (cauchy && out.converged && std::abs(cauchy->value - out.value) <= options.tol) return *cauchy;
  return out;
}

}  // namespace condwalk::exact
