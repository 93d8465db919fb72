#include <condwalk/errors.hpp>
#include <condwalk/exact.hpp>
#include <condwalk/parallel.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace condwalk::exact {
namespace {

template <class T>
T from_rational(const Rational& q) {
  if constexpr (std::is_same_v<T, Rational>) {
    return q;
  } else {
    return to_double(q);
  }
}

// Solves A v = b over the rationals by Gauss-Jordan elimination. Returns
// false when A is singular.
bool solve_rational(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::vector<Rational>& out) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    const Rational inv = 1 / a[col][col];
    for (std::size_t j = col; j < n; ++j) a[col][j] *= inv;
    b[col] *= inv;
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const Rational factor = a[row][col];
      for (std::size_t j = col; j < n; ++j) a[row][j] -= factor * a[col][j];
      b[row] -= factor * b[col];
    }
  }
  out = std::move(b);
  return true;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<Rational> stationary_distribution(const FiniteChainSpec& chain) {
  if (!is_irreducible(chain)) throw NotIrreducible("stationary distribution needs an irreducible chain");
  const std::size_t n = chain.size();
  // (P^T - I) nu = 0 with the last equation replaced by sum(nu) = 1.
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
  std::vector<Rational> b(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = chain.transition[j][i] - (i == j ? 1 : 0);
  }
  for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1;
  b[n - 1] = 1;
  std::vector<Rational> nu;
  if (!solve_rational(std::move(a), std::move(b), nu)) {
    throw NotIrreducible("stationary system is singular");
  }
  return nu;
}

Rational centering_check(const FiniteChainSpec& chain, const std::vector<Rational>& nu) {
  Rational mu = 0;
  for (std::size_t i = 0; i < chain.size(); ++i) mu += nu[i] * chain.f_values[i];
  return mu;
}

VarianceSeries asymptotic_variance_series(const FiniteChainSpec& chain, const std::vector<Rational>& nu,
                                          const VarianceOptions& options) {
  const Rational mu = centering_check(chain, nu);
  if (mu != 0) throw NotCentered("nu(f) = " + to_string(mu) + ", asymptotics need nu(f) = 0");
  const std::size_t n = chain.size();
  std::vector<double> f(n), w(n);
  std::vector<std::vector<double>> p(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = to_double(chain.f_values[i]);
    w[i] = to_double(nu[i]);
    for (std::size_t j = 0; j < n; ++j) p[i][j] = to_double(chain.transition[i][j]);
  }
  VarianceSeries out;
  for (std::size_t i = 0; i < n; ++i) out.sigma2 += w[i] * f[i] * f[i];
  std::vector<double> pf = f, next(n);
  int small_in_a_row = 0;
  for (std::size_t k = 1; k <= options.max_terms; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += p[i][j] * pf[j];
      next[i] = s;
    }
    pf.swap(next);
    double term = 0.0;
    for (std::size_t i = 0; i < n; ++i) term += w[i] * f[i] * pf[i];
    term *= 2.0;
    out.sigma2 += term;
    out.terms = k;
    out.last_term = term;
    // Two consecutive small terms, so an accidental zero does not stop early.
    small_in_a_row = std::abs(term) < options.term_cutoff ? small_in_a_row + 1 : 0;
    if (small_in_a_row >= 2) break;
  }
  if (out.sigma2 <= options.degeneracy_threshold) {
    throw DegenerateVariance("sigma^2 = " + std::to_string(out.sigma2) + " is not positive");
  }
  return out;
}

double affine_asymptotic_variance(const WalkModel& model) {
  if (const auto* s = model.affine1d_spec()) {
    const double ea = s->a.mean();
    const double ea2 = s->a.moment(2.0);
    if (!(ea2 < 1.0)) throw DomainError("E(a^2) >= 1: no stationary second moment");
    const double var_x = b_second_moment(s->b) / (1.0 - ea2);
    const double sigma2 = var_x * (1.0 + ea) / (1.0 - ea);
    if (sigma2 <= 1e-12) throw DegenerateVariance("affine sigma^2 is not positive");
    return sigma2;
  }
  const auto* rd = model.affine_rd_spec();
  if (rd == nullptr) throw DomainError("affine_asymptotic_variance needs an affine model");
  const int d = rd->dimension;
  Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(d * d, d * d);
  Eigen::MatrixXd mean_a = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd bb = Eigen::MatrixXd::Zero(d, d);
  for (const auto& g : rd->g) {
    mean_a += g.prob * g.A;
    bb += g.prob * g.B * g.B.transpose();
    // vec(A S A^T) = (A kron A) vec(S) with column-major vec.
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) kron.block(i * d, j * d, d, d) += g.prob * g.A(i, j) * g.A;
    }
  }
  if (!(spectral_radius(kron) < 1.0)) throw DomainError("second-moment operator is not contracting");
  if (!(spectral_radius(mean_a) < 1.0)) throw DomainError("E(A) has spectral radius >= 1");
  const Eigen::VectorXd vec_bb = Eigen::Map<const Eigen::VectorXd>(bb.data(), d * d);
  const Eigen::VectorXd vec_sigma =
      (Eigen::MatrixXd::Identity(d * d, d * d) - kron).partialPivLu().solve(vec_bb);
  const Eigen::MatrixXd sigma = Eigen::Map<const Eigen::MatrixXd>(vec_sigma.data(), d, d);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd tail = (id - mean_a.transpose()).inverse() - id;
  const double sigma2 = rd->u.dot(sigma * rd->u) + 2.0 * rd->u.dot(sigma * tail * rd->u);
  if (sigma2 <= 1e-12) throw DegenerateVariance("affine sigma^2 is not positive");
  return sigma2;
}

// ---- lattice ----

long Lattice::max_step() const { return steps.empty() ? 0 : *std::max_element(steps.begin(), steps.end()); }
long Lattice::min_step() const { return steps.empty() ? 0 : *std::min_element(steps.begin(), steps.end()); }

Lattice build_lattice(const FiniteChainSpec& chain, const Rational& y, DpMode mode, const LatticeOptions& options) {
  std::vector<Rational> values = chain.f_values;
  values.push_back(y);
  Lattice lattice;
  lattice.unit = lattice_gcd(values);
  if (lattice.unit == 0) lattice.unit = 1;
  const bool too_fine = lattice.unit.get_den() > options.max_denominator;
  if (too_fine && mode == DpMode::kExactRational) {
    throw NonLatticeInput("lattice spacing " + to_string(lattice.unit) + " is finer than 1/" +
                          std::to_string(options.max_denominator));
  }
  if (too_fine) {
    // Float mode: snap to the user grid; bias is O(n * grid).
    lattice.unit = options.float_grid;
    lattice.binned = true;
    auto snap = [&](const Rational& v) {
      const double k = std::round(to_double(v / lattice.unit));
      return static_cast<long>(k);
    };
    for (const auto& f : chain.f_values) lattice.steps.push_back(snap(f));
    lattice.start = snap(y);
    return lattice;
  }
  for (const auto& f : chain.f_values) lattice.steps.push_back(lattice_index(f, lattice.unit));
  lattice.start = lattice_index(y, lattice.unit);
  return lattice;
}

namespace {

void check_cell_budget(const Lattice& lattice, std::size_t states, int n_max, std::uint64_t budget) {
  const long top = std::max(lattice.start, 1L) + static_cast<long>(n_max) * std::max(lattice.max_step(), 0L);
  const long bottom = std::max(1L, lattice.start + static_cast<long>(n_max) * std::min(lattice.min_step(), 0L));
  const double cells = static_cast<double>(states) * static_cast<double>(top - bottom + 1);
  if (cells > static_cast<double>(budget)) {
    throw CellBudgetExceeded("lattice DP needs up to " + std::to_string(static_cast<long double>(cells)) +
                             " cells, budget is " + std::to_string(budget));
  }
}

}  // namespace

template <class T>
T LatticeFrontier<T>::total() const {
  T sum = 0;
  for (const auto& row : mass) {
    for (const auto& m : row) sum += m;
  }
  return sum;
}

template <class T>
LatticeDp<T>::LatticeDp(const FiniteChainSpec& chain, std::size_t x, const Lattice& lattice,
                        const LatticeOptions& options)
    : lattice_(lattice), options_(options), survival_(1), last_exit_(0), total_exit_(0) {
  const std::size_t n = chain.size();
  if (x >= n) throw DomainError("start state out of range");
  trans_.assign(n, std::vector<T>(n));
  for (std::size_t from = 0; from < n; ++from) {
    for (std::size_t to = 0; to < n; ++to) trans_[to][from] = from_rational<T>(chain.transition[from][to]);
  }
  frontier_.unit = lattice.unit;
  frontier_.mass.assign(n, std::vector<T>(1, T(0)));
  // S_0 = 0 carries no positivity constraint; tau_y only looks at k >= 1.
  frontier_.lo = lattice.start;
  frontier_.mass[x][0] = 1;
}

template <class T>
void LatticeDp<T>::step() {
  const std::size_t n = trans_.size();
  const std::size_t width = frontier_.width();
  const long lo = frontier_.lo;
  const long new_lo = std::max(1L, lo + lattice_.min_step());
  const long new_hi = frontier_.hi() + lattice_.max_step();
  LatticeFrontier<T> next;
  next.unit = frontier_.unit;
  next.horizon = frontier_.horizon + 1;
  if (new_hi < new_lo) {
    // Every reachable position is non-positive.
    next.lo = 1;
    next.mass.assign(n, std::vector<T>(1, T(0)));
  } else {
    next.lo = new_lo;
    next.mass.assign(n, std::vector<T>(static_cast<std::size_t>(new_hi - new_lo + 1), T(0)));
  }

  constexpr std::size_t kBlock = 2048;
  const std::size_t blocks = block_count(width, kBlock);
  std::vector<T> exit_by_block(n * blocks, T(0));
  for (std::size_t to = 0; to < n; ++to) {
    const long shift = lattice_.steps[to];
    const auto& column = trans_[to];
    auto& dest = next.mass[to];
    parallel_blocks(width, kBlock, options_.threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
      T exit_sum = 0;
      for (std::size_t i = begin; i < end; ++i) {
        T c = 0;
        for (std::size_t from = 0; from < n; ++from) {
          if (column[from] != 0 && frontier_.mass[from][i] != 0) c += column[from] * frontier_.mass[from][i];
        }
        if (c == 0) continue;
        const long pos = lo + static_cast<long>(i) + shift;
        if (pos <= 0) {
          exit_sum += c;
        } else {
          dest[static_cast<std::size_t>(pos - next.lo)] = c;
        }
      }
      exit_by_block[to * blocks + b] = exit_sum;
    });
  }
  T exit_now = 0;
  for (const auto& e : exit_by_block) exit_now += e;
  frontier_ = std::move(next);
  trim();
  last_exit_ = exit_now;
  total_exit_ += exit_now;
  survival_ = frontier_.total();
}

template <class T>
void LatticeDp<T>::trim() {
  auto& mass = frontier_.mass;
  const std::size_t width = frontier_.width();
  auto column_empty = [&](std::size_t i) {
    for (const auto& row : mass) {
      if (row[i] != 0) return false;
    }
    return true;
  };
  std::size_t first = 0;
  while (first < width && column_empty(first)) ++first;
  if (first == width) {
    for (auto& row : mass) row.assign(1, T(0));
    frontier_.lo = 1;
    return;
  }
  std::size_t last = width - 1;
  while (last > first && column_empty(last)) --last;
  if (first == 0 && last == width - 1) return;
  for (auto& row : mass) row = std::vector<T>(row.begin() + first, row.begin() + last + 1);
  frontier_.lo += static_cast<long>(first);
}

template <class T>
T LatticeDp<T>::expectation() const {
  T sum = 0;
  const std::size_t width = frontier_.width();
  for (std::size_t i = 0; i < width; ++i) {
    T column = 0;
    for (const auto& row : frontier_.mass) column += row[i];
    if (column != 0) column *= T(frontier_.lo + static_cast<long>(i));
    sum += column;
  }
  return sum * from_rational<T>(frontier_.unit);
}

template <class T>
T LatticeDp<T>::mass_above(const Rational& level) const {
  T sum = 0;
  for (std::size_t i = 0; i < frontier_.width(); ++i) {
    if (Rational(frontier_.lo + static_cast<long>(i)) * frontier_.unit <= level) continue;
    for (const auto& row : frontier_.mass) sum += row[i];
  }
  return sum;
}

template struct LatticeFrontier<Rational>;
template struct LatticeFrontier<double>;
template class LatticeDp<Rational>;
template class LatticeDp<double>;

template <class T>
SurvivalRun<T> survival_dp(const FiniteChainSpec& chain, std::size_t x, const Rational& y, int n_max,
                           const LatticeOptions& options) {
  if (n_max < 0) throw DomainError("n_max must be non-negative");
  const DpMode mode = std::is_same_v<T, Rational> ? DpMode::kExactRational : DpMode::kFloat;
  SurvivalRun<T> run;
  run.lattice = build_lattice(chain, y, mode, options);
  check_cell_budget(run.lattice, chain.size(), n_max, options.cell_budget);
  LatticeDp<T> dp(chain, x, run.lattice, options);
  auto& c = run.curve;
  c.p.push_back(T(1));
  c.e.push_back(from_rational<T>(run.lattice.unit) * T(run.lattice.start));
  c.exit_mass.push_back(T(0));
  for (int k = 1; k <= n_max; ++k) {
    dp.step();
    c.p.push_back(dp.survival());
    c.e.push_back(dp.expectation());
    c.exit_mass.push_back(dp.last_exit_mass());
  }
  run.frontier = dp.frontier();
  return run;
}

template SurvivalRun<Rational> survival_dp(const FiniteChainSpec&, std::size_t, const Rational&, int,
                                           const LatticeOptions&);
template SurvivalRun<double> survival_dp(const FiniteChainSpec&, std::size_t, const Rational&, int,
                                         const LatticeOptions&);

void write_survival_csv(std::ostream& out, const SurvivalCurve<Rational>& curve) {
  out << "n,p_n,e_n,exit_mass_n\n";
  for (std::size_t n = 0; n < curve.p.size(); ++n) {
    out << n << ',' << to_string(curve.p[n]) << ',' << to_string(curve.e[n]) << ',' << to_string(curve.exit_mass[n])
        << '\n';
  }
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_survival_csv(std::ostream& out, const SurvivalCurve<double>& curve) {
  out << "n,p_n,e_n,exit_mass_n\n";
  for (std::size_t n = 0; n < curve.p.size(); ++n) {
    out << n << ',' << g17(curve.p[n]) << ',' << g17(curve.e[n]) << ',' << g17(curve.exit_mass[n]) << '\n';
  }
}

// ---- conditional law ----

double ConditionalLaw::operator()(double x) const {
  auto it = std::upper_bound(t.begin(), t.end(), x);
  if (it == t.begin()) return 0.0;
  return cdf[static_cast<std::size_t>(it - t.begin()) - 1];
}

ConditionalLaw conditional_law_dp(const FiniteChainSpec& chain, std::size_t x, const Rational& y, int n,
                                  double sigma, const LatticeOptions& options) {
  if (n < 1) throw DomainError("conditional law needs n >= 1");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  const Lattice lattice = build_lattice(chain, y, DpMode::kFloat, options);
  check_cell_budget(lattice, chain.size(), n, options.cell_budget);
  LatticeDp<double> dp(chain, x, lattice, options);
  for (int k = 0; k < n; ++k) dp.step();
  if (!(dp.survival() > 0.0)) {
    throw ExtinctAtHorizon("P_x(tau_y > " + std::to_string(n) + ") = 0");
  }
  const auto& fr = dp.frontier();
  const double scale = to_double(fr.unit) / (sigma * std::sqrt(static_cast<double>(n)));
  ConditionalLaw law;
  std::vector<double> weights;
  for (std::size_t i = 0; i < fr.width(); ++i) {
    double w = 0.0;
    for (const auto& row : fr.mass) w += row[i];
    if (w == 0.0) continue;
    law.t.push_back(static_cast<double>(fr.lo + static_cast<long>(i)) * scale);
    weights.push_back(w);
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double running = 0.0;
  for (double w : weights) {
    running += w;
    law.cdf.push_back(running / total);
  }
  law.cdf.back() = 1.0;
  law.survival = dp.survival();
  return law;
}

void write_cdf_csv(std::ostream& out, const ConditionalLaw& law) {
  out << "t,cdf\n";
  for (std::size_t i = 0; i < law.t.size(); ++i) out << g17(law.t[i]) << ',' << g17(law.cdf[i]) << '\n';
}

// ---- decay detection ----

std::pair<double, double> log_linear_fit(const std::vector<double>& p, int n_from, int n_to) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double m = n_to - n_from + 1;
  for (int n = n_from; n <= n_to; ++n) {
    const double x = n;
    const double y = std::log(p[static_cast<std::size_t>(n)]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double cov = sxy - sx * sy / m;
  const double vx = sxx - sx * sx / m;
  const double vy = syy - sy * sy / m;
  const double slope = cov / vx;
  const double r2 = vy <= 0.0 ? 1.0 : (cov * cov) / (vx * vy);
  return {slope, r2};
}

bool decays_geometrically(const std::vector<double>& p, int n_from, int n_to, double* rate) {
  if (n_to - n_from < 3 || n_to >= static_cast<int>(p.size())) return false;
  for (int n = n_from; n <= n_to; ++n) {
    if (!(p[static_cast<std::size_t>(n)] > 0.0)) return false;
  }
  const auto [slope, r2] = log_linear_fit(p, n_from, n_to);
  const double drop = std::log(p[static_cast<std::size_t>(n_from)] / p[static_cast<std::size_t>(n_to)]);
  if (rate) *rate = -slope;
  return r2 > 0.999 && drop >= 1.0 && slope < 0.0;
}

std::string_view to_string(HarmonicMethod m) {
  switch (m) {
    case HarmonicMethod::kDpLimit: return "DP_LIMIT";
    case HarmonicMethod::kExitSolve: return "EXIT_SOLVE";
    case HarmonicMethod::kMartingaleMc: return "MARTINGALE_MC";
  }
  return "UNKNOWN";
}

std::string_view to_string(DomainKind k) {
  switch (k) {
    case DomainKind::kPositive: return "POSITIVE";
    case DomainKind::kZeroImmediate: return "ZERO_IMMEDIATE";
    case DomainKind::kZeroExponential: return "ZERO_EXPONENTIAL";
    case DomainKind::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

}  // namespace condwalk::exact
