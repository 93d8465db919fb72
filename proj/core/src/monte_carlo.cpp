#include <condwalk/brownian.hpp>
#include <condwalk/errors.hpp>
#include <condwalk/monte_carlo.hpp>
#include <condwalk/parallel.hpp>
#include <condwalk/stats.hpp>

#include <algorithm>
#include <cmath>

namespace condwalk::mc {
namespace {

constexpr std::size_t kBlock = 4096;

void check_samples(const McOptions& options) {
  if (options.n_samples < 1) throw DomainError("n_samples must be at least 1");
}

// Steps until y + S_k <= 0 or max_steps; returns the exit time, or
// max_steps + 1 if the path survives. The end position goes to *position.
template <class Walker, class S>
int run_until_exit(const Walker& walker, S state, double y, int max_steps, Rng& rng, double* position) {
  double sum = y;
  for (int k = 1; k <= max_steps; ++k) {
    state = walker.step(state, rng);
    sum += walker.f(state);
    if (exited(sum)) {
      if (position) *position = sum;
      return k;
    }
  }
  if (position) *position = sum;
  return max_steps + 1;
}

// S_n and S_{2n} along one path, no killing.
template <class Walker, class S>
std::pair<double, double> free_sums(const Walker& walker, S state, int n, int n2, Rng& rng) {
  double sum = 0.0, at_n = 0.0;
  for (int k = 1; k <= n2; ++k) {
    state = walker.step(state, rng);
    sum += walker.f(state);
    if (k == n) at_n = sum;
  }
  return {at_n, sum};
}

EstimateWithError binomial(long hits, long samples, std::uint64_t seed) {
  EstimateWithError e;
  e.n_effective = samples;
  e.seed = seed;
  e.value = static_cast<double>(hits) / static_cast<double>(samples);
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(samples));
  return e;
}

// Var(values) / scale with a 100-group delete-a-group jackknife error.
EstimateWithError jackknife_variance(const std::vector<double>& values, double scale, std::uint64_t seed) {
  const std::size_t n = values.size();
  if (n < 2) throw DomainError("variance needs at least 2 samples");
  const std::size_t groups = std::min<std::size_t>(100, n);
  double shift = 0.0;
  for (double v : values) shift += v;
  shift /= static_cast<double>(n);
  std::vector<double> g1(groups, 0.0), g2(groups, 0.0);
  std::vector<std::size_t> count(groups, 0);
  double t1 = 0.0, t2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t g = i * groups / n;
    const double d = values[i] - shift;
    g1[g] += d;
    g2[g] += d * d;
    ++count[g];
  }
  for (std::size_t g = 0; g < groups; ++g) {
    t1 += g1[g];
    t2 += g2[g];
  }
  auto variance = [](double s1, double s2, double m) { return (s2 - s1 * s1 / m) / (m - 1.0); };
  EstimateWithError e;
  e.seed = seed;
  e.n_effective = static_cast<long>(n);
  e.value = variance(t1, t2, static_cast<double>(n)) / scale;
  std::vector<double> loo(groups);
  double mean_loo = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    const double m = static_cast<double>(n - count[g]);
    loo[g] = m > 1.0 ? variance(t1 - g1[g], t2 - g2[g], m) / scale : e.value;
    mean_loo += loo[g];
  }
  mean_loo /= static_cast<double>(groups);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  e.std_error = std::sqrt(static_cast<double>(groups - 1) / static_cast<double>(groups) * ss);
  return e;
}

}  // namespace

std::vector<EstimateWithError> estimate_survival_curve(const WalkModel& model, const State& x, double y,
                                                       const std::vector<int>& horizons, const McOptions& options) {
  check_samples(options);
  int max_h = 0;
  for (int h : horizons) {
    if (h < 0) throw DomainError("horizon must be non-negative");
    max_h = std::max(max_h, h);
  }
  const auto samples = static_cast<std::size_t>(options.n_samples);
  std::vector<int> exit_time(samples);
  parallel_blocks(samples, kBlock, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    model.visit_walker(x, [&](const auto& walker, const auto& start) {
      for (std::size_t i = begin; i < end; ++i) {
        Rng rng = Rng::for_stream(options.seed, i);
        exit_time[i] = run_until_exit(walker, start, y, max_h, rng, nullptr);
      }
    });
  });
  std::vector<EstimateWithError> out;
  for (int h : horizons) {
    long alive = 0;
    for (int t : exit_time) alive += t > h ? 1 : 0;
    out.push_back(binomial(alive, options.n_samples, options.seed));
  }
  return out;
}

EstimateWithError estimate_survival(const WalkModel& model, const State& x, double y, int n,
                                    const McOptions& options) {
  return estimate_survival_curve(model, x, y, {n}, options).front();
}

EmpiricalLaw conditional_law_mc(const WalkModel& model, const State& x, double y, int n, double sigma,
                                const McOptions& options) {
  check_samples(options);
  if (n < 1) throw DomainError("conditional law needs n >= 1");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  const auto samples = static_cast<std::size_t>(options.n_samples);
  std::vector<double> end_position(samples);
  std::vector<char> alive(samples, 0);
  parallel_blocks(samples, kBlock, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    model.visit_walker(x, [&](const auto& walker, const auto& start) {
      for (std::size_t i = begin; i < end; ++i) {
        Rng rng = Rng::for_stream(options.seed, i);
        alive[i] = run_until_exit(walker, start, y, n, rng, &end_position[i]) > n;
      }
    });
  });
  EmpiricalLaw law;
  law.samples = options.n_samples;
  const double scale = 1.0 / (sigma * std::sqrt(static_cast<double>(n)));
  for (std::size_t i = 0; i < samples; ++i) {
    if (alive[i]) law.values.push_back(end_position[i] * scale);
  }
  law.survivors = static_cast<long>(law.values.size());
  if (law.survivors == 0) throw NoSurvivors("no path survives to n = " + std::to_string(n));
  std::sort(law.values.begin(), law.values.end());
  law.ks_rayleigh = stats::ks_sample_vs_continuous(law.values, [](double t) { return brownian::rayleigh_cdf(t); });
  return law;
}

BerryEsseenDiag berry_esseen_diag(const WalkModel& model, const State& x, int n, double sigma,
                                  const McOptions& options) {
  check_samples(options);
  if (n < 1) throw DomainError("n must be at least 1");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  const auto samples = static_cast<std::size_t>(options.n_samples);
  std::vector<double> scaled(samples);
  const double root = std::sqrt(static_cast<double>(n));
  parallel_blocks(samples, kBlock, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    model.visit_walker(x, [&](const auto& walker, const auto& start) {
      for (std::size_t i = begin; i < end; ++i) {
        Rng rng = Rng::for_stream(options.seed, i);
        scaled[i] = free_sums(walker, start, n, n, rng).second / root;
      }
    });
  });
  std::sort(scaled.begin(), scaled.end());
  BerryEsseenDiag out;
  out.samples = options.n_samples;
  out.distance = stats::ks_sample_vs_continuous(scaled, [sigma](double t) { return brownian::normal_cdf(t / sigma); });
  return out;
}

VarianceEstimate estimate_variance(const WalkModel& model, const State& x, int n, const McOptions& options) {
  check_samples(options);
  if (n < 1) throw DomainError("n must be at least 1");
  const auto samples = static_cast<std::size_t>(options.n_samples);
  std::vector<double> s_n(samples), s_2n(samples);
  parallel_blocks(samples, kBlock, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    model.visit_walker(x, [&](const auto& walker, const auto& start) {
      for (std::size_t i = begin; i < end; ++i) {
        Rng rng = Rng::for_stream(options.seed, i);
        std::tie(s_n[i], s_2n[i]) = free_sums(walker, start, n, 2 * n, rng);
      }
    });
  });
  VarianceEstimate out;
  out.at_n = jackknife_variance(s_n, n, options.seed);
  out.at_2n = jackknife_variance(s_2n, 2.0 * n, options.seed);
  const double se = std::hypot(out.at_n.std_error, out.at_2n.std_error);
  out.stable = std::abs(out.at_n.value - out.at_2n.value) <= 3.0 * se;
  return out;
}

}  // namespace condwalk::mc
