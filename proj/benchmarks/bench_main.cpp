#include <condwalk/exact.hpp>
#include <condwalk/martingale.hpp>
#include <condwalk/monte_carlo.hpp>

#include <benchmark/benchmark.h>

using namespace condwalk;

namespace {

FiniteChainSpec finite4() {
  FiniteChainSpec c;
  c.labels = {"-1", "1", "-3", "7/6"};
  c.f_values = {Rational(-1), Rational(1), Rational(-3), Rational(7, 6)};
  const Rational h(1, 2);
  c.transition = {{0, h, h, 0}, {h, 0, h, 0}, {0, 0, 0, 1}, {0, h, 0, h}};
  return c;
}

void BM_FloatDp(benchmark::State& state) {
  const auto c = finite4();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto run = exact::survival_dp<double>(c, 2, Rational(2), n);
    benchmark::DoNotOptimize(run.curve.p.back());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FloatDp)->Arg(256)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_RationalDp(benchmark::State& state) {
  const auto c = finite4();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto run = exact::survival_dp<Rational>(c, 2, Rational(2), n);
    benchmark::DoNotOptimize(run.curve.p.back());
  }
}
BENCHMARK(BM_RationalDp)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_HarmonicValue(benchmark::State& state) {
  const auto c = finite4();
  const Rational y(static_cast<long>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exact::harmonic_value_dp(c, 2, y).value);
}
BENCHMARK(BM_HarmonicValue)->Arg(2)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_McSurvivalFinite(benchmark::State& state) {
  const auto model = WalkModel::finite(finite4());
  mc::McOptions opt;
  opt.n_samples = state.range(0);
  opt.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc::estimate_survival(model, State{std::size_t{2}}, 2.0, 1024, opt).value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McSurvivalFinite)->Args({100000, 1})->Args({100000, 4})->Unit(benchmark::kMillisecond);

void BM_McSurvivalAffine(benchmark::State& state) {
  Affine1DSpec spec;
  spec.a = {{-0.5, 0.5}, {0.5, 0.5}};
  spec.b = UniformLaw{-1.0, 1.0};
  const auto model = WalkModel::affine1d(spec);
  mc::McOptions opt;
  opt.n_samples = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc::estimate_survival(model, State{0.0}, 2.0, 1024, opt).value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McSurvivalAffine)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_MartingaleV(benchmark::State& state) {
  const auto c = finite4();
  const auto model = WalkModel::finite(c);
  const auto poisson = martingale::solve_poisson(c, exact::stationary_distribution(c));
  martingale::MartingaleOptions opt;
  opt.n_samples = state.range(0);
  opt.n_max = 100000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        martingale::estimate_V_martingale(model, State{std::size_t{2}}, 2.0, poisson, opt).estimate.value);
  }
}
BENCHMARK(BM_MartingaleV)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
