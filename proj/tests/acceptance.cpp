// Acceptance experiments A1..A11. Prints one PASS/FAIL line per criterion;
// with an argument (e.g. "A4") runs only that criterion. Exit status is 0
// iff every criterion that ran passed.

#include "oracles.hpp"

#include <condwalk/brownian.hpp>
#include <condwalk/errors.hpp>
#include <condwalk/exact.hpp>
#include <condwalk/martingale.hpp>
#include <condwalk/monte_carlo.hpp>
#include <condwalk/verify.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>

using namespace condwalk;

namespace {

struct Outcome {
  bool pass = false;
  double metric = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

const std::size_t kMinus1 = 0, kPlus1 = 1, kMinus3 = 2, kSevenSixths = 3;

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

bool halving_for(const FiniteChainSpec& c, std::size_t x, const Rational& y, int n_max, int& first_bad) {
  const auto run = exact::survival_dp<Rational>(c, x, y, n_max);
  for (int n = 0; n <= n_max; ++n) {
    Rational expected(1);
    mpz_mul_2exp(expected.get_den_mpz_t(), expected.get_den_mpz_t(), static_cast<mp_bitcnt_t>(n));
    if (run.curve.p[static_cast<std::size_t>(n)] != expected) {
      first_bad = n;
      return false;
    }
  }
  return true;
}

Outcome a1() {
  const auto c = oracle::finite4();
  struct Case {
    std::size_t x;
    Rational y;
    const char* name;
  };
  const Case cases[] = {{kPlus1, Rational(2), "(1,2)"}, {kMinus1, Rational(0), "(-1,0)"},
                        {kMinus1, Rational(3, 2), "(-1,1.5)"}};
  Outcome o;
  o.pass = true;
  int failures = 0;
  for (const auto& k : cases) {
    int bad = -1;
    const bool ok = halving_for(c, k.x, k.y, 30, bad);
    o.detail += std::string(k.name) + (ok ? ":exact " : ":differs_at_n=" + std::to_string(bad) + " ");
    if (!ok) {
      const auto run = exact::survival_dp<Rational>(c, k.x, k.y, bad);
      o.detail += "(p_n=" + to_string(run.curve.p.back()) + ") ";
      ++failures;
      o.pass = false;
    }
  }
  o.metric = failures;
  o.tolerance = 0;
  return o;
}

Outcome a2() {
  const auto report = verify::tail(oracle::finite4(), kMinus3, Rational(2));
  Outcome o;
  o.pass = report.passed();
  o.metric = report.checks.front().metric;
  o.tolerance = report.checks.front().tolerance;
  for (const auto& ch : report.checks) o.detail += ch.name + "=" + fmt(ch.metric) + " " + ch.detail + "; ";
  return o;
}

Outcome a3() {
  const auto report = verify::rayleigh(oracle::finite4(), kSevenSixths, Rational(1));
  Outcome o;
  o.pass = report.passed();
  o.metric = report.checks.front().metric;
  o.tolerance = report.checks.front().tolerance;
  for (const auto& ch : report.checks) o.detail += ch.name + "=" + fmt(ch.metric) + "; ";
  return o;
}

Outcome a4() {
  const auto c = oracle::finite4();
  std::vector<exact::DomainPoint> points;
  for (std::size_t x = 0; x < c.size(); ++x) {
    for (int y : {1, 5, 25}) points.emplace_back(x, Rational(y));
  }
  const auto report = verify::harmonicity(c, points);
  Outcome o;
  o.pass = report.passed() && report.checks.size() == 12;
  for (const auto& ch : report.checks) {
    o.metric = std::max(o.metric, ch.metric);
    o.tolerance = ch.tolerance;
    if (!ch.pass) o.detail += ch.name + " ";
  }
  o.detail += "max_residual over " + std::to_string(report.checks.size()) + " points";
  return o;
}

Outcome a5() {
  const auto model = load_model_file(oracle::fixture("affine1d.json"));
  mc::McOptions opt;
  opt.n_samples = 1000000;
  opt.threads = worker_count();
  const auto curve = mc::estimate_survival_curve(model, State{0.0}, 2.0, {1024, 2048}, opt);
  Outcome o;
  o.metric = curve[1].value * std::sqrt(2048.0) / (curve[0].value * std::sqrt(1024.0));
  o.tolerance = 0.15;
  o.pass = std::abs(o.metric - 1.0) <= o.tolerance;
  o.detail = "p_1024=" + fmt(curve[0].value) + " p_2048=" + fmt(curve[1].value);
  return o;
}

Outcome a6() {
  const auto model = load_model_file(oracle::fixture("affine1d.json"));
  mc::McOptions opt;
  opt.n_samples = 1000000;
  opt.threads = worker_count();
  const auto mc_p1 = mc::estimate_survival(model, State{0.0}, -1.5, 1, opt);
  const auto dp = exact::survival_dp<Rational>(oracle::finite4(), kPlus1, Rational(1, 2), 1);
  Outcome o;
  o.metric = mc_p1.value + std::abs(to_double(dp.curve.p[1]));
  o.tolerance = 0.0;
  o.pass = mc_p1.value == 0.0 && dp.curve.p[1] == 0;
  o.detail = "affine p_1=" + fmt(mc_p1.value) + " over " + std::to_string(mc_p1.n_effective) +
             " paths; dp p_1=" + to_string(dp.curve.p[1]);
  return o;
}

Outcome a7() {
  const auto c = oracle::finite4();
  const auto far = exact::harmonic_value_dp(c, kSevenSixths, Rational(100));
  Outcome o;
  o.metric = far.value / 100.0;
  o.tolerance = 0.1;
  bool monotone = true;
  double previous = -1.0;
  std::string grid;
  for (const Rational y : {Rational(1, 2), Rational(1), Rational(2), Rational(4), Rational(8), Rational(16)}) {
    const auto v = exact::harmonic_value_dp(c, kSevenSixths, y);
    grid += fmt(v.value) + " ";
    if (v.value < previous) monotone = false;
    previous = v.value;
  }
  o.pass = far.converged && std::abs(o.metric - 1.0) <= o.tolerance && monotone;
  o.detail = "V(7/6,100)=" + fmt(far.value) + " grid=[" + grid + "] monotone=" + (monotone ? "yes" : "no");
  return o;
}

Outcome a8() {
  const auto c = oracle::finite4();
  const auto model = WalkModel::finite(c);
  const auto dp = exact::harmonic_value_dp(c, kMinus3, Rational(2));
  const auto poisson = martingale::solve_poisson(c, exact::stationary_distribution(c));
  martingale::MartingaleOptions opt;
  opt.n_samples = 100000;
  opt.threads = worker_count();
  Outcome o;
  try {
    const auto est = martingale::estimate_V_martingale(model, State{kMinus3}, 2.0, poisson, opt);
    o.metric = std::abs(est.estimate.value - dp.value);
    o.tolerance = est.estimate.error_bound + 1e-6;
    o.pass = o.metric <= o.tolerance && est.identity_violations == 0;
    o.detail = "V_mc=" + fmt(est.estimate.value) + " V_dp=" + fmt(dp.value) + " censored=" +
               fmt(est.censored_fraction) + " identity_checks=" + std::to_string(est.path_checks) + " violations=" + std::to_string(est.identity_violations);
  } catch (const IdentityViolation& e) {
    o.pass = false;
    o.detail = std::string("identity violated: ") + e.what();
  }
  return o;
}

Outcome a9() {
  const double closed = brownian::bm_survival({1.0, 1.0, 1.0});
  const double quad = oracle::simpson(oracle::killed_bm_density(1.0, 1.0, 1.0), 0.0, 11.0, 1e-13);
  double scaling = 0.0;
  for (const auto& p : std::vector<brownian::BrownianParams>{{1.0, 1.0, 1.0}, {0.3, 2.0, 5.0}, {4.0, 0.7, 17.0}}) {
    const double base = brownian::bm_survival(p);
    scaling = std::max(scaling, std::abs(base - brownian::bm_survival({p.y / p.sigma, 1.0, p.n})));
    scaling = std::max(scaling, std::abs(base - brownian::bm_survival({p.y, p.sigma * std::sqrt(p.n), 1.0})));
  }
  Outcome o;
  o.metric = std::abs(closed - quad);
  o.tolerance = 1e-8;
  o.pass = o.metric <= o.tolerance && scaling <= 1e-14;
  o.detail = "closed=" + fmt(closed) + " quadrature=" + fmt(quad) + " scaling_gap=" + fmt(scaling);
  return o;
}

Outcome a10() {
  const auto P = exact::DomainKind::kPositive, E = exact::DomainKind::kZeroExponential,
             I = exact::DomainKind::kZeroImmediate;
  const std::vector<exact::DomainPoint> points{
      {kMinus1, Rational(5, 2)}, {kPlus1, Rational(7, 2)}, {kMinus3, Rational(-1)},  {kSevenSixths, Rational(-1)},
      {kMinus1, Rational(0)},    {kMinus1, Rational(2)},   {kPlus1, Rational(3, 2)}, {kPlus1, Rational(3)},
      {kPlus1, Rational(1, 2)},  {kMinus1, Rational(-1)},  {kMinus3, Rational(-2)}};
  const std::vector<exact::DomainKind> expected{P, P, P, P, E, E, E, E, I, I, I};
  const auto result = verify::domain(oracle::finite4(), points, {3.0, 10.0}, 64, expected);
  Outcome o;
  o.pass = result.report.passed();
  for (const auto& ch : result.report.checks) {
    if (!ch.pass) {
      o.metric += 1.0;
      o.detail += ch.name + " " + ch.detail + "; ";
    }
  }
  o.detail += std::to_string(points.size()) + " points x 2 gammas";
  return o;
}

Outcome a11() {
  const auto c = oracle::finite4();
  int mismatches = 0, compared = 0;
  for (std::size_t x = 0; x < c.size(); ++x) {
    for (const Rational y : {Rational(-1), Rational(0), Rational(1, 2), Rational(2), Rational(5, 2), Rational(4)}) {
      const auto run = exact::survival_dp<Rational>(c, x, y, 12);
      const auto sums = oracle::enumerate_paths(c, x, y, 12);
      for (std::size_t n = 0; n <= 12; ++n) {
        ++compared;
        if (run.curve.p[n] != sums.p[n]) ++mismatches;
      }
    }
  }
  const auto iid = oracle::iid_pm1();
  double worst = 0.0;
  for (int y = 1; y <= 10; ++y) {
    worst = std::max(worst, std::abs(exact::harmonic_value_dp(iid, 1, Rational(y)).value - y));
  }
  Outcome o;
  o.metric = worst;
  o.tolerance = 1e-6;
  o.pass = mismatches == 0 && worst <= 1e-6;
  o.detail = std::to_string(compared - mismatches) + "/" + std::to_string(compared) +
             " enumeration values bit-exact; max |V(y)-y|=" + fmt(worst);
  return o;
}

struct Criterion {
  std::function<Outcome()> run;
  double budget_seconds;  // 0: no runtime requirement
};

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, Criterion> criteria{
      {"A1", {a1, 1.0}},  {"A2", {a2, 120.0}}, {"A3", {a3, 120.0}}, {"A4", {a4, 60.0}},
      {"A5", {a5, 120.0}}, {"A6", {a6, 0.0}},   {"A7", {a7, 0.0}},   {"A8", {a8, 0.0}},
      {"A9", {a9, 0.0}},  {"A10", {a10, 0.0}}, {"A11", {a11, 0.0}}};
  std::vector<std::string> order{"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11"};
  if (argc > 1) order.assign(argv + 1, argv + argc);

  bool all = true;
  for (const auto& id : order) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", id.c_str());
      return 3;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double budget = it->second.budget_seconds;
    const bool in_time = budget == 0.0 || seconds < budget;
    const bool pass = o.pass && in_time;
    all = all && pass;
    std::printf("%-4s %s metric=%s tol=%s time=%.2fs%s %s\n", id.c_str(), pass ? "PASS" : "FAIL",
                fmt(o.metric).c_str(), fmt(o.tolerance).c_str(), seconds,
                budget > 0.0 ? (in_time ? " (within budget)" : " (over budget)") : "", o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
