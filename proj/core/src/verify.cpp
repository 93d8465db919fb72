#include <condwalk/brownian.hpp>
#include <condwalk/errors.hpp>
#include <condwalk/stats.hpp>
#include <condwalk/verify.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace condwalk::verify {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

double sigma_of(const FiniteChainSpec& chain) {
  return std::sqrt(exact::asymptotic_variance(chain, exact::stationary_distribution(chain)));
}

std::string point_name(const FiniteChainSpec& chain, std::size_t x, const Rational& y) {
  return "(" + chain.labels[x] + "," + to_string(y) + ")";
}

}  // namespace

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Report tail(const FiniteChainSpec& chain, std::size_t x, const Rational& y, const TailOptions& options) {
  if (options.n_small < 1 || options.n_large <= options.n_small) throw DomainError("need 1 <= n_small < n_large");
  const double sigma = sigma_of(chain);
  const auto v = exact::harmonic_value_dp(chain, x, y, options.harmonic);
  const auto run = exact::survival_dp<double>(chain, x, y, options.n_large, options.harmonic.lattice);
  auto ratio = [&](int n) {
    return run.curve.p[static_cast<std::size_t>(n)] / brownian::asymptotic_tail(v.value, sigma, n);
  };
  Report r;
  r.name = "tail";
  if (!(v.value > 0.0)) {
    r.checks.push_back({"V_positive", v.value, 0.0, false,
                        "V" + point_name(chain, x, y) + " = 0: the start is outside the positivity domain"});
    return r;
  }
  const double small = ratio(options.n_small);
  const double large = ratio(options.n_large);
  const std::string head = "V=" + fmt(v.value) + " (" + std::string(exact::to_string(v.method)) +
                           "), sigma=" + fmt(sigma) + ", ";
  r.checks.push_back({"ratio_n" + std::to_string(options.n_large), large, options.band,
                      std::abs(large - 1.0) <= options.band,
                      head + "p_n sqrt(2 pi n) sigma / (2V) = " + fmt(large)});
  r.checks.push_back({"ratio_improves", std::abs(large - 1.0), std::abs(small - 1.0),
                      std::abs(large - 1.0) < std::abs(small - 1.0),
                      "|ratio - 1| at n=" + std::to_string(options.n_large) + " vs n=" +
                          std::to_string(options.n_small) + ": " + fmt(std::abs(large - 1.0)) + " vs " +
                          fmt(std::abs(small - 1.0))});
  return r;
}

Report rayleigh(const FiniteChainSpec& chain, std::size_t x, const Rational& y, const RayleighOptions& options) {
  if (options.n_small < 1 || options.n_large <= options.n_small) throw DomainError("need 1 <= n_small < n_large");
  const double sigma = sigma_of(chain);
  auto distance = [&](int n) {
    const auto law = exact::conditional_law_dp(chain, x, y, n, sigma, options.lattice);
    return stats::ks_step_vs_continuous(law.t, law.cdf, [](double t) { return brownian::rayleigh_cdf(std::max(t, 0.0)); });
  };
  const double small = distance(options.n_small);
  const double large = distance(options.n_large);
  Report r;
  r.name = "rayleigh";
  r.checks.push_back({"ks_n" + std::to_string(options.n_large), large, options.tolerance, large <= options.tolerance,
                      "sup |CDF - Rayleigh| from " + point_name(chain, x, y) + ", sigma=" + fmt(sigma)});
  r.checks.push_back({"ks_improves", large, small, large < small,
                      "n=" + std::to_string(options.n_large) + ": " + fmt(large) + " vs n=" +
                          std::to_string(options.n_small) + ": " + fmt(small)});
  return r;
}

Report harmonicity(const FiniteChainSpec& chain, const std::vector<exact::DomainPoint>& points,
                   const exact::HarmonicOptions& options) {
  std::map<std::pair<std::size_t, Rational>, exact::HarmonicEstimate> cache;
  auto value = [&](std::size_t s, const Rational& y) -> const exact::HarmonicEstimate& {
    auto key = std::make_pair(s, y);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, exact::harmonic_value_dp(chain, s, y, options)).first;
    return it->second;
  };
  Report r;
  r.name = "harmonicity";
  const double tolerance = 10.0 * options.tol;
  for (const auto& [x, y] : points) {
    const auto& here = value(x, y);
    double q = 0.0;
    for (std::size_t t = 0; t < chain.size(); ++t) {
      if (sgn(chain.transition[x][t]) == 0) continue;
      const Rational next = y + chain.f_values[t];
      if (sgn(next) <= 0) continue;
      q += to_double(chain.transition[x][t]) * value(t, next).value;
    }
    const double residual = std::abs(q - here.value);
    r.checks.push_back({"Q+V=V at " + point_name(chain, x, y), residual, tolerance, residual <= tolerance,
                        "V=" + fmt(here.value) + " (" + std::string(exact::to_string(here.method)) +
                            "), Q+V=" + fmt(q)});
  }
  return r;
}

DomainReport domain(const FiniteChainSpec& chain, const std::vector<exact::DomainPoint>& points,
                    std::vector<double> gammas, int horizon,
                    const std::optional<std::vector<exact::DomainKind>>& expected) {
  if (gammas.empty()) throw DomainError("need at least one gamma");
  if (expected && expected->size() != points.size()) throw DomainError("one expected verdict per point");
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());
  DomainReport out;
  out.report.name = "domain";
  for (double g : gammas) out.sweeps.push_back({g, exact::classify_domain(chain, points, g, horizon)});

  for (const auto& sweep : out.sweeps) {
    for (std::size_t i = 0; expected && i < points.size(); ++i) {
      const auto& v = sweep.verdicts[i];
      const auto want = (*expected)[i];
      out.report.checks.push_back({"gamma=" + fmt(sweep.gamma) + " " + point_name(chain, v.x, v.y),
                                   v.kind == want ? 0.0 : 1.0, 0.0, v.kind == want,
                                   std::string(exact::to_string(v.kind)) + ", expected " +
                                       std::string(exact::to_string(want))});
    }
  }
  for (std::size_t s = 1; s < out.sweeps.size(); ++s) {
    long violations = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const bool big = out.sweeps[s].verdicts[i].kind == exact::DomainKind::kPositive;
      const bool small = out.sweeps[s - 1].verdicts[i].kind == exact::DomainKind::kPositive;
      if (big && !small) ++violations;
    }
    out.report.checks.push_back({"nesting gamma=" + fmt(out.sweeps[s - 1].gamma) + "<=" + fmt(out.sweeps[s].gamma),
                                 static_cast<double>(violations), 0.0, violations == 0,
                                 "points POSITIVE at the larger gamma but not at the smaller"});
  }
  // Smallest gamma from which every later sweep agrees with it.
  for (std::size_t s = 0; s < out.sweeps.size(); ++s) {
    bool same = true;
    for (std::size_t t = s + 1; t < out.sweeps.size() && same; ++t) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (out.sweeps[t].verdicts[i].kind != out.sweeps[s].verdicts[i].kind) same = false;
      }
    }
    if (same) {
      out.stable_from = out.sweeps[s].gamma;
      break;
    }
  }
  return out;
}

}  // namespace condwalk::verify
