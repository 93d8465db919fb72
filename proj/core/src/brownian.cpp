#include <condwalk/brownian.hpp>
#include <condwalk/errors.hpp>

#include <cmath>
#include <numbers>

namespace condwalk::brownian {
namespace {

void check(const BrownianParams& p) {
  if (!(p.y > 0.0) || !(p.sigma > 0.0) || !(p.n > 0.0)) {
    throw DomainError("Brownian params need y > 0, sigma > 0, n > 0");
  }
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_interval(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  const double k = 1.0 / std::numbers::sqrt2;
  if (lo >= 0.0) return 0.5 * (std::erfc(lo * k) - std::erfc(hi * k));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi * k) - std::erfc(-lo * k));
  return 1.0 - 0.5 * std::erfc(hi * k) - 0.5 * std::erfc(-lo * k);
}

double bm_band_probability(const BrownianParams& params, double a, double b) {
  check(params);
  if (!(a >= 0.0) || b < a) throw DomainError("band needs 0 <= a <= b");
  const double s = params.sigma * std::sqrt(params.n);
  const double y = params.y;
  return normal_interval((a - y) / s, (b - y) / s) - normal_interval((a + y) / s, (b + y) / s);
}

double bm_survival(const BrownianParams& params) {
  check(params);
  return std::erf(params.y / (params.sigma * std::sqrt(2.0 * params.n)));
}

double rayleigh_cdf(double t) {
  if (t < 0.0) throw DomainError("rayleigh_cdf needs t >= 0");
  return -std::expm1(-0.5 * t * t);
}

double asymptotic_tail(double V, double sigma, double n) {
  if (V < 0.0 || !(sigma > 0.0) || !(n >= 1.0)) throw DomainError("asymptotic_tail needs V >= 0, sigma > 0, n >= 1");
  return 2.0 * V / (std::sqrt(2.0 * std::numbers::pi * n) * sigma);
}

}  // namespace condwalk::brownian
