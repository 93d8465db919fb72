#pragma once

// Closed-form Brownian references for the walk killed at 0.

namespace condwalk::brownian {

struct BrownianParams {
  double y = 1.0;      // start
  double sigma = 1.0;  // diffusion scale
  double n = 1.0;      // time horizon
};

/// Standard normal CDF through erfc.
double normal_cdf(double x);

/// P(lo < Z <= hi) for standard normal Z, written to avoid cancellation in
/// either tail. hi may be +inf and lo -inf.
double normal_interval(double lo, double hi);

/// P(y + sigma B_n in [a, b], tau_bm > n) for 0 <= a <= b (b may be +inf).
/// Throws DomainError on invalid params or a < 0 or b < a.
double bm_band_probability(const BrownianParams& params, double a, double b);

/// P(tau_bm > n) = 2 Phi(y / (sigma sqrt n)) - 1.
double bm_survival(const BrownianParams& params);

/// 1 - e^{-t^2/2}; DomainError for t < 0.
double rayleigh_cdf(double t);

/// Leading-order tail 2 V / (sqrt(2 pi n) sigma).
double asymptotic_tail(double V, double sigma, double n);

}  // namespace condwalk::brownian
