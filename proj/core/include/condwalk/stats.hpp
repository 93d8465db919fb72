#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace condwalk::stats {

/// sup_t |G(t) - F(t)| for a right-continuous step CDF G (atoms t, values
/// cdf) and a continuous CDF F. Left limits at each atom are included.
double ks_step_vs_continuous(const std::vector<double>& t, const std::vector<double>& cdf,
                             const std::function<double(double)>& F);

/// Same for the empirical CDF of a sorted sample.
double ks_sample_vs_continuous(const std::vector<double>& sorted, const std::function<double(double)>& F);

/// sup_t |G1(t) - G2(t)| between two step CDFs.
double sup_distance_steps(const std::vector<double>& t1, const std::vector<double>& cdf1,
                          const std::vector<double>& t2, const std::vector<double>& cdf2);

/// Atoms and right-continuous values of the empirical CDF of a sorted sample.
void empirical_cdf(const std::vector<double>& sorted, std::vector<double>& t, std::vector<double>& cdf);

/// Dvoretzky-Kiefer-Wolfowitz half-width: P(sup |F_n - F| > eps) <= alpha.
double dkw_epsilon(std::size_t n, double alpha = 0.05);

}  // namespace condwalk::stats
