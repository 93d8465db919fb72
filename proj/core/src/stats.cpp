#include <condwalk/errors.hpp>
#include <condwalk/stats.hpp>

#include <algorithm>
#include <cmath>

namespace condwalk::stats {

double ks_step_vs_continuous(const std::vector<double>& t, const std::vector<double>& cdf,
                             const std::function<double(double)>& F) {
  double sup = 0.0, before = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double f = F(t[i]);
    sup = std::max({sup, std::abs(cdf[i] - f), std::abs(before - f)});
    before = cdf[i];
  }
  return sup;
}

void empirical_cdf(const std::vector<double>& sorted, std::vector<double>& t, std::vector<double>& cdf) {
  t.clear();
  cdf.clear();
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    t.push_back(sorted[i]);
    cdf.push_back(static_cast<double>(i + 1) / n);
  }
}

double ks_sample_vs_continuous(const std::vector<double>& sorted, const std::function<double(double)>& F) {
  std::vector<double> t, cdf;
  empirical_cdf(sorted, t, cdf);
  return ks_step_vs_continuous(t, cdf, F);
}

double sup_distance_steps(const std::vector<double>& t1, const std::vector<double>& cdf1,
                          const std::vector<double>& t2, const std::vector<double>& cdf2) {
  // Merge the atoms; between atoms both functions are constant.
  std::size_t i = 0, j = 0;
  double g1 = 0.0, g2 = 0.0, sup = 0.0;
  while (i < t1.size() || j < t2.size()) {
    double at;
    if (j == t2.size() || (i < t1.size() && t1[i] <= t2[j])) {
      at = t1[i];
    } else {
      at = t2[j];
    }
    while (i < t1.size() && t1[i] == at) g1 = cdf1[i++];
    while (j < t2.size() && t2[j] == at) g2 = cdf2[j++];
    sup = std::max(sup, std::abs(g1 - g2));
  }
  return sup;
}

double dkw_epsilon(std::size_t n, double alpha) {
  if (n == 0) throw DomainError("DKW bound needs n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

}  // namespace condwalk::stats
