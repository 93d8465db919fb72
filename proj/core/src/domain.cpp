#include <condwalk/errors.hpp>
#include <condwalk/exact.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace condwalk::exact {
namespace {

DomainVerdict classify_point(const FiniteChainSpec& chain, std::size_t x, const Rational& y, double gamma,
                             int horizon) {
  DomainVerdict v;
  v.x = x;
  v.y = y;
  v.horizon = horizon;
  const Lattice lattice = build_lattice(chain, y, DpMode::kExactRational);
  const Rational level(gamma);
  const std::size_t n = chain.size();

  // Level-by-level reachability over (state, lattice index) with positive sums.
  long lo = lattice.start;
  std::vector<std::vector<char>> reach(n, std::vector<char>(1, 0));
  reach[x][0] = 1;
  LatticeDp<double> dp(chain, x, lattice);
  std::vector<double> p{1.0};
  for (int k = 1; k <= horizon; ++k) {
    const long width = static_cast<long>(reach[0].size());
    const long new_lo = std::max(1L, lo + lattice.min_step());
    const long new_hi = lo + width - 1 + lattice.max_step();
    std::vector<std::vector<char>> next(n, std::vector<char>(static_cast<std::size_t>(std::max(1L, new_hi - new_lo + 1)), 0));
    bool any = false, above = false;
    for (std::size_t s = 0; s < n; ++s) {
      for (long i = 0; i < width; ++i) {
        if (!reach[s][static_cast<std::size_t>(i)]) continue;
        for (std::size_t t = 0; t < n; ++t) {
          if (sgn(chain.transition[s][t]) <= 0) continue;
          const long pos = lo + i + lattice.steps[t];
          if (pos <= 0) continue;
          next[t][static_cast<std::size_t>(pos - new_lo)] = 1;
          any = true;
          if (Rational(pos) * lattice.unit > level) above = true;
        }
      }
    }
    dp.step();
    p.push_back(dp.survival());
    if (!any) {
      if (k == 1) {
        v.kind = DomainKind::kZeroImmediate;
      } else {
        v.kind = DomainKind::kZeroExponential;
        v.rate = std::numeric_limits<double>::infinity();
        v.extinct_at = k;
      }
      return v;
    }
    if (above) {
      v.kind = DomainKind::kPositive;
      v.witness_n = k;
      v.witness_probability = dp.mass_above(level);
      return v;
    }
    reach = std::move(next);
    lo = new_lo;
  }
  double rate = 0.0;
  if (decays_geometrically(p, horizon / 2, horizon, &rate)) {
    v.kind = DomainKind::kZeroExponential;
    v.rate = rate;
  }
  return v;
}

}  // namespace

std::vector<DomainVerdict> classify_domain(const FiniteChainSpec& chain, const std::vector<DomainPoint>& points,
                                           double gamma, int horizon) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  std::vector<DomainVerdict> out;
  out.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (x >= chain.size()) throw DomainError("start state out of range");
    out.push_back(classify_point(chain, x, y, gamma, horizon));
  }
  return out;
}

}  // namespace condwalk::exact
