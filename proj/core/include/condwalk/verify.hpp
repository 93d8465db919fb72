#pragma once

// Desk-scale checks of the limit theorems on finite chains. Each check
// reports a metric, its tolerance, and a verdict.

#include <condwalk/exact.hpp>

#include <optional>
#include <string>
#include <vector>

namespace condwalk::verify {

struct Check {
  std::string name;
  double metric = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::string name;
  std::vector<Check> checks;
  bool passed() const;
};

struct TailOptions {
  int n_small = 256;
  int n_large = 4096;
  double band = 0.15;  // ratio must lie in [1 - band, 1 + band]
  exact::HarmonicOptions harmonic{};
};

/// p_n sqrt(2 pi n) sigma / (2 V) near 1 at n_large and closer to 1 than at
/// n_small.
Report tail(const FiniteChainSpec& chain, std::size_t x, const Rational& y, const TailOptions& options = {});

struct RayleighOptions {
  int n_small = 256;
  int n_large = 4096;
  double tolerance = 0.05;
  exact::LatticeOptions lattice{};
};

/// sup_t |CDF_n(t) - (1 - e^{-t^2/2})| for the exact conditional law.
Report rayleigh(const FiniteChainSpec& chain, std::size_t x, const Rational& y, const RayleighOptions& options = {});

/// |sum_t P(x,t) V(t, y + f(t)) 1{y + f(t) > 0} - V(x, y)| <= 10 tol per point.
Report harmonicity(const FiniteChainSpec& chain, const std::vector<exact::DomainPoint>& points,
                   const exact::HarmonicOptions& options = {});

struct DomainSweep {
  double gamma = 0.0;
  std::vector<exact::DomainVerdict> verdicts;
};

struct DomainReport {
  Report report;
  std::vector<DomainSweep> sweeps;  // gammas in increasing order
  std::optional<double> stable_from;  // smallest gamma from which verdicts no longer change
};

/// Classifies the points at every gamma. Checks nesting (POSITIVE at a larger
/// gamma stays POSITIVE at a smaller one) and, when given, the expected kinds.
DomainReport domain(const FiniteChainSpec& chain, const std::vector<exact::DomainPoint>& points,
                    std::vector<double> gammas, int horizon,
                    const std::optional<std::vector<exact::DomainKind>>& expected = std::nullopt);

}  // namespace condwalk::verify
