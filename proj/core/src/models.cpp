#include <condwalk/errors.hpp>
#include <condwalk/models.hpp>

#include <cmath>
#include <numeric>
#include <sstream>

namespace condwalk {
namespace {

constexpr double kProbTol = 1e-12;

std::vector<double> cumulative(const std::vector<double>& probs) {
  std::vector<double> cum(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cum.begin());
  if (!cum.empty()) cum.back() = 1.0;
  return cum;
}

void check_discrete_law(const DiscreteLaw& law, std::string_view what) {
  if (law.support.empty()) throw SchemaError(std::string(what) + ": empty support");
  if (law.support.size() != law.probs.size()) {
    throw DimensionError(std::string(what) + ": support and probs differ in length");
  }
  double total = 0.0;
  for (double p : law.probs) {
    if (!(p >= 0.0)) throw StochasticityError(std::string(what) + ": negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kProbTol) {
    throw StochasticityError(std::string(what) + ": probabilities sum to " + std::to_string(total));
  }
}

}  // namespace

// ---- specs ----

std::size_t FiniteChainSpec::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  // Accept numerically equal spellings ("7/6" vs "14/12").
  try {
    const Rational want = parse_rational(label);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      try {
        if (parse_rational(labels[i]) == want) return i;
      } catch (const SchemaError&) {
      }
    }
  } catch (const SchemaError&) {
  }
  throw SchemaError("unknown state label '" + std::string(label) + "'");
}

bool FiniteChainSpec::rows_identical() const {
  for (std::size_t i = 1; i < transition.size(); ++i) {
    if (transition[i] != transition[0]) return false;
  }
  return true;
}

double DiscreteLaw::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) m += probs[i] * support[i];
  return m;
}

double DiscreteLaw::moment(double p) const {
  double m = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) m += probs[i] * std::pow(std::abs(support[i]), p);
  return m;
}

double b_mean(const BLaw& law) {
  return std::visit(
      [](const auto& l) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, UniformLaw>) {
          return 0.5 * (l.lo + l.hi);
        } else {
          return l.mean();
        }
      },
      law);
}

double b_second_moment(const BLaw& law) {
  return std::visit(
      [](const auto& l) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, UniformLaw>) {
          return (l.lo * l.lo + l.lo * l.hi + l.hi * l.hi) / 3.0;
        } else {
          return l.moment(2.0);
        }
      },
      law);
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFinite: return "finite";
    case ModelKind::kIid: return "iid";
    case ModelKind::kAffine1D: return "affine1d";
    case ModelKind::kAffineRd: return "affine_rd";
  }
  return "unknown";
}

// ---- walkers ----

FiniteWalker::FiniteWalker(const FiniteChainSpec& spec) {
  f_.reserve(spec.size());
  for (const auto& v : spec.f_values) f_.push_back(to_double(v));
  for (const auto& row : spec.transition) {
    std::vector<double> cum(row.size());
    Rational running = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      running += row[j];
      cum[j] = to_double(running);
    }
    cumulative_.push_back(std::move(cum));
  }
}

Affine1DWalker::Affine1DWalker(const Affine1DSpec& spec)
    : a_support_(spec.a.support), a_cum_(cumulative(spec.a.probs)), epsilon_(spec.n_epsilon) {
  if (const auto* u = std::get_if<UniformLaw>(&spec.b)) {
    b_uniform_ = true;
    b_lo_ = u->lo;
    b_hi_ = u->hi;
  } else {
    const auto& d = std::get<DiscreteLaw>(spec.b);
    b_uniform_ = false;
    b_support_ = d.support;
    b_cum_ = cumulative(d.probs);
  }
}

AffineRdWalker::AffineRdWalker(const AffineRdSpec& spec)
    : maps_(spec.g), u_(spec.u), epsilon_(spec.n_epsilon) {
  std::vector<double> probs;
  for (const auto& m : maps_) probs.push_back(m.prob);
  cum_ = cumulative(probs);
}

// ---- WalkModel ----

WalkModel::WalkModel(Spec spec)
    : spec_(std::move(spec)),
      walker_(std::visit(
          [](const auto& s) -> std::variant<FiniteWalker, Affine1DWalker, AffineRdWalker> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FiniteChainSpec>) return FiniteWalker(s);
            else if constexpr (std::is_same_v<T, Affine1DSpec>) return Affine1DWalker(s);
            else return AffineRdWalker(s);
          },
          spec_)) {}

WalkModel WalkModel::finite(FiniteChainSpec spec) {
  const std::size_t n = spec.labels.size();
  if (n == 0) throw SchemaError("finite chain needs at least one state");
  if (spec.f_values.size() != n) throw DimensionError("f_values and labels differ in length");
  if (spec.transition.size() != n) throw DimensionError("transition matrix must have one row per state");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = spec.transition[i];
    if (row.size() != n) throw DimensionError("transition row " + std::to_string(i) + " has wrong length");
    Rational total = 0;
    for (const auto& p : row) {
      if (sgn(p) < 0) throw StochasticityError("negative transition probability in row " + std::to_string(i));
      total += p;
    }
    if (total != 1) {
      throw StochasticityError("row " + std::to_string(i) + " sums to " + to_string(total));
    }
  }
  return WalkModel(std::move(spec));
}

WalkModel WalkModel::affine1d(Affine1DSpec spec) {
  check_discrete_law(spec.a, "a");
  if (const auto* d = std::get_if<DiscreteLaw>(&spec.b)) {
    check_discrete_law(*d, "b");
  } else {
    const auto& u = std::get<UniformLaw>(spec.b);
    if (!(u.lo < u.hi)) throw SchemaError("b uniform law needs lo < hi");
  }
  if (std::abs(b_mean(spec.b)) > kProbTol) {
    throw SchemaError("b law must be centred, mean is " + std::to_string(b_mean(spec.b)));
  }
  if (!(spec.n_epsilon > 0.0)) throw SchemaError("n_epsilon must be positive");
  return WalkModel(std::move(spec));
}

WalkModel WalkModel::affine_rd(AffineRdSpec spec) {
  const int d = spec.dimension;
  if (d <= 0) throw DimensionError("dimension must be positive");
  if (spec.g.empty()) throw SchemaError("affine_rd needs at least one (A, B) pair");
  if (spec.u.size() != d) throw DimensionError("u has wrong dimension");
  if (spec.u.norm() == 0.0) throw SchemaError("u must be nonzero");
  if (!(spec.n_epsilon > 0.0)) throw SchemaError("n_epsilon must be positive");
  double total = 0.0;
  Eigen::VectorXd mean_b = Eigen::VectorXd::Zero(d);
  for (const auto& m : spec.g) {
    if (m.A.rows() != d || m.A.cols() != d || m.B.size() != d) throw DimensionError("(A, B) pair has wrong shape");
    if (!(m.prob >= 0.0)) throw StochasticityError("negative probability in g");
    if (std::abs(m.A.determinant()) < 1e-300) throw SchemaError("every A must be invertible");
    total += m.prob;
    mean_b += m.prob * m.B;
  }
  if (std::abs(total - 1.0) > kProbTol) throw StochasticityError("g probabilities sum to " + std::to_string(total));
  if (mean_b.cwiseAbs().maxCoeff() > kProbTol) throw SchemaError("E(B) must vanish componentwise");
  return WalkModel(std::move(spec));
}

ModelKind WalkModel::kind() const {
  if (const auto* f = finite_spec()) return f->rows_identical() ? ModelKind::kIid : ModelKind::kFinite;
  if (affine1d_spec()) return ModelKind::kAffine1D;
  return ModelKind::kAffineRd;
}

State WalkModel::step(const State& state, Rng& rng) const {
  return visit_walker(state, [&](const auto& walker, const auto& s) -> State { return walker.step(s, rng); });
}

double WalkModel::f(const State& state) const {
  return visit_walker(state, [](const auto& walker, const auto& s) { return walker.f(s); });
}

double WalkModel::control(const State& state) const {
  return visit_walker(state, [](const auto& walker, const auto& s) { return walker.control(s); });
}

State WalkModel::parse_state(std::string_view text) const {
  if (const auto* chain = finite_spec()) return chain->index_of(text);
  if (affine1d_spec()) return to_double(parse_rational(text));
  const auto& rd = *affine_rd_spec();
  std::vector<double> parts;
  std::string token;
  std::istringstream in{std::string(text)};
  while (std::getline(in, token, ',')) parts.push_back(to_double(parse_rational(token)));
  if (static_cast<int>(parts.size()) != rd.dimension) {
    throw DimensionError("state needs " + std::to_string(rd.dimension) + " components");
  }
  return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(parts.data(), rd.dimension));
}

std::string WalkModel::format_state(const State& state) const {
  if (const auto* chain = finite_spec()) return chain->labels.at(std::get<std::size_t>(state));
  std::ostringstream out;
  out.precision(17);
  if (const auto* x = std::get_if<double>(&state)) {
    out << *x;
  } else {
    const auto& v = std::get<Eigen::VectorXd>(state);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  }
  return out.str();
}

}  // namespace condwalk
