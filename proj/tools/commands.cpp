#include "commands.hpp"

#include <condwalk/errors.hpp>
#include <condwalk/exact.hpp>
#include <condwalk/martingale.hpp>
#include <condwalk/models.hpp>
#include <condwalk/monte_carlo.hpp>
#include <condwalk/stats.hpp>
#include <condwalk/verify.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

namespace condwalk::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string model_path;
  std::vector<std::string> x;
  std::vector<std::string> y;
  std::vector<int> n;
  long samples = 100000;
  std::string seed;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string out_dir;
};

std::uint64_t resolve_seed(const std::string& flag) {
  std::string text = flag;
  if (text.empty()) {
    if (const char* env = std::getenv("CONDWALK_SEED")) text = env;
  }
  if (text.empty()) return kDefaultSeed;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("invalid seed '" + text + "'");
}

template <class T>
const T& single(const std::vector<T>& values, const char* flag) {
  if (values.size() != 1) throw UsageError(std::string("exactly one ") + flag + " value is required");
  return values.front();
}

const FiniteChainSpec& require_finite(const WalkModel& model) {
  const auto* chain = model.finite_spec();
  if (!chain) throw UsageError("this command needs a finite-chain model");
  return *chain;
}

fs::path output_dir(const Common& c) {
  fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  return f;
}

json estimate_json(const exact::HarmonicEstimate& v) {
  json j;
  j["value"] = v.value;
  j["method"] = std::string(exact::to_string(v.method));
  j["error_bound"] = v.error_bound;
  j["converged"] = v.converged;
  j["converged_at"] = v.converged_at ? json(*v.converged_at) : json(nullptr);
  j["heuristic"] = v.heuristic;
  return j;
}

json report_json(const verify::Report& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"metric", c.metric}, {"tolerance", c.tolerance}, {"pass", c.pass},
                      {"detail", c.detail}});
  }
  return checks;
}

// ---- validate ----

int cmd_validate(const Common& c, std::ostream& out) {
  const auto model = load_model_file(c.model_path);
  ValidationOptions opt;
  opt.seed = resolve_seed(c.seed);
  const auto report = validate_model(model, opt);
  json j;
  j["command"] = "validate";
  j["model"] = c.model_path;
  j["kind"] = std::string(to_string(report.kind));
  json checks = json::array();
  for (const auto& h : report.checks) {
    checks.push_back({{"name", h.name}, {"verdict", std::string(to_string(h.verdict))}, {"reason", h.reason}});
  }
  j["checks"] = checks;
  out << j.dump(2) << '\n';
  return report.any_fail() ? kExitFail : kExitOk;
}

// ---- exact ----

struct ExactFlags {
  std::string mode = "exact";
  bool cdf = false;
  double tol = 1e-8;
  int n_cap = 1 << 16;
  std::uint64_t cell_budget = std::uint64_t{1} << 31;
};

int cmd_exact(const Common& c, const ExactFlags& f, std::ostream& out) {
  const auto model = load_model_file(c.model_path);
  const auto& chain = require_finite(model);
  const std::size_t x = chain.index_of(single(c.x, "--x"));
  const Rational y = parse_rational(single(c.y, "--y"));
  const int n = single(c.n, "--n");
  if (n < 0) throw UsageError("--n must be non-negative");
  if (f.mode != "exact" && f.mode != "float") throw UsageError("--mode must be 'exact' or 'float'");

  json s;
  s["command"] = "exact";
  s["model"] = c.model_path;
  s["x"] = chain.labels[x];
  s["y"] = to_string(y);
  s["n_max"] = n;
  s["mode"] = f.mode;
  const auto nu = exact::stationary_distribution(chain);
  json nu_json = json::array();
  for (const auto& v : nu) nu_json.push_back(to_string(v));
  s["nu"] = nu_json;
  const Rational mu = exact::centering_check(chain, nu);
  s["mu"] = to_string(mu);
  if (mu != 0) {
    s["error"] = "nu(f) != 0: the walk is not centred";
    out << s.dump(2) << '\n';
    return kExitNotCentered;
  }

  exact::LatticeOptions lattice;
  lattice.cell_budget = f.cell_budget;
  lattice.threads = c.threads;
  const fs::path dir = output_dir(c);
  const fs::path csv = dir / "survival.csv";
  {
    auto file = open_output(csv);
    if (f.mode == "exact") {
      const auto run = exact::survival_dp<Rational>(chain, x, y, n, lattice);
      exact::write_survival_csv(file, run.curve);
      s["p_n"] = to_string(run.curve.p.back());
      s["e_n"] = to_string(run.curve.e.back());
    } else {
      const auto run = exact::survival_dp<double>(chain, x, y, n, lattice);
      exact::write_survival_csv(file, run.curve);
      s["p_n"] = run.curve.p.back();
      s["e_n"] = run.curve.e.back();
      s["binned"] = run.lattice.binned;
    }
  }
  s["csv"] = csv.string();

  try {
    const auto series = exact::asymptotic_variance_series(chain, nu);
    s["sigma2"] = series.sigma2;
    s["sigma2_terms"] = series.terms;
    exact::HarmonicOptions opt;
    opt.tol = f.tol;
    opt.n_cap = f.n_cap;
    opt.lattice = lattice;
    s["V"] = estimate_json(exact::harmonic_value_dp(chain, x, y, opt));
    if (f.cdf && n >= 1) {
      const fs::path cdf_path = dir / "cdf.csv";
      try {
        const auto law = exact::conditional_law_dp(chain, x, y, n, std::sqrt(series.sigma2), lattice);
        auto file = open_output(cdf_path);
        exact::write_cdf_csv(file, law);
        s["cdf_csv"] = cdf_path.string();
      } catch (const ExtinctAtHorizon& e) {
        s["cdf_csv"] = nullptr;
        s["cdf_note"] = e.what();
      }
    }
  } catch (const DegenerateVariance& e) {
    s["sigma2"] = nullptr;
    s["V"] = nullptr;
    s["note"] = e.what();
  }
  {
    auto file = open_output(dir / "summary.json");
    file << s.dump(2) << '\n';
  }
  out << s.dump(2) << '\n';
  return kExitOk;
}

// ---- simulate ----

struct SimulateFlags {
  std::string op = "survival";
  double sigma = 0.0;
  long n_max = 1000000;
  bool triples = false;
};

double model_sigma(const WalkModel& model) {
  if (const auto* chain = model.finite_spec()) {
    return std::sqrt(exact::asymptotic_variance(*chain, exact::stationary_distribution(*chain)));
  }
  return std::sqrt(exact::affine_asymptotic_variance(model));
}

double parse_y(const std::string& text) { return to_double(parse_rational(text)); }

int cmd_simulate(const Common& c, const SimulateFlags& f, std::ostream& out) {
  if (c.samples < 1) throw UsageError("--samples must be at least 1");
  const auto model = load_model_file(c.model_path);
  const State x = model.parse_state(single(c.x, "--x"));
  mc::McOptions opt;
  opt.n_samples = c.samples;
  opt.seed = resolve_seed(c.seed);
  opt.threads = c.threads;

  std::vector<json> records;
  auto params = [&](std::optional<double> y, std::optional<int> n) {
    json p;
    p["model"] = c.model_path;
    p["x"] = model.format_state(x);
    if (y) p["y"] = *y;
    if (n) p["n"] = *n;
    p["samples"] = c.samples;
    return p;
  };
  auto record = [&](const std::string& op, double value, double se, json p) {
    json r;
    r["op"] = op;
    r["value"] = value;
    r["se"] = se;
    r["seed"] = opt.seed;
    r["params"] = std::move(p);
    return r;
  };

  if (f.op == "survival") {
    const double y = parse_y(single(c.y, "--y"));
    if (c.n.empty()) throw UsageError("--n is required");
    const auto est = mc::estimate_survival_curve(model, x, y, c.n, opt);
    for (std::size_t i = 0; i < c.n.size(); ++i) {
      records.push_back(record("estimate_survival", est[i].value, est[i].std_error, params(y, c.n[i])));
    }
  } else if (f.op == "law") {
    const double y = parse_y(single(c.y, "--y"));
    const int n = single(c.n, "--n");
    const double sigma = f.sigma > 0.0 ? f.sigma : model_sigma(model);
    const auto law = mc::conditional_law_mc(model, x, y, n, sigma, opt);
    auto p = params(y, n);
    p["sigma"] = sigma;
    auto r = record("conditional_law_mc", law.ks_rayleigh,
                    stats::dkw_epsilon(static_cast<std::size_t>(law.survivors)), std::move(p));
    r["survivors"] = law.survivors;
    records.push_back(std::move(r));
  } else if (f.op == "berry-esseen") {
    const int n = single(c.n, "--n");
    const double sigma = f.sigma > 0.0 ? f.sigma : model_sigma(model);
    const auto d = mc::berry_esseen_diag(model, x, n, sigma, opt);
    auto p = params(std::nullopt, n);
    p["sigma"] = sigma;
    records.push_back(record("berry_esseen_diag", d.distance,
                             stats::dkw_epsilon(static_cast<std::size_t>(d.samples)), std::move(p)));
  } else if (f.op == "variance") {
    const int n = single(c.n, "--n");
    const auto v = mc::estimate_variance(model, x, n, opt);
    auto r = record("estimate_variance", v.at_n.value, v.at_n.std_error, params(std::nullopt, n));
    r["richardson"] = {{"n", 2 * n}, {"value", v.at_2n.value}, {"se", v.at_2n.std_error}, {"stable", v.stable}};
    records.push_back(std::move(r));
  } else if (f.op == "martingale" || f.op == "W" || f.op == "W_hat") {
    const double y = parse_y(single(c.y, "--y"));
    const auto poisson = martingale::solve_poisson(model);
    martingale::MartingaleOptions mopt;
    mopt.n_samples = c.samples;
    mopt.n_max = f.n_max;
    mopt.seed = opt.seed;
    mopt.threads = c.threads;
    martingale::MartingaleEstimate e;
    std::string op;
    if (f.op == "martingale") {
      e = martingale::estimate_V_martingale(model, x, y, poisson, mopt);
      op = "estimate_V_martingale";
    } else if (f.op == "W") {
      e = martingale::estimate_W(model, x, y, poisson, mopt);
      op = "estimate_W";
    } else {
      e = martingale::estimate_W_hat(model, x, y, poisson, mopt);
      op = "estimate_W_hat";
    }
    auto p = params(y, std::nullopt);
    p["n_max"] = f.n_max;
    auto r = record(op, e.estimate.value, e.mc_error / 3.0, std::move(p));
    r["error_bound"] = e.estimate.error_bound;
    r["censored_fraction"] = e.censored_fraction;
    r["identity_violations"] = e.identity_violations;
    r["path_checks"] = e.path_checks;
    records.push_back(std::move(r));
    if (f.triples) {
      const auto triples = martingale::simulate_exit_triples(model, x, y, poisson, mopt);
      auto file = open_output(output_dir(c) / "triples.csv");
      martingale::write_exit_triples_csv(file, triples);
    }
  } else {
    throw UsageError("unknown --op '" + f.op + "'");
  }

  std::ostringstream lines;
  for (const auto& r : records) lines << r.dump() << '\n';
  if (!c.out_dir.empty()) {
    auto file = open_output(output_dir(c) / "records.jsonl");
    file << lines.str();
  }
  out << lines.str();
  return kExitOk;
}

// ---- domain / verify ----

struct DomainFlags {
  std::vector<double> gammas;
  int horizon = 64;
  std::string expect;
};

struct DomainInput {
  std::vector<exact::DomainPoint> points;
  std::optional<std::vector<exact::DomainKind>> expected;
  std::vector<double> gammas;
  int horizon = 64;
};

exact::DomainKind parse_kind(const std::string& s) {
  for (auto k : {exact::DomainKind::kPositive, exact::DomainKind::kZeroImmediate, exact::DomainKind::kZeroExponential,
                 exact::DomainKind::kUnknown}) {
    if (exact::to_string(k) == s) return k;
  }
  throw SchemaError("unknown domain verdict '" + s + "'");
}

std::string json_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

DomainInput domain_input(const FiniteChainSpec& chain, const Common& c, const DomainFlags& f) {
  DomainInput in;
  in.horizon = f.horizon;
  if (!f.expect.empty()) {
    std::ifstream file(f.expect);
    if (!file) throw UsageError("cannot open " + f.expect);
    json doc;
    try {
      doc = json::parse(file);
    } catch (const json::exception& e) {
      throw SchemaError(std::string("malformed expectation file: ") + e.what());
    }
    std::vector<exact::DomainKind> kinds;
    try {
      for (const auto& p : doc.at("points")) {
        in.points.emplace_back(chain.index_of(json_text(p.at("x"))), parse_rational(json_text(p.at("y"))));
        kinds.push_back(parse_kind(p.at("expect").get<std::string>()));
      }
      if (doc.contains("gammas")) in.gammas = doc.at("gammas").get<std::vector<double>>();
      if (doc.contains("horizon")) in.horizon = doc.at("horizon").get<int>();
    } catch (const json::exception& e) {
      throw SchemaError(std::string("expectation file: ") + e.what());
    }
    in.expected = std::move(kinds);
  } else {
    if (c.y.empty()) throw UsageError("--y (or --expect) is required");
    std::vector<std::size_t> states;
    if (c.x.empty()) {
      for (std::size_t s = 0; s < chain.size(); ++s) states.push_back(s);
    } else {
      for (const auto& label : c.x) states.push_back(chain.index_of(label));
    }
    for (auto s : states) {
      for (const auto& y : c.y) in.points.emplace_back(s, parse_rational(y));
    }
  }
  if (!f.gammas.empty()) in.gammas = f.gammas;
  if (in.gammas.empty()) in.gammas = {1.0, 3.0, 10.0};
  return in;
}

json domain_json(const FiniteChainSpec& chain, const DomainInput& in, const verify::DomainReport& r) {
  json j;
  j["gammas"] = in.gammas;
  j["horizon"] = in.horizon;
  j["stable_from"] = r.stable_from ? json(*r.stable_from) : json(nullptr);
  json points = json::array();
  for (std::size_t i = 0; i < in.points.size(); ++i) {
    json p;
    p["x"] = chain.labels[in.points[i].first];
    p["y"] = to_string(in.points[i].second);
    json verdicts = json::array();
    for (const auto& sweep : r.sweeps) {
      const auto& v = sweep.verdicts[i];
      json e;
      e["gamma"] = sweep.gamma;
      e["kind"] = std::string(exact::to_string(v.kind));
      if (v.kind == exact::DomainKind::kPositive) {
        e["witness_n"] = v.witness_n;
        e["witness_probability"] = v.witness_probability;
      } else if (v.kind == exact::DomainKind::kZeroExponential) {
        if (std::isinf(v.rate)) {
          e["rate"] = "inf";
          e["extinct_at"] = v.extinct_at;
        } else {
          e["rate"] = v.rate;
        }
      } else if (v.kind == exact::DomainKind::kUnknown) {
        e["horizon"] = v.horizon;
      }
      verdicts.push_back(e);
    }
    p["verdicts"] = verdicts;
    if (in.expected) p["expect"] = std::string(exact::to_string((*in.expected)[i]));
    points.push_back(p);
  }
  j["points"] = points;
  return j;
}

int cmd_domain(const Common& c, const DomainFlags& f, std::ostream& out) {
  const auto model = load_model_file(c.model_path);
  const auto& chain = require_finite(model);
  const auto in = domain_input(chain, c, f);
  const auto r = verify::domain(chain, in.points, in.gammas, in.horizon, in.expected);
  json j;
  j["command"] = "domain";
  j["model"] = c.model_path;
  const json body = domain_json(chain, in, r);
  for (const auto& [k, v] : body.items()) j[k] = v;
  out << j.dump(2) << '\n';
  return kExitOk;
}

struct VerifyFlags {
  std::string theorem;
  int n_small = 256;
  double tol = 1e-8;
  DomainFlags domain;
};

int cmd_verify(const Common& c, const VerifyFlags& f, std::ostream& out) {
  const auto model = load_model_file(c.model_path);
  const auto& chain = require_finite(model);
  const auto nu = exact::stationary_distribution(chain);
  const Rational mu = exact::centering_check(chain, nu);
  json j;
  j["command"] = "verify";
  j["theorem"] = f.theorem;
  j["model"] = c.model_path;
  if (mu != 0) {
    j["error"] = "nu(f) = " + to_string(mu) + ": the walk is not centred";
    out << j.dump(2) << '\n';
    return kExitNotCentered;
  }
  verify::Report report;
  if (f.theorem == "tail" || f.theorem == "rayleigh") {
    const std::size_t x = chain.index_of(single(c.x, "--x"));
    const Rational y = parse_rational(single(c.y, "--y"));
    const int n_large = c.n.empty() ? 4096 : single(c.n, "--n");
    if (f.theorem == "tail") {
      verify::TailOptions opt;
      opt.n_small = f.n_small;
      opt.n_large = n_large;
      opt.harmonic.tol = f.tol;
      report = verify::tail(chain, x, y, opt);
    } else {
      verify::RayleighOptions opt;
      opt.n_small = f.n_small;
      opt.n_large = n_large;
      report = verify::rayleigh(chain, x, y, opt);
    }
    j["x"] = chain.labels[x];
    j["y"] = to_string(y);
  } else if (f.theorem == "harmonicity") {
    std::vector<std::size_t> states;
    if (c.x.empty()) {
      for (std::size_t s = 0; s < chain.size(); ++s) states.push_back(s);
    } else {
      for (const auto& label : c.x) states.push_back(chain.index_of(label));
    }
    std::vector<Rational> ys;
    if (c.y.empty()) {
      ys = {Rational(1), Rational(5), Rational(25)};
    } else {
      for (const auto& y : c.y) ys.push_back(parse_rational(y));
    }
    std::vector<exact::DomainPoint> points;
    for (auto s : states) {
      for (const auto& y : ys) points.emplace_back(s, y);
    }
    exact::HarmonicOptions opt;
    opt.tol = f.tol;
    report = verify::harmonicity(chain, points, opt);
  } else if (f.theorem == "domain") {
    const auto in = domain_input(chain, c, f.domain);
    const auto r = verify::domain(chain, in.points, in.gammas, in.horizon, in.expected);
    report = r.report;
    j["classification"] = domain_json(chain, in, r);
  } else {
    throw UsageError("unknown theorem '" + f.theorem + "' (tail, rayleigh, harmonicity, domain)");
  }
  j["pass"] = report.passed();
  j["checks"] = report_json(report);
  out << j.dump(2) << '\n';
  return report.passed() ? kExitOk : kExitFail;
}

void add_common(CLI::App* app, Common& c, bool needs_model = true) {
  auto* m = app->add_option("--model", c.model_path, "model config (JSON)");
  if (needs_model) m->required();
  app->add_option("--x", c.x, "start state: label, real, or comma-separated vector");
  app->add_option("--y", c.y, "start position (rational or real)");
  app->add_option("--n", c.n, "horizon(s)");
  app->add_option("--samples", c.samples, "Monte Carlo sample count");
  app->add_option("--seed", c.seed, "64-bit seed (decimal or 0x hex); env CONDWALK_SEED");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out_dir, "output directory");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"condwalk: Markov walks conditioned to stay positive"};
  app.require_subcommand(1);
  Common common;

  auto* validate = app.add_subcommand("validate", "check the model hypotheses");
  add_common(validate, common);

  ExactFlags exact_flags;
  auto* exact_cmd = app.add_subcommand("exact", "survival curve, sigma^2 and V by lattice DP");
  add_common(exact_cmd, common);
  exact_cmd->add_option("--mode", exact_flags.mode, "exact (rational) or float");
  exact_cmd->add_flag("--cdf", exact_flags.cdf, "also write the conditional CDF at n");
  exact_cmd->add_option("--tol", exact_flags.tol, "V convergence tolerance");
  exact_cmd->add_option("--n-cap", exact_flags.n_cap, "V horizon cap");
  exact_cmd->add_option("--cell-budget", exact_flags.cell_budget, "refuse DP lattices larger than this");

  SimulateFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates as JSON lines");
  add_common(simulate, common);
  simulate->add_option("--op", sim_flags.op, "survival, law, berry-esseen, variance, martingale, W, W_hat");
  simulate->add_option("--sigma", sim_flags.sigma, "sigma for law/berry-esseen (default: model value)");
  simulate->add_option("--n-max", sim_flags.n_max, "censoring horizon for martingale estimators");
  simulate->add_flag("--triples", sim_flags.triples, "write per-path exit times to <out>/triples.csv");

  VerifyFlags verify_flags;
  auto* verify_cmd = app.add_subcommand("verify", "run a limit-theorem check");
  add_common(verify_cmd, common);
  verify_cmd->add_option("theorem", verify_flags.theorem, "tail, rayleigh, harmonicity, domain")->required();
  verify_cmd->add_option("--n-small", verify_flags.n_small, "reference horizon for improvement checks");
  verify_cmd->add_option("--tol", verify_flags.tol, "V convergence tolerance");
  verify_cmd->add_option("--gamma", verify_flags.domain.gammas, "gamma values");
  verify_cmd->add_option("--horizon", verify_flags.domain.horizon, "domain horizon");
  verify_cmd->add_option("--expect", verify_flags.domain.expect, "expected verdicts (JSON)");

  DomainFlags domain_flags;
  auto* domain_cmd = app.add_subcommand("domain", "classify start points against D_gamma");
  add_common(domain_cmd, common);
  domain_cmd->add_option("--gamma", domain_flags.gammas, "gamma values");
  domain_cmd->add_option("--horizon", domain_flags.horizon, "search horizon");
  domain_cmd->add_option("--expect", domain_flags.expect, "points and expected verdicts (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(common, out);
    if (exact_cmd->parsed()) return cmd_exact(common, exact_flags, out);
    if (simulate->parsed()) return cmd_simulate(common, sim_flags, out);
    if (verify_cmd->parsed()) return cmd_verify(common, verify_flags, out);
    if (domain_cmd->parsed()) return cmd_domain(common, domain_flags, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StochasticityError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NotCentered& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotCentered;
  } catch (const SingularBeyondNullspace& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotCentered;
  } catch (const CellBudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitCellBudget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace condwalk::cli
