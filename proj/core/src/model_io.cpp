#include <condwalk/errors.hpp>
#include <condwalk/models.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace condwalk {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SchemaError(std::string(where) + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

// Exact rationals are written as strings; plain JSON integers are accepted
// too. Floating JSON numbers are rejected because their decimal spelling is
// not guaranteed to round-trip.
Rational rational_field(const json& v, const char* where) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  throw SchemaError(std::string(where) + ": expected a rational string such as \"7/6\"");
}

double real_field(const json& v, const char* where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return to_double(parse_rational(v.get<std::string>()));
  throw SchemaError(std::string(where) + ": expected a number");
}

std::vector<double> real_array(const json& v, const char* where) {
  if (!v.is_array()) throw SchemaError(std::string(where) + ": expected an array");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(real_field(e, where));
  return out;
}

DiscreteLaw discrete_law(const json& v, const char* where) {
  return DiscreteLaw{real_array(require(v, "support", where), where), real_array(require(v, "probs", where), where)};
}

WalkModel parse_finite(const json& doc) {
  const json& states = require(doc, "states", "finite");
  if (!states.is_array()) throw SchemaError("finite: 'states' must be an array");
  FiniteChainSpec spec;
  for (const auto& s : states) {
    const json& label = require(s, "label", "finite.states");
    if (!label.is_string()) throw SchemaError("finite.states: label must be a string");
    spec.labels.push_back(label.get<std::string>());
    spec.f_values.push_back(rational_field(require(s, "f", "finite.states"), "finite.states.f"));
  }
  const json& p = require(doc, "P", "finite");
  if (!p.is_array()) throw SchemaError("finite: 'P' must be an array of rows");
  for (const auto& row : p) {
    if (!row.is_array()) throw SchemaError("finite: each row of 'P' must be an array");
    std::vector<Rational> r;
    for (const auto& e : row) r.push_back(rational_field(e, "finite.P"));
    spec.transition.push_back(std::move(r));
  }
  return WalkModel::finite(std::move(spec));
}

WalkModel parse_affine1d(const json& doc) {
  Affine1DSpec spec;
  spec.a = discrete_law(require(doc, "a", "affine1d"), "affine1d.a");
  const json& b = require(doc, "b", "affine1d");
  if (b.is_object() && b.contains("uniform")) {
    const auto bounds = real_array(b.at("uniform"), "affine1d.b.uniform");
    if (bounds.size() != 2) throw SchemaError("affine1d.b.uniform needs [lo, hi]");
    spec.b = UniformLaw{bounds[0], bounds[1]};
  } else {
    spec.b = discrete_law(b, "affine1d.b");
  }
  if (doc.contains("n_epsilon")) spec.n_epsilon = real_field(doc.at("n_epsilon"), "affine1d.n_epsilon");
  return WalkModel::affine1d(std::move(spec));
}

WalkModel parse_affine_rd(const json& doc) {
  AffineRdSpec spec;
  const json& d = require(doc, "d", "affine_rd");
  if (!d.is_number_integer()) throw SchemaError("affine_rd: 'd' must be an integer");
  spec.dimension = d.get<int>();
  if (spec.dimension <= 0) throw DimensionError("affine_rd: 'd' must be positive");
  const int dim = spec.dimension;
  const json& g = require(doc, "g", "affine_rd");
  if (!g.is_array()) throw SchemaError("affine_rd: 'g' must be an array");
  for (const auto& item : g) {
    AffineMap m;
    const json& a = require(item, "A", "affine_rd.g");
    if (!a.is_array() || static_cast<int>(a.size()) != dim) throw DimensionError("affine_rd.g.A has wrong row count");
    m.A.resize(dim, dim);
    for (int i = 0; i < dim; ++i) {
      const auto row = real_array(a[i], "affine_rd.g.A");
      if (static_cast<int>(row.size()) != dim) throw DimensionError("affine_rd.g.A has wrong column count");
      for (int j = 0; j < dim; ++j) m.A(i, j) = row[j];
    }
    const auto bvec = real_array(require(item, "B", "affine_rd.g"), "affine_rd.g.B");
    if (static_cast<int>(bvec.size()) != dim) throw DimensionError("affine_rd.g.B has wrong length");
    m.B = Eigen::Map<const Eigen::VectorXd>(bvec.data(), dim);
    m.prob = real_field(require(item, "p", "affine_rd.g"), "affine_rd.g.p");
    spec.g.push_back(std::move(m));
  }
  const auto u = real_array(require(doc, "u", "affine_rd"), "affine_rd.u");
  if (static_cast<int>(u.size()) != dim) throw DimensionError("affine_rd.u has wrong length");
  spec.u = Eigen::Map<const Eigen::VectorXd>(u.data(), dim);
  if (doc.contains("n_epsilon")) spec.n_epsilon = real_field(doc.at("n_epsilon"), "affine_rd.n_epsilon");
  return WalkModel::affine_rd(std::move(spec));
}

}  // namespace

WalkModel load_model(std::string_view config_document) {
  json doc;
  try {
    doc = json::parse(config_document);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  const json& type = require(doc, "type", "model");
  if (!type.is_string()) throw SchemaError("model: 'type' must be a string");
  const auto t = type.get<std::string>();
  try {
    if (t == "finite") return parse_finite(doc);
    if (t == "affine1d") return parse_affine1d(doc);
    if (t == "affine_rd") return parse_affine_rd(doc);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
  throw SchemaError("model: unknown type '" + t + "'");
}

WalkModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open model file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_model(buffer.str());
}

}  // namespace condwalk
