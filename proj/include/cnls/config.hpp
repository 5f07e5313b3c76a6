#pragma once

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cnls/error.hpp"
#include "cnls/model.hpp"

namespace cnls {

namespace config_detail {

using nlohmann::json;

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline const json& require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw SpecError(key, "missing required field '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw SpecError(field, "field '" + field + "': expected a number");
  return j.get<double>();
}

inline long long integer(const json& j, const std::string& field) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw SpecError(field, "field '" + field + "': expected an integer");
  return j.get<long long>();
}

inline std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array()) throw SpecError(field, "field '" + field + "': expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline Tolerances tolerances(const json& j) {
  Tolerances t;
  if (!j.is_object()) throw SpecError("tolerances", "field 'tolerances': expected a table");
  for (const auto& [key, value] : j.items()) {
    const std::string f = "tolerances." + key;
    if (key == "constraint") t.constraint = number(value, f);
    else if (key == "newton") t.newton = number(value, f);
    else if (key == "newton_max_iter") t.newton_max_iter = static_cast<int>(integer(value, f));
    else if (key == "starts") t.starts = static_cast<int>(integer(value, f));
    else if (key == "seed") t.seed = value.get<std::uint64_t>();
    else if (key == "strict") t.strict = number(value, f);
    else if (key == "grid_nodes") t.grid_nodes = static_cast<int>(integer(value, f));
    else if (key == "grid_grading") t.grid_grading = number(value, f);
    else if (key == "descent_decrease") t.descent_decrease = number(value, f);
    else if (key == "descent_window") t.descent_window = static_cast<int>(integer(value, f));
    else if (key == "descent_max_steps") t.descent_max_steps = static_cast<int>(integer(value, f));
    else if (key == "pde_residual") t.pde_residual = number(value, f);
    else if (key == "eigen") t.eigen = number(value, f);
    else if (key == "quadrature") t.quadrature = number(value, f);
    else throw SpecError(f, "unknown tolerance '" + key + "'");
  }
  return t;
}

}  // namespace config_detail

/// Builds a spec from an already parsed configuration document.
inline ProblemSpec spec_from_json(const nlohmann::json& doc) {
  using namespace config_detail;
  if (!doc.is_object()) throw SpecError("", "configuration must be a table");
  static const std::set<std::string> known = {"dimension", "components", "lambda", "mu",
                                              "beta",      "radius",     "mode",   "tolerances"};
  for (const auto& [key, value] : doc.items())
    if (!known.contains(key)) throw SpecError(key, "unknown field '" + key + "'");

  const int n = static_cast<int>(integer(require(doc, "dimension"), "dimension"));
  const long long k = integer(require(doc, "components"), "components");
  if (k < 1) throw SpecError("components", "field 'components': must be at least 1");
  auto lambda = numbers(require(doc, "lambda"), "lambda");
  auto mu = numbers(require(doc, "mu"), "mu");
  std::vector<double> beta;
  if (k >= 2) beta = numbers(require(doc, "beta"), "beta");
  else if (doc.contains("beta")) beta = numbers(doc.at("beta"), "beta");

  if (static_cast<long long>(lambda.size()) != k)
    throw SpecError("lambda", "field 'lambda': expected " + std::to_string(k) + " entries");
  if (static_cast<long long>(mu.size()) != k)
    throw SpecError("mu", "field 'mu': expected " + std::to_string(k) + " entries");
  if (static_cast<long long>(beta.size()) != k * (k - 1) / 2)
    throw SpecError("beta", "field 'beta': expected " + std::to_string(k * (k - 1) / 2) +
                                " entries (upper triangle, row-major)");

  DomainMode mode = DomainMode::ball;
  if (doc.contains("mode")) {
    const auto& m = doc.at("mode");
    if (!m.is_string()) throw SpecError("mode", "field 'mode': expected a string");
    const auto s = m.get<std::string>();
    if (s == "ball") mode = DomainMode::ball;
    else if (s == "whole-space") mode = DomainMode::whole_space;
    else throw SpecError("mode", "field 'mode': expected \"ball\" or \"whole-space\"");
  }
  double radius = 0.0;
  if (mode == DomainMode::ball) radius = number(require(doc, "radius"), "radius");
  else if (doc.contains("radius")) radius = number(doc.at("radius"), "radius");

  Tolerances tol;
  if (doc.contains("tolerances")) tol = tolerances(doc.at("tolerances"));
  if (n < 3) throw SpecError("dimension", "field 'dimension': must be at least 3");
  return ProblemSpec::from_upper(n, std::move(lambda), mu, beta, mode, radius, tol);
}

/// Parses configuration text; parse errors carry line and column.
inline nlohmann::json parse_config_text(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError("", "parse error at " + config_detail::line_col(text, e.byte) + ": " + e.what());
  }
}

inline ProblemSpec parse_spec(const std::string& text) { return spec_from_json(parse_config_text(text)); }

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("", "cannot open configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ProblemSpec load_spec(const std::string& path) { return parse_spec(read_text_file(path)); }

inline nlohmann::json spec_to_json(const ProblemSpec& spec) {
  nlohmann::json j;
  j["dimension"] = spec.dimension();
  j["components"] = spec.components();
  j["lambda"] = spec.lambda();
  j["mu"] = spec.mu_vector();
  j["beta"] = spec.beta_upper();
  j["mode"] = to_string(spec.mode());
  if (spec.mode() == DomainMode::ball) j["radius"] = spec.radius();
  const auto& t = spec.tolerances();
  j["tolerances"] = {{"constraint", t.constraint},
                     {"newton", t.newton},
                     {"newton_max_iter", t.newton_max_iter},
                     {"starts", t.starts},
                     {"seed", t.seed},
                     {"strict", t.strict},
                     {"grid_nodes", t.grid_nodes},
                     {"grid_grading", t.grid_grading},
                     {"descent_decrease", t.descent_decrease},
                     {"descent_window", t.descent_window},
                     {"descent_max_steps", t.descent_max_steps},
                     {"pde_residual", t.pde_residual},
                     {"eigen", t.eigen},
                     {"quadrature", t.quadrature}};
  return j;
}

inline std::string write_spec(const ProblemSpec& spec) { return spec_to_json(spec).dump(2) + "\n"; }

/// Applies "a.b=value" to a configuration document. The value is read as JSON
/// when it parses (numbers, arrays, booleans) and as a string otherwise.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw SpecError(assignment, "override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace cnls
