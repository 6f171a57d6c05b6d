#include "optresp_tools/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace optresp::tools {

using nlohmann::json;

namespace {

constexpr std::pair<Problem, const char*> kProblems[] = {
    {Problem::ExpectationKernel, "expectation-kernel"},
    {Problem::MixingKernel, "mixing-kernel"},
    {Problem::ExpectationMap, "expectation-map"},
    {Problem::MixingMap, "mixing-map"},
    {Problem::Spectrum, "spectrum"},
    {Problem::InvariantDensity, "invariant-density"},
    {Problem::VerifyResponse, "verify-response"},
};

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + key, std::string("wrong type (") + e.what() + ")");
  }
}

double finite_field(const json& j, const std::string& key, double fallback) {
  const double v = get_field<double>(j, key, "", fallback);
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

MapSpec parse_map(const json& j) {
  if (!j.contains("map")) throw ConfigError("map", "required");
  MapSpec spec;
  const json& m = j.at("map");
  if (m.is_string()) {
    spec.name = m.get<std::string>();
  } else if (m.is_object()) {
    if (!m.contains("name")) throw ConfigError("map.name", "required");
    spec.name = get_field<std::string>(m, "name", "map.", "");
    for (const auto& [key, value] : m.items()) {
      if (key == "name" || key == "permutation" || key == "lengths" ||
          key == "path" || key == "mode") {
        continue;
      }
      if (!value.is_number()) throw ConfigError("map." + key, "map parameters must be numbers");
      spec.parameters.emplace_back(key, value.get<double>());
    }
    spec.permutation = get_field<std::vector<int>>(m, "permutation", "map.", {});
    spec.lengths = get_field<std::vector<double>>(m, "lengths", "map.", {});
    spec.table_path = get_field<std::string>(m, "path", "map.", "");
    spec.affine_mode = get_field<std::string>(m, "mode", "map.", "clamp");
  } else {
    throw ConfigError("map", "must be a name or an object with a name");
  }
  static const char* known[] = {"pomeau-manneville", "interval-exchange", "affine", "table"};
  if (std::find(std::begin(known), std::end(known), spec.name) == std::end(known)) {
    throw ConfigError("map.name", "unknown map '" + spec.name +
                                      "' (pomeau-manneville, interval-exchange, affine, table)");
  }
  if (spec.name == "table" && spec.table_path.empty()) {
    throw ConfigError("map.path", "required for table maps");
  }
  return spec;
}

}  // namespace

std::string to_string(Problem p) {
  for (const auto& [value, name] : kProblems) {
    if (value == p) return name;
  }
  return "unknown";
}

Problem parse_problem(const std::string& s) {
  for (const auto& [value, name] : kProblems) {
    if (s == name) return value;
  }
  throw ConfigError("problem", "unknown problem '" + s + "'");
}

std::function<double(double)> ObservableSpec::function() const {
  const double s = scale;
  if (name == "neg-cos") return [s](double x) { return -s * std::cos(x); };
  if (name == "cos") return [s](double x) { return s * std::cos(x); };
  if (name == "cos2pi") {
    return [s](double x) { return s * std::cos(2.0 * std::numbers::pi * x); };
  }
  if (name == "sin2pi") {
    return [s](double x) { return s * std::sin(2.0 * std::numbers::pi * x); };
  }
  if (name == "identity") return [s](double x) { return s * x; };
  if (name == "constant") return [s](double) { return s; };
  throw ConfigError("observable.name", "unknown observable '" + name + "'");
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  static const char* allowed[] = {"map", "epsilon", "n", "quad_order", "piece_fraction",
                                  "observable", "problem", "l", "ell", "selector",
                                  "output", "delta", "seed", "verify",
                                  "certify_samples", "toy_n", "overlay_scale"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(allowed), std::end(allowed), key) == std::end(allowed)) {
      throw ConfigError(key, "unknown field");
    }
  }

  ExperimentConfig c;
  c.map = parse_map(j);

  if (!j.contains("problem")) throw ConfigError("problem", "required");
  c.problem = parse_problem(get_field<std::string>(j, "problem", "", ""));

  c.epsilon = finite_field(j, "epsilon", c.epsilon);
  if (!(c.epsilon > 0.0 && c.epsilon <= 1.0)) throw ConfigError("epsilon", "must lie in (0, 1]");

  const auto n = get_field<long long>(j, "n", "", static_cast<long long>(c.n));
  if (n < 1) throw ConfigError("n", "must be >= 1");
  c.n = static_cast<std::size_t>(n);

  c.quad_order = get_field<int>(j, "quad_order", "", c.quad_order);
  if (c.quad_order < 1 || c.quad_order > 64) throw ConfigError("quad_order", "must lie in [1, 64]");
  c.piece_fraction = finite_field(j, "piece_fraction", c.piece_fraction);
  if (!(c.piece_fraction > 0.0 && c.piece_fraction <= 1.0)) {
    throw ConfigError("piece_fraction", "must lie in (0, 1]");
  }

  if (j.contains("observable")) {
    const json& o = j.at("observable");
    if (o.is_string()) {
      c.observable.name = o.get<std::string>();
    } else if (o.is_object()) {
      c.observable.name = get_field<std::string>(o, "name", "observable.", c.observable.name);
      c.observable.scale = get_field<double>(o, "scale", "observable.", 1.0);
    } else {
      throw ConfigError("observable", "must be a name or an object");
    }
    c.observable.function();  // validates the name
  }

  if (j.contains("l") && !j.at("l").is_null()) {
    const double l = finite_field(j, "l", 0.0);
    if (!(l > 0.0)) throw ConfigError("l", "must be positive");
    c.l = l;
  }
  c.ell = finite_field(j, "ell", c.ell);
  if (!(c.ell >= 0.0 && c.ell < 0.5)) throw ConfigError("ell", "must lie in [0, 1/2)");

  const auto sel = get_field<std::string>(j, "selector", "", "largest-modulus-real");
  if (sel == "largest-modulus-real") {
    c.selector = EigenSelector::LargestModulusReal;
  } else if (sel == "largest-modulus") {
    c.selector = EigenSelector::LargestModulus;
  } else {
    throw ConfigError("selector", "must be largest-modulus or largest-modulus-real");
  }

  c.output_dir = get_field<std::string>(j, "output", "", c.output_dir.string());

  if (j.contains("delta")) {
    const auto d = get_field<std::vector<double>>(j, "delta", "", {});
    if (d.size() != 2 || !(d[0] > 0.0) || !(d[1] > 0.0) || !(d[1] < d[0])) {
      throw ConfigError("delta", "must be [delta, smaller_delta] with both positive");
    }
    c.steps = {d[0], d[1]};
  }

  const auto seed = get_field<long long>(j, "seed", "", 0);
  if (seed < 0) throw ConfigError("seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.verify = get_field<bool>(j, "verify", "", c.verify);

  const auto samples = get_field<long long>(j, "certify_samples", "",
                                            static_cast<long long>(c.certify_samples));
  if (samples < 1) throw ConfigError("certify_samples", "must be >= 1");
  c.certify_samples = static_cast<std::size_t>(samples);
  const auto toy = get_field<long long>(j, "toy_n", "", static_cast<long long>(c.toy_n));
  if (toy < 3 || toy > 12) throw ConfigError("toy_n", "must lie in [3, 12]");
  c.toy_n = static_cast<std::size_t>(toy);
  c.overlay_scale = finite_field(j, "overlay_scale", c.overlay_scale);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error in ") + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json map;
  map["name"] = c.map.name;
  for (const auto& [key, value] : c.map.parameters) map[key] = value;
  if (!c.map.permutation.empty()) map["permutation"] = c.map.permutation;
  if (!c.map.lengths.empty()) map["lengths"] = c.map.lengths;
  if (!c.map.table_path.empty()) map["path"] = c.map.table_path;
  if (c.map.name == "affine") map["mode"] = c.map.affine_mode;

  nlohmann::ordered_json j;
  j["map"] = map;
  j["problem"] = to_string(c.problem);
  j["epsilon"] = c.epsilon;
  j["n"] = c.n;
  j["quad_order"] = c.quad_order;
  j["piece_fraction"] = c.piece_fraction;
  j["observable"] = {{"name", c.observable.name}, {"scale", c.observable.scale}};
  j["l"] = c.l ? nlohmann::ordered_json(*c.l) : nlohmann::ordered_json(nullptr);
  j["ell"] = c.ell;
  j["selector"] = c.selector == EigenSelector::LargestModulusReal ? "largest-modulus-real"
                                                                  : "largest-modulus";
  j["output"] = c.output_dir.string();
  j["delta"] = {c.steps.delta, c.steps.half_delta};
  j["seed"] = c.seed;
  j["verify"] = c.verify;
  j["certify_samples"] = c.certify_samples;
  j["toy_n"] = c.toy_n;
  j["overlay_scale"] = c.overlay_scale;
  return j;
}

}  // namespace optresp::tools
