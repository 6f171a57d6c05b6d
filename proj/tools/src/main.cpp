#include <iostream>
#include <fstream>

#include <CLI11.hpp>

#include "optresp_tools/runner.hpp"

namespace ot = optresp::tools;

int main(int argc, char** argv) {
  CLI::App app{"optresp: transfer-operator spectra, linear response and optimal perturbations"};
  app.set_version_flag("--version", "optresp 0.1.0");

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> problem, map, output, selector, observable;
  std::optional<double> epsilon, l, ell;
  std::optional<long long> n, seed;
  bool print_config = false;

  app.add_option("config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--problem", problem,
                 "expectation-kernel | mixing-kernel | expectation-map | mixing-map | "
                 "spectrum | invariant-density | verify-response");
  app.add_option("--map", map, "pomeau-manneville | interval-exchange | affine | table");
  app.add_option("--epsilon", epsilon, "noise half-width in (0, 1]");
  app.add_option("-n,--cells", n, "grid size");
  app.add_option("--l", l, "kernel feasibility threshold");
  app.add_option("--ell", ell, "map feasibility margin");
  app.add_option("--selector", selector, "largest-modulus | largest-modulus-real");
  app.add_option("--observable", observable, "neg-cos | cos | cos2pi | sin2pi | identity | constant");
  app.add_option("--seed", seed, "seed for verification sampling");
  app.add_option("-o,--output", output, "output directory");
  app.add_option("--set", overrides, "extra override key=json-value (repeatable)");
  app.add_flag("--print-config", print_config, "print the resolved config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ot::kExitConfig;
  }

  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      j = nlohmann::json::parse(in, nullptr, true, true);
    }
    if (problem) j["problem"] = *problem;
    if (map) j["map"] = *map;
    if (epsilon) j["epsilon"] = *epsilon;
    if (n) j["n"] = *n;
    if (l) j["l"] = *l;
    if (ell) j["ell"] = *ell;
    if (selector) j["selector"] = *selector;
    if (observable) j["observable"] = *observable;
    if (seed) j["seed"] = *seed;
    if (output) j["output"] = *output;
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ot::ConfigError("--set", "expected key=value, got '" + kv + "'");
      const std::string value = kv.substr(eq + 1);
      nlohmann::json parsed;
      try {
        parsed = nlohmann::json::parse(value);
      } catch (const nlohmann::json::parse_error&) {
        parsed = value;  // bare strings
      }
      j[kv.substr(0, eq)] = parsed;
    }

    const ot::ExperimentConfig config = ot::parse_config(j);
    if (print_config) {
      std::cout << ot::to_json(config).dump(2) << '\n';
      return ot::kExitOk;
    }
    const ot::RunResult result = ot::run(config);
    std::cout << "wrote " << (config.output_dir / "report.json").string() << '\n';
    if (result.exit_code == ot::kExitVerification) {
      std::cerr << "verification failed; see report.json\n";
    }
    return result.exit_code;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ot::kExitConfig;
  } catch (const std::exception& e) {
    const int rc = ot::exit_code_for(e);
    std::cerr << (rc == ot::kExitConfig ? "config error: " : "numeric error: ") << e.what() << '\n';
    return rc;
  }
}
