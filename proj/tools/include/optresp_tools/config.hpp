#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "optresp/optresp.hpp"

namespace optresp::tools {

/// Invalid or missing configuration field; `field` is the dotted JSON path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class Problem {
  ExpectationKernel,
  MixingKernel,
  ExpectationMap,
  MixingMap,
  Spectrum,
  InvariantDensity,
  VerifyResponse,
};

std::string to_string(Problem p);
Problem parse_problem(const std::string& s);

/// Observable c(x) = scale · base(x) with base one of: neg-cos (-cos x), cos,
/// cos2pi, sin2pi, identity, constant.
struct ObservableSpec {
  std::string name = "neg-cos";
  double scale = 1.0;

  std::function<double(double)> function() const;
};

struct ExperimentConfig {
  MapSpec map;
  double epsilon = 0.1;
  std::size_t n = 500;
  int quad_order = 8;
  double piece_fraction = 0.125;
  ObservableSpec observable;
  Problem problem = Problem::Spectrum;
  /// Kernel threshold; unset means 1e-3 · max k₀.
  std::optional<double> l;
  double ell = 0.0;
  EigenSelector selector = EigenSelector::LargestModulusReal;
  std::filesystem::path output_dir = "out";
  FiniteDifferenceSteps steps;
  std::uint64_t seed = 0;
  /// Finite-difference checks on the computed optimum.
  bool verify = true;
  /// Random candidates per brute-force certification.
  std::size_t certify_samples = 2000;
  /// Grid size of the randomized certification systems.
  std::size_t toy_n = 8;
  double overlay_scale = 0.01;
};

/// Every field has a default except map.name and problem.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form of a config (echoed into report.json).
nlohmann::ordered_json to_json(const ExperimentConfig& c);

}  // namespace optresp::tools
