#pragma once

#include <filesystem>

#include <json.hpp>

#include "optresp_tools/config.hpp"

namespace optresp::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitVerification = 4;

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::ordered_json report;
};

/// Runs one experiment and writes its files into config.output_dir:
/// report.json always; spectrum.csv and invariant_density.csv for every
/// problem that assembles a matrix; perturbation_matrix.csv (kernel problems)
/// or perturbation.csv + overlay.csv (map problems).
/// Module errors propagate; the caller maps them to exit codes.
RunResult run(const ExperimentConfig& config);

/// Finite-difference checks on the configured system plus brute-force
/// certification of all four optimal operations on randomized toy systems.
/// exit_code is kExitVerification if any check fails.
RunResult verify_suite(const ExperimentConfig& config);

/// Writes x, T₀(x), T₀(x) + scale·Ṫ(x) at cell centres.
void emit_overlay(const std::filesystem::path& path, const MapModel& map,
                  const MapPerturbation& tdot, double scale);

/// Maps an exception escaping run() to the documented exit code and message.
int exit_code_for(const std::exception& e);

/// Writes `report` as pretty JSON with a trailing newline.
void write_report(const std::filesystem::path& path,
                  const nlohmann::ordered_json& report);

}  // namespace optresp::tools
