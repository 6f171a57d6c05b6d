#include "optresp_tools/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

namespace optresp::tools {

using nlohmann::ordered_json;
using cd = std::complex<double>;

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

ordered_json complex_json(cd v) { return ordered_json::array({v.real(), v.imag()}); }

ordered_json report_json(const ResponseReport& r) {
  return {{"name", r.name},
          {"delta", r.delta},
          {"error_delta", r.error_delta},
          {"error_half_delta", r.error_half_delta},
          {"ratio", r.convergence_ratio},
          {"passed", r.passed}};
}

struct System {
  Grid grid;
  MapModel map;
  NoiseModel noise;
  QuadratureSpec quad;
  TransferMatrix matrix;
  MapSensitivity sensitivity;
};

System build_system(const ExperimentConfig& c) {
  Grid grid(c.n);
  MapModel map = make_map(c.map);
  NoiseModel noise = bump_noise(c.epsilon);
  QuadratureSpec quad{c.quad_order, c.piece_fraction};
  AssembledSystem a = assemble_with_sensitivity(grid, map, noise, quad);
  return {grid, std::move(map), std::move(noise), quad, std::move(a.matrix),
          std::move(a.sensitivity)};
}

void write_density(const std::filesystem::path& dir, const DensityVector& f0) {
  io::write_vectors_csv(dir / "invariant_density.csv", f0.grid, {"f0"}, {f0.coeffs});
}

KernelFeasibility kernel_feasibility(const ExperimentConfig& c, const TransferMatrix& a) {
  return c.l ? KernelFeasibility::from_matrix(a, *c.l) : KernelFeasibility::from_matrix(a);
}

// Kernel-path steps shrink to half the admissible range when needed.
FiniteDifferenceSteps admissible_steps(const TransferMatrix& a,
                                       const KernelPerturbation& kdot,
                                       FiniteDifferenceSteps steps) {
  const double limit = 0.5 * max_admissible_delta(a, kdot);
  if (steps.delta > limit) {
    const double shrink = limit / steps.delta;
    steps.delta *= shrink;
    steps.half_delta *= shrink;
  }
  return steps;
}

double log_rate(const EigenPair& pair, cd lambda_dot) {
  return (lambda_dot / pair.lambda).real();
}

ordered_json spectrum_json(const SpectralSet& s) {
  ordered_json j;
  j["count"] = s.eigenvalues.size();
  j["lambda1"] = complex_json(s.eigenvalues.front());
  if (s.eigenvalues.size() > 1) j["lambda2"] = complex_json(s.eigenvalues[1]);
  return j;
}

}  // namespace

void write_report(const std::filesystem::path& path, const ordered_json& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << report.dump(2) << '\n';
}

void emit_overlay(const std::filesystem::path& path, const MapModel& map,
                  const MapPerturbation& tdot, double scale) {
  const Grid& g = tdot.grid;
  const auto n = static_cast<Eigen::Index>(g.n());
  Eigen::VectorXd base(n);
  for (Eigen::Index i = 0; i < n; ++i) base[i] = map(g.center(static_cast<std::size_t>(i)));
  Eigen::VectorXd moved = base + scale * tdot.values;
  io::write_vectors_csv(path, g, {"T0", "T0_plus_scaled_tdot"}, {base, moved},
                        "scale=" + io::format_double(scale));
}

RunResult run(const ExperimentConfig& c) {
  if (c.problem == Problem::VerifyResponse) return verify_suite(c);

  Stopwatch clock;
  ordered_json timings;
  RunResult result;
  ordered_json& rep = result.report;
  rep["config"] = to_json(c);

  const System sys = build_system(c);
  timings["assembly"] = clock.lap();
  rep["assembly"] = {{"max_column_deviation", sys.matrix.info.max_column_deviation},
                     {"max_clamped_mass", sys.matrix.info.max_clamped_mass}};

  const DensityVector f0 = invariant_density(sys.matrix);
  write_density(c.output_dir, f0);
  rep["invariant_density"] = {
      {"integral", f0.integral()},
      {"residual", (sys.matrix.entries * f0.coeffs - f0.coeffs).norm()}};
  timings["invariant_density"] = clock.lap();
  if (c.problem == Problem::InvariantDensity) {
    rep["timings"] = timings;
    write_report(c.output_dir / "report.json", rep);
    return result;
  }

  const SpectralSet spectrum = compute_spectrum(sys.matrix);
  io::write_spectrum_csv(c.output_dir / "spectrum.csv", spectrum, sys.grid);
  rep["spectrum"] = spectrum_json(spectrum);
  timings["spectrum"] = clock.lap();

  std::optional<EigenPair> pair;
  const bool needs_pair = c.problem == Problem::Spectrum ||
                          c.problem == Problem::MixingKernel ||
                          c.problem == Problem::MixingMap;
  if (needs_pair) {
    if (c.problem == Problem::Spectrum) {
      try {
        pair = subdominant_eigenpair(sys.matrix, c.selector);
      } catch (const SpectralError& e) {
        rep["selected"] = {{"error", e.what()}};
      }
    } else {
      pair = subdominant_eigenpair(sys.matrix, c.selector);
    }
    if (pair) rep["selected"] = {{"lambda", complex_json(pair->lambda)}};
    timings["eigenpair"] = clock.lap();
  }

  const DensityVector observable = project_observable(sys.grid, c.observable.function());
  const ResolventSolver resolvent(sys.matrix, f0);

  switch (c.problem) {
    case Problem::ExpectationKernel: {
      const KernelFeasibility feas = kernel_feasibility(c, sys.matrix);
      const KernelPerturbation k = optimal_kernel_for_expectation(resolvent, observable, feas);
      io::write_kernel_heatmap(c.output_dir / "perturbation_matrix.csv", k.values, sys.grid,
                               "kdot rows=x(landing) cols=y(source)");
      rep["l"] = feas.l;
      rep["objective"] = expectation_derivative(resolvent, k, observable);
      if (c.verify) {
        rep["verification"] = {report_json(verify_density_response_kernel(
            sys.matrix, k, admissible_steps(sys.matrix, k, c.steps)))};
      }
      break;
    }
    case Problem::MixingKernel: {
      const KernelFeasibility feas = kernel_feasibility(c, sys.matrix);
      const KernelPerturbation k = optimal_kernel_for_mixing(*pair, feas);
      io::write_kernel_heatmap(c.output_dir / "perturbation_matrix.csv", k.values, sys.grid,
                               "kdot rows=x(landing) cols=y(source)");
      rep["l"] = feas.l;
      rep["objective"] = mixing_rate_derivative(*pair, k);
      rep["lambda_dot"] = complex_json(eigenvalue_response_kernel(*pair, k));
      if (c.verify) {
        rep["verification"] = {report_json(verify_eigenvalue_response_kernel(
            sys.matrix, *pair, k, admissible_steps(sys.matrix, k, c.steps)))};
      }
      break;
    }
    case Problem::ExpectationMap: {
      const MapFeasibility feas = MapFeasibility::from_map(sys.grid, sys.map, c.ell);
      const MapPerturbation t =
          optimal_map_for_expectation(resolvent, observable, sys.sensitivity, feas);
      io::write_vectors_csv(c.output_dir / "perturbation.csv", sys.grid, {"tdot"}, {t.values});
      emit_overlay(c.output_dir / "overlay.csv", sys.map, t, c.overlay_scale);
      rep["objective"] = discrete_inner_product(
          project_out_f0(observable, f0), density_response_map(resolvent, sys.sensitivity, t));
      if (c.verify) {
        rep["verification"] = {report_json(verify_density_response_map(
            sys.grid, sys.map, sys.noise, sys.quad, t, c.steps))};
      }
      break;
    }
    case Problem::MixingMap: {
      const MapFeasibility feas = MapFeasibility::from_map(sys.grid, sys.map, c.ell);
      const MapPerturbation t = optimal_map_for_mixing(*pair, sys.sensitivity, feas);
      io::write_vectors_csv(c.output_dir / "perturbation.csv", sys.grid, {"tdot"}, {t.values});
      emit_overlay(c.output_dir / "overlay.csv", sys.map, t, c.overlay_scale);
      const cd lambda_dot =
          eigenvalue_response_kernel(*pair, kernel_from_map(sys.sensitivity, t));
      rep["objective"] = log_rate(*pair, lambda_dot);
      rep["lambda_dot"] = complex_json(lambda_dot);
      if (c.verify) {
        rep["verification"] = {report_json(verify_eigenvalue_response_map(
            sys.grid, sys.map, sys.noise, sys.quad, *pair, sys.sensitivity, t, c.steps))};
      }
      break;
    }
    default:
      break;
  }
  timings["problem"] = clock.lap();
  rep["timings"] = timings;

  if (rep.contains("verification")) {
    for (const auto& v : rep["verification"]) {
      if (!v["passed"].get<bool>()) result.exit_code = kExitVerification;
    }
  }
  write_report(c.output_dir / "report.json", rep);
  return result;
}

namespace {

struct Toy {
  TransferMatrix matrix;
  MapSensitivity sensitivity;
  DensityVector observable;
};

// Random column-stochastic matrix with some structural zeros, a random
// zero-column-sum map sensitivity and a random observable.
Toy random_toy(std::size_t n, std::mt19937_64& rng) {
  const auto ni = static_cast<Eigen::Index>(n);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd p(ni, ni);
  for (Eigen::Index j = 0; j < ni; ++j) {
    for (Eigen::Index i = 0; i < ni; ++i) {
      p(i, j) = uniform(rng) < 0.2 && i != j && i != (j + 1) % ni ? 0.0 : uniform(rng);
    }
    p.col(j) /= p.col(j).sum();
  }
  Eigen::MatrixXd g(ni, ni);
  for (Eigen::Index j = 0; j < ni; ++j) {
    for (Eigen::Index i = 0; i < ni; ++i) g(i, j) = normal(rng);
    g.col(j).array() -= g.col(j).mean();
  }
  Eigen::VectorXd c(ni);
  for (Eigen::Index i = 0; i < ni; ++i) c[i] = normal(rng);
  const Grid grid(n);
  return {TransferMatrix(grid, p), MapSensitivity(grid, g), DensityVector(grid, c)};
}

ordered_json certificate_json(const std::string& name, const OptimalityCertificate& cert) {
  const bool ok = cert.passed() && cert.fraction_beaten >= 0.999;
  return {{"name", name},
          {"objective", cert.objective},
          {"best_random", cert.best_random},
          {"fraction_beaten", cert.fraction_beaten},
          {"kkt_cosine", cert.kkt_cosine},
          {"norm_error", cert.norm_error},
          {"feasibility_error", cert.feasibility_error},
          {"samples", cert.samples},
          {"passed", ok}};
}

}  // namespace

RunResult verify_suite(const ExperimentConfig& c) {
  Stopwatch clock;
  ordered_json timings;
  RunResult result;
  ordered_json& rep = result.report;
  rep["config"] = to_json(c);
  ordered_json checks = ordered_json::array();
  std::mt19937_64 rng(c.seed);

  // Finite-difference checks on the configured system with random directions.
  const System sys = build_system(c);
  const DensityVector f0 = invariant_density(sys.matrix);
  const EigenPair pair = subdominant_eigenpair(sys.matrix, c.selector);
  timings["setup"] = clock.lap();

  const KernelFeasibility kfeas = kernel_feasibility(c, sys.matrix);
  const KernelPerturbation k = sample_kernel_feasible(kfeas, rng);
  const FiniteDifferenceSteps ksteps = admissible_steps(sys.matrix, k, c.steps);
  checks.push_back(report_json(verify_density_response_kernel(sys.matrix, k, ksteps)));
  checks.push_back(report_json(verify_eigenvalue_response_kernel(sys.matrix, pair, k, ksteps)));
  const MapPerturbation t = sample_map_feasible(MapFeasibility::from_map(sys.grid, sys.map, c.ell), rng);
  checks.push_back(report_json(
      verify_density_response_map(sys.grid, sys.map, sys.noise, sys.quad, t, c.steps)));
  checks.push_back(report_json(verify_eigenvalue_response_map(
      sys.grid, sys.map, sys.noise, sys.quad, pair, sys.sensitivity, t, c.steps)));
  timings["finite_differences"] = clock.lap();

  // Brute-force certification of the four optimal operations.
  const Toy toy = random_toy(c.toy_n, rng);
  const DensityVector tf0 = invariant_density(toy.matrix);
  const ResolventSolver tres(toy.matrix, tf0);
  const EigenPair tpair = subdominant_eigenpair(toy.matrix, EigenSelector::LargestModulus);
  const KernelFeasibility tk = KernelFeasibility::from_matrix(toy.matrix);
  const MapFeasibility tm = MapFeasibility::full(toy.matrix.grid);
  const std::uint64_t cseed = c.seed + 1;

  const KernelPerturbation k_exp = optimal_kernel_for_expectation(tres, toy.observable, tk);
  checks.push_back(certificate_json(
      "certify expectation (kernel)",
      certify_kernel_optimum(
          [&](const KernelPerturbation& kd) {
            return expectation_derivative(tres, kd, toy.observable);
          },
          k_exp, tk, Sense::Maximize, c.certify_samples, cseed)));

  const KernelPerturbation k_mix = optimal_kernel_for_mixing(tpair, tk);
  checks.push_back(certificate_json(
      "certify mixing (kernel)",
      certify_kernel_optimum(
          [&](const KernelPerturbation& kd) {
            return log_rate(tpair, eigenvalue_response_kernel(tpair, kd));
          },
          k_mix, tk, Sense::Minimize, c.certify_samples, cseed)));

  const MapPerturbation t_exp =
      optimal_map_for_expectation(tres, toy.observable, toy.sensitivity, tm);
  checks.push_back(certificate_json(
      "certify expectation (map)",
      certify_map_optimum(
          [&](const MapPerturbation& td) {
            return discrete_inner_product(toy.observable,
                                          density_response_map(tres, toy.sensitivity, td));
          },
          t_exp, tm, Sense::Maximize, c.certify_samples, cseed)));

  const MapPerturbation t_mix = optimal_map_for_mixing(tpair, toy.sensitivity, tm);
  checks.push_back(certificate_json(
      "certify mixing (map)",
      certify_map_optimum(
          [&](const MapPerturbation& td) {
            return log_rate(tpair,
                            eigenvalue_response_kernel(tpair, kernel_from_map(toy.sensitivity, td)));
          },
          t_mix, tm, Sense::Minimize, c.certify_samples, cseed)));
  timings["certification"] = clock.lap();

  // Negative controls: the harness must reject what it is meant to reject.
  {
    Eigen::MatrixXd broken = k_exp.values;
    broken.col(0).array() += 1.0;
    bool rejected = false;
    try {
      density_response_kernel(tres, KernelPerturbation(toy.matrix.grid, broken));
    } catch (const PreconditionError&) {
      rejected = true;
    }
    checks.push_back({{"name", "control: broken column mean rejected"}, {"passed", rejected}});
  }
  {
    ResponseReport fake;
    fake.predicted = Eigen::VectorXcd::Zero(1);
    fake.fd_delta = Eigen::VectorXcd::Constant(1, cd(4.0, 0.0));
    fake.fd_half_delta = Eigen::VectorXcd::Constant(1, cd(1.0, 0.0));
    finalize_report(fake);
    checks.push_back({{"name", "control: ratio 4 flagged"}, {"passed", !fake.passed}});
  }

  bool all = true;
  for (const auto& ch : checks) all = all && ch["passed"].get<bool>();
  rep["checks"] = checks;
  rep["passed"] = all;
  rep["timings"] = timings;
  result.exit_code = all ? kExitOk : kExitVerification;
  write_report(c.output_dir / "report.json", rep);
  return result;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const InvalidParameter*>(&e)) return kExitConfig;
  if (dynamic_cast<const InvalidInput*>(&e)) return kExitConfig;
  return kExitNumeric;
}

}  // namespace optresp::tools
