#include "optresp/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "optresp/error.hpp"

namespace optresp {

namespace {

double kernel_norm(const Eigen::MatrixXd& k) {
  return std::sqrt(k.squaredNorm()) / static_cast<double>(k.rows());
}

double cell_norm(const Eigen::VectorXd& v) {
  return std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

double signed_value(Sense sense, double v) {
  return sense == Sense::Maximize ? v : -v;
}

// Helmert contrasts: an orthonormal basis of the zero-sum subspace of R^m.
Eigen::VectorXd helmert(Eigen::Index m, Eigen::Index k) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
  const double kk = static_cast<double>(k);
  const double s = 1.0 / std::sqrt(kk * (kk + 1.0));
  v.head(k).setConstant(s);
  v[k] = -kk * s;
  return v;
}

struct Tally {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t beaten = 0;
  bool strict = true;

  void add(double optimum, double candidate) {
    best = std::max(best, candidate);
    if (optimum >= candidate) ++beaten;
    if (!(optimum > candidate)) strict = false;
  }
};

}  // namespace

KernelPerturbation sample_kernel_feasible(const KernelFeasibility& feas,
                                         std::mt19937_64& rng) {
  if (feas.empty()) throw InfeasibleError("kernel feasible set is empty");
  const auto n = static_cast<Eigen::Index>(feas.grid.n());
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd raw(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) raw(i, j) = normal(rng);
  }
  Eigen::MatrixXd k = project_kernel_feasible(raw, feas);
  const double norm = kernel_norm(k);
  if (!(norm > 0.0)) {
    throw InfeasibleError("feasible kernel subspace is trivial (one cell per column)");
  }
  return {feas.grid, k / norm, feas.mask};
}

MapPerturbation sample_map_feasible(const MapFeasibility& feas,
                                    std::mt19937_64& rng) {
  if (feas.empty()) throw InfeasibleError("map feasible set is empty");
  const auto n = static_cast<Eigen::Index>(feas.grid.n());
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) t[i] = feas.mask[i] ? normal(rng) : 0.0;
  const double norm = cell_norm(t);
  if (!(norm > 0.0)) throw InfeasibleError("sampled a zero map perturbation");
  return {feas.grid, t / norm, feas.mask};
}

std::vector<Eigen::MatrixXd> kernel_feasible_basis(const KernelFeasibility& feas) {
  const auto n = static_cast<Eigen::Index>(feas.grid.n());
  const double scale = static_cast<double>(n);
  std::vector<Eigen::MatrixXd> basis;
  for (std::size_t jj : feas.active_columns) {
    const auto j = static_cast<Eigen::Index>(jj);
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (feas.mask(i, j)) rows.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    for (Eigen::Index k = 1; k < m; ++k) {
      const Eigen::VectorXd h = helmert(m, k);
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index r = 0; r < m; ++r) b(rows[r], j) = scale * h[r];
      basis.push_back(std::move(b));
    }
  }
  return basis;
}

std::vector<Eigen::VectorXd> map_feasible_basis(const MapFeasibility& feas) {
  const auto n = static_cast<Eigen::Index>(feas.grid.n());
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!feas.mask[i]) continue;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[i] = std::sqrt(static_cast<double>(n));
    basis.push_back(std::move(b));
  }
  return basis;
}

OptimalityCertificate certify_kernel_optimum(const KernelObjective& objective,
                                             const KernelPerturbation& optimum,
                                             const KernelFeasibility& feas,
                                             Sense sense, std::size_t samples,
                                             std::uint64_t seed) {
  if (!(optimum.grid == feas.grid)) throw InvalidInput("grid mismatch in certification");
  OptimalityCertificate cert;
  cert.samples = samples;
  cert.objective = objective(optimum);
  cert.norm_error = std::abs(optimum.norm() - 1.0);

  const auto n = static_cast<Eigen::Index>(feas.grid.n());
  double infeasible = optimum.max_column_mean();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!feas.mask(i, j)) infeasible = std::max(infeasible, std::abs(optimum.values(i, j)));
    }
  }
  cert.feasibility_error = infeasible;

  const double target = signed_value(sense, cert.objective);
  std::mt19937_64 rng(seed);
  Tally tally;
  for (std::size_t s = 0; s < samples; ++s) {
    tally.add(target, signed_value(sense, objective(sample_kernel_feasible(feas, rng))));
  }
  cert.best_random = signed_value(sense, tally.best);
  cert.fraction_beaten =
      samples == 0 ? 1.0 : static_cast<double>(tally.beaten) / static_cast<double>(samples);
  cert.beats_all_strictly = tally.strict;

  Eigen::MatrixXd gradient = Eigen::MatrixXd::Zero(n, n);
  for (const Eigen::MatrixXd& b : kernel_feasible_basis(feas)) {
    gradient += objective(KernelPerturbation(feas.grid, b, feas.mask)) * b;
  }
  const double gnorm = kernel_norm(gradient);
  cert.kkt_cosine =
      gnorm > 0.0 ? signed_value(sense, kernel_inner_product(optimum.values, gradient)) /
                        (gnorm * optimum.norm())
                  : 0.0;
  return cert;
}

OptimalityCertificate certify_map_optimum(const MapObjective& objective,
                                          const MapPerturbation& optimum,
                                          const MapFeasibility& feas,
                                          Sense sense, std::size_t samples,
                                          std::uint64_t seed) {
  if (!(optimum.grid == feas.grid)) throw InvalidInput("grid mismatch in certification");
  OptimalityCertificate cert;
  cert.samples = samples;
  cert.objective = objective(optimum);
  cert.norm_error = std::abs(optimum.norm() - 1.0);
  double infeasible = 0.0;
  for (Eigen::Index i = 0; i < optimum.values.size(); ++i) {
    if (!feas.mask[i]) infeasible = std::max(infeasible, std::abs(optimum.values[i]));
  }
  cert.feasibility_error = infeasible;

  const double target = signed_value(sense, cert.objective);
  std::mt19937_64 rng(seed);
  Tally tally;
  for (std::size_t s = 0; s < samples; ++s) {
    tally.add(target, signed_value(sense, objective(sample_map_feasible(feas, rng))));
  }
  cert.best_random = signed_value(sense, tally.best);
  cert.fraction_beaten =
      samples == 0 ? 1.0 : static_cast<double>(tally.beaten) / static_cast<double>(samples);
  cert.beats_all_strictly = tally.strict;

  Eigen::VectorXd gradient = Eigen::VectorXd::Zero(optimum.values.size());
  for (const Eigen::VectorXd& b : map_feasible_basis(feas)) {
    gradient += objective(MapPerturbation(feas.grid, b, feas.mask)) * b;
  }
  const double gnorm = cell_norm(gradient);
  const double inner =
      gradient.dot(optimum.values) / static_cast<double>(gradient.size());
  cert.kkt_cosine =
      gnorm > 0.0 ? signed_value(sense, inner) / (gnorm * optimum.norm()) : 0.0;
  return cert;
}

}  // namespace optresp
