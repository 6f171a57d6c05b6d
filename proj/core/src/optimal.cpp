#include "optresp/optimal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "optresp/error.hpp"

namespace optresp {

namespace {

void require_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw InvalidInput(std::string("grid mismatch in ") + what);
}

KernelFeasibility from_mask(const Grid& grid, double l, KernelMask mask) {
  const auto n = static_cast<Eigen::Index>(grid.n());
  KernelFeasibility feas{grid, l, std::move(mask), Eigen::VectorXd::Zero(n), {}};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto count = feas.mask.col(j).count();
    feas.column_measure[j] = static_cast<double>(count) / static_cast<double>(n);
    if (count > 0) feas.active_columns.push_back(static_cast<std::size_t>(j));
  }
  return feas;
}

double kernel_norm(const Eigen::MatrixXd& k) {
  return std::sqrt(k.squaredNorm()) / static_cast<double>(k.rows());
}

double cell_norm(const Eigen::VectorXd& v) {
  return std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

// Degeneracy is judged relative to the scale of the inputs that built the
// gradient, so a rescaled observable gives the same verdict.
void require_nondegenerate(double norm, double scale, const char* what) {
  if (!(norm > 1e-12 * std::max(1.0, scale))) {
    throw DegenerateObjective(std::string(what) +
                              ": projected gradient vanishes; every feasible "
                              "perturbation is optimal");
  }
}

}  // namespace

KernelFeasibility KernelFeasibility::from_matrix(const TransferMatrix& a, double l) {
  if (!(l > 0.0) || !std::isfinite(l)) {
    throw InvalidParameter("feasibility level l must be positive");
  }
  const Eigen::MatrixXd k = a.entries * static_cast<double>(a.n());
  return from_mask(a.grid, l, (k.array() >= l).matrix());
}

KernelFeasibility KernelFeasibility::from_matrix(const TransferMatrix& a) {
  const double kmax = a.entries.maxCoeff() * static_cast<double>(a.n());
  return from_matrix(a, 1e-3 * kmax);
}

KernelFeasibility KernelFeasibility::full(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.n());
  return from_mask(grid, 0.0, KernelMask::Constant(n, n, true));
}

MapFeasibility MapFeasibility::from_map(const Grid& grid, const MapModel& map,
                                        double ell) {
  if (!(ell >= 0.0 && ell < 0.5)) {
    throw InvalidParameter("map feasibility margin must lie in [0, 1/2)");
  }
  const auto n = static_cast<Eigen::Index>(grid.n());
  CellMask mask(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = map(grid.center(static_cast<std::size_t>(i)));
    mask[i] = t >= ell && t <= 1.0 - ell;
  }
  return {grid, ell, std::move(mask)};
}

MapFeasibility MapFeasibility::full(const Grid& grid) {
  return {grid, 0.0, CellMask::Constant(static_cast<Eigen::Index>(grid.n()), true)};
}

Eigen::MatrixXd project_kernel_feasible(const Eigen::MatrixXd& field,
                                        const KernelFeasibility& feas) {
  const auto n = static_cast<Eigen::Index>(feas.grid.n());
  if (field.rows() != n || field.cols() != n) {
    throw InvalidInput("field does not match the feasibility grid");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t jj : feas.active_columns) {
    const auto j = static_cast<Eigen::Index>(jj);
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (feas.mask(i, j)) {
        sum += field(i, j);
        ++count;
      }
    }
    const double mean = sum / static_cast<double>(count);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (feas.mask(i, j)) out(i, j) = field(i, j) - mean;
    }
  }
  return out;
}

KernelPerturbation optimal_kernel_for_expectation(
    const ResolventSolver& resolvent, const DensityVector& c,
    const KernelFeasibility& feas) {
  require_grid(resolvent.f0().grid, feas.grid, "optimal_kernel_for_expectation");
  if (feas.empty()) throw InfeasibleError("kernel feasible set is empty");
  const DensityVector y = resolvent.solve_adjoint(c);
  const Eigen::MatrixXd gradient = y.coeffs * resolvent.f0().coeffs.transpose();
  Eigen::MatrixXd k = project_kernel_feasible(gradient, feas);
  const double norm = kernel_norm(k);
  require_nondegenerate(norm, c.norm() * resolvent.f0().norm(),
                        "kernel expectation problem");
  k /= norm;
  return {feas.grid, std::move(k), feas.mask};
}

KernelPerturbation optimal_kernel_for_expectation(
    const TransferMatrix& a, const DensityVector& f0, const DensityVector& c,
    const KernelFeasibility& feas) {
  return optimal_kernel_for_expectation(ResolventSolver(a, f0), c, feas);
}

KernelPerturbation optimal_kernel_for_mixing(const EigenPair& pair,
                                             const KernelFeasibility& feas) {
  require_grid(pair.right.grid, feas.grid, "optimal_kernel_for_mixing");
  if (feas.empty()) throw InfeasibleError("kernel feasible set is empty");
  const KernelGrid e = build_E_field(pair);
  Eigen::MatrixXd k = -project_kernel_feasible(e.values, feas);
  const double norm = kernel_norm(k);
  require_nondegenerate(norm, kernel_norm(e.values), "kernel mixing problem");
  k /= norm;
  return {feas.grid, std::move(k), feas.mask};
}

MapPerturbation optimal_map_for_expectation(const ResolventSolver& resolvent,
                                            const DensityVector& c,
                                            const MapSensitivity& sens,
                                            const MapFeasibility& feas) {
  require_grid(resolvent.f0().grid, sens.grid, "optimal_map_for_expectation");
  require_grid(sens.grid, feas.grid, "optimal_map_for_expectation");
  if (feas.empty()) throw InfeasibleError("map feasible set is empty");
  const DensityVector y = resolvent.solve_adjoint(c);
  Eigen::VectorXd t =
      -resolvent.f0().coeffs.cwiseProduct(sens.apply_G(y.coeffs));
  t = t.cwiseProduct(feas.mask.cast<double>());
  const double norm = cell_norm(t);
  require_nondegenerate(norm, c.norm() * resolvent.f0().norm(),
                        "map expectation problem");
  t /= norm;
  return {sens.grid, std::move(t), feas.mask};
}

MapPerturbation optimal_map_for_mixing(const EigenPair& pair,
                                       const MapSensitivity& sens,
                                       const MapFeasibility& feas) {
  require_grid(pair.right.grid, feas.grid, "optimal_map_for_mixing");
  if (feas.empty()) throw InfeasibleError("map feasible set is empty");
  const DensityVector ehat = build_Ehat_field(pair, sens);
  Eigen::VectorXd t = -ehat.coeffs.cwiseProduct(feas.mask.cast<double>());
  const double norm = cell_norm(t);
  require_nondegenerate(norm, std::norm(pair.lambda), "map mixing problem");
  t /= norm;
  return {sens.grid, std::move(t), feas.mask};
}

double max_admissible_delta(const TransferMatrix& a,
                            const KernelPerturbation& kdot) {
  require_grid(a.grid, kdot.grid, "max_admissible_delta");
  const double n = static_cast<double>(a.n());
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < a.entries.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.entries.rows(); ++i) {
      const double slope = kdot.values(i, j) / n;
      if (slope < 0.0) best = std::min(best, a.entries(i, j) / -slope);
    }
  }
  return best;
}

TransferMatrix perturbed_operator(const TransferMatrix& a,
                                  const KernelPerturbation& kdot, double delta) {
  require_grid(a.grid, kdot.grid, "perturbed_operator");
  require_zero_column_mean(kdot);
  if (delta < 0.0) {
    return perturbed_operator(
        a, KernelPerturbation(kdot.grid, -kdot.values, kdot.support_mask), -delta);
  }
  const double limit = max_admissible_delta(a, kdot);
  if (delta > limit) {
    throw StepTooLarge("step would make the kernel negative", limit);
  }
  TransferMatrix out = a;
  out.entries += (delta / static_cast<double>(a.n())) * kdot.values;
  out.entries = out.entries.cwiseMax(0.0);
  const Eigen::RowVectorXd sums = out.entries.colwise().sum();
  if ((sums.array() - 1.0).abs().maxCoeff() > 1e-10) {
    throw PreconditionError("perturbed columns drift from 1 beyond round-off");
  }
  out.entries.array().rowwise() /= sums.array();
  out.info.max_column_deviation = (sums.array() - 1.0).abs().maxCoeff();
  return out;
}

TransferMatrix perturbed_operator(const Grid& grid, const MapModel& map,
                                  const NoiseModel& noise,
                                  const QuadratureSpec& quad,
                                  const MapPerturbation& tdot, double delta) {
  require_grid(grid, tdot.grid, "perturbed_operator");
  std::vector<double> cells(tdot.values.data(),
                            tdot.values.data() + tdot.values.size());
  return assemble_transfer_matrix(grid, perturbed_map(map, std::move(cells), delta),
                                  noise, quad);
}

}  // namespace optresp
