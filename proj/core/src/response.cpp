#include "optresp/response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "optresp/error.hpp"
#include "optresp/optimal.hpp"

namespace optresp {

using cd = std::complex<double>;

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

void require_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw InvalidInput(std::string("grid mismatch in ") + what);
}

}  // namespace

KernelPerturbation::KernelPerturbation(Grid g, Eigen::MatrixXd v,
                                       std::optional<KernelMask> mask)
    : grid(g), values(std::move(v)), support_mask(std::move(mask)) {
  const auto n = static_cast<Eigen::Index>(grid.n());
  if (values.rows() != n || values.cols() != n) {
    throw InvalidInput("kernel perturbation must be n x n");
  }
  if (!values.allFinite()) throw InvalidInput("kernel perturbation is not finite");
  if (support_mask && (support_mask->rows() != n || support_mask->cols() != n)) {
    throw InvalidInput("kernel mask must be n x n");
  }
}

double KernelPerturbation::norm() const {
  return std::sqrt(values.squaredNorm()) / static_cast<double>(grid.n());
}

double KernelPerturbation::max_column_mean() const {
  return (values.colwise().sum().cwiseAbs() / static_cast<double>(grid.n()))
      .maxCoeff();
}

Eigen::VectorXd KernelPerturbation::apply(const Eigen::VectorXd& f) const {
  return values * f / static_cast<double>(grid.n());
}

Eigen::VectorXcd KernelPerturbation::apply(const Eigen::VectorXcd& f) const {
  return values.cast<cd>() * f / static_cast<double>(grid.n());
}

MapPerturbation::MapPerturbation(Grid g, Eigen::VectorXd v,
                                 std::optional<CellMask> mask)
    : grid(g), values(std::move(v)), support_mask(std::move(mask)) {
  const auto n = static_cast<Eigen::Index>(grid.n());
  if (values.size() != n) throw InvalidInput("map perturbation must have n values");
  if (!values.allFinite()) throw InvalidInput("map perturbation is not finite");
  if (support_mask && support_mask->size() != n) {
    throw InvalidInput("map mask must have n entries");
  }
}

double MapPerturbation::norm() const {
  return std::sqrt(values.squaredNorm() / static_cast<double>(grid.n()));
}

void require_zero_column_mean(const KernelPerturbation& kdot) {
  const double scale = std::max(1.0, kdot.values.cwiseAbs().maxCoeff());
  const double mean = kdot.max_column_mean();
  if (mean > kColumnMeanTolerance * scale) {
    throw PreconditionError("kernel perturbation has a nonzero column mean (" +
                            sci(mean) + ")");
  }
  if (kdot.support_mask) {
    const Eigen::MatrixXd outside =
        kdot.values.cwiseAbs().cwiseProduct(
            (!kdot.support_mask->array()).cast<double>().matrix());
    if (outside.maxCoeff() > 1e-12 * scale) {
      throw PreconditionError("kernel perturbation is nonzero outside its mask");
    }
  }
}

KernelPerturbation kernel_from_map(const MapSensitivity& sens,
                                   const MapPerturbation& tdot) {
  require_grid(sens.grid, tdot.grid, "kernel_from_map");
  const double n = static_cast<double>(sens.grid.n());
  Eigen::MatrixXd k = -n * sens.factor * tdot.values.asDiagonal();
  return {sens.grid, std::move(k)};
}

DensityVector density_response_kernel(const ResolventSolver& resolvent,
                                      const KernelPerturbation& kdot) {
  require_grid(resolvent.f0().grid, kdot.grid, "density_response_kernel");
  require_zero_column_mean(kdot);
  const DensityVector v(kdot.grid, kdot.apply(resolvent.f0().coeffs));
  return resolvent.solve(v);
}

DensityVector density_response_kernel(const TransferMatrix& a,
                                      const DensityVector& f0,
                                      const KernelPerturbation& kdot) {
  return density_response_kernel(ResolventSolver(a, f0), kdot);
}

double expectation_derivative(const ResolventSolver& resolvent,
                              const KernelPerturbation& kdot,
                              const DensityVector& c) {
  const DensityVector r = density_response_kernel(resolvent, kdot);
  return discrete_inner_product(project_out_f0(c, resolvent.f0()), r);
}

double expectation_derivative(const TransferMatrix& a, const DensityVector& f0,
                              const KernelPerturbation& kdot,
                              const DensityVector& c) {
  return expectation_derivative(ResolventSolver(a, f0), kdot, c);
}

double expectation_derivative_adjoint(const ResolventSolver& resolvent,
                                      const KernelPerturbation& kdot,
                                      const DensityVector& c) {
  require_grid(resolvent.f0().grid, kdot.grid, "expectation_derivative_adjoint");
  require_zero_column_mean(kdot);
  const DensityVector y = resolvent.solve_adjoint(c);
  const DensityVector v(kdot.grid, kdot.apply(resolvent.f0().coeffs));
  return discrete_inner_product(y, v);
}

DensityVector density_response_map(const ResolventSolver& resolvent,
                                   const MapSensitivity& sens,
                                   const MapPerturbation& tdot) {
  require_grid(resolvent.f0().grid, sens.grid, "density_response_map");
  require_grid(sens.grid, tdot.grid, "density_response_map");
  Eigen::VectorXd weighted = tdot.values.cwiseProduct(resolvent.f0().coeffs);
  DensityVector v(sens.grid, -(sens.factor * weighted));
  return resolvent.solve(v);
}

cd eigenvalue_response_kernel(const EigenPair& pair,
                              const KernelPerturbation& kdot) {
  require_grid(pair.right.grid, kdot.grid, "eigenvalue_response_kernel");
  const double n = static_cast<double>(kdot.grid.n());
  const Eigen::VectorXcd ke = kdot.values.cast<cd>() * pair.right.coeffs;
  return pair.left.coeffs.dot(ke) / (n * n);
}

KernelGrid build_E_field(const EigenPair& pair) {
  const Eigen::VectorXcd left = pair.left.coeffs.conjugate() * std::conj(pair.lambda);
  Eigen::MatrixXd e = (left * pair.right.coeffs.transpose()).real();
  return {pair.right.grid, std::move(e)};
}

double mixing_rate_derivative(const EigenPair& pair,
                              const KernelPerturbation& kdot) {
  const double mod2 = std::norm(pair.lambda);
  if (!(std::sqrt(mod2) > 1e-12)) {
    throw SpectralError("mixing rate is undefined for a vanishing eigenvalue");
  }
  require_grid(pair.right.grid, kdot.grid, "mixing_rate_derivative");
  return kernel_inner_product(kdot.values, build_E_field(pair).values) / mod2;
}

ComplexDensity build_H_field(const EigenPair& pair, const MapSensitivity& sens) {
  require_grid(pair.right.grid, sens.grid, "build_H_field");
  const Eigen::VectorXcd g = sens.apply_G(Eigen::VectorXcd(pair.left.coeffs.conjugate()));
  return {sens.grid, -pair.right.coeffs.cwiseProduct(g)};
}

DensityVector build_Ehat_field(const EigenPair& pair,
                               const MapSensitivity& sens) {
  require_grid(pair.right.grid, sens.grid, "build_Ehat_field");
  const KernelGrid e = build_E_field(pair);
  Eigen::VectorXd ehat = -(sens.factor.cwiseProduct(e.values)).colwise().sum().transpose();
  return {sens.grid, std::move(ehat)};
}

void finalize_report(ResponseReport& report) {
  report.error_delta = (report.fd_delta - report.predicted).norm();
  report.error_half_delta = (report.fd_half_delta - report.predicted).norm();
  report.convergence_ratio = report.error_half_delta > 0.0
                                 ? report.error_delta / report.error_half_delta
                                 : std::numeric_limits<double>::infinity();
  report.passed = std::isfinite(report.convergence_ratio) &&
                  report.convergence_ratio >= kRatioLow &&
                  report.convergence_ratio <= kRatioHigh;
}

cd nearest_eigenvalue(const TransferMatrix& a, cd target) {
  const SpectralSet s = compute_spectrum(a);
  cd best = s.eigenvalues.front();
  for (const cd& v : s.eigenvalues) {
    if (std::abs(v - target) < std::abs(best - target)) best = v;
  }
  return best;
}

namespace {

Eigen::VectorXcd as_complex(const Eigen::VectorXd& v) { return v.cast<cd>(); }

Eigen::VectorXcd scalar(cd v) {
  Eigen::VectorXcd out(1);
  out[0] = v;
  return out;
}

}  // namespace

ResponseReport verify_density_response_kernel(const TransferMatrix& a,
                                              const KernelPerturbation& kdot,
                                              FiniteDifferenceSteps steps) {
  const DensityVector f0 = invariant_density(a);
  ResponseReport report;
  report.name = "density response (kernel)";
  report.delta = steps.delta;
  report.predicted = as_complex(density_response_kernel(a, f0, kdot).coeffs);
  auto fd = [&](double delta) {
    const DensityVector fd_density = invariant_density(perturbed_operator(a, kdot, delta));
    return as_complex((fd_density.coeffs - f0.coeffs) / delta);
  };
  report.fd_delta = fd(steps.delta);
  report.fd_half_delta = fd(steps.half_delta);
  finalize_report(report);
  return report;
}

ResponseReport verify_density_response_map(const Grid& grid,
                                           const MapModel& map,
                                           const NoiseModel& noise,
                                           const QuadratureSpec& quad,
                                           const MapPerturbation& tdot,
                                           FiniteDifferenceSteps steps) {
  const AssembledSystem base = assemble_with_sensitivity(grid, map, noise, quad);
  const DensityVector f0 = invariant_density(base.matrix);
  const ResolventSolver resolvent(base.matrix, f0);
  ResponseReport report;
  report.name = "density response (map)";
  report.delta = steps.delta;
  report.predicted =
      as_complex(density_response_map(resolvent, base.sensitivity, tdot).coeffs);
  auto fd = [&](double delta) {
    const DensityVector fd_density = invariant_density(
        perturbed_operator(grid, map, noise, quad, tdot, delta));
    return as_complex((fd_density.coeffs - f0.coeffs) / delta);
  };
  report.fd_delta = fd(steps.delta);
  report.fd_half_delta = fd(steps.half_delta);
  finalize_report(report);
  return report;
}

ResponseReport verify_eigenvalue_response_kernel(
    const TransferMatrix& a, const EigenPair& pair,
    const KernelPerturbation& kdot, FiniteDifferenceSteps steps) {
  ResponseReport report;
  report.name = "eigenvalue response (kernel)";
  report.delta = steps.delta;
  report.predicted = scalar(eigenvalue_response_kernel(pair, kdot));
  auto fd = [&](double delta) {
    const cd moved = nearest_eigenvalue(perturbed_operator(a, kdot, delta), pair.lambda);
    return scalar((moved - pair.lambda) / delta);
  };
  report.fd_delta = fd(steps.delta);
  report.fd_half_delta = fd(steps.half_delta);
  finalize_report(report);
  return report;
}

ResponseReport verify_eigenvalue_response_map(
    const Grid& grid, const MapModel& map, const NoiseModel& noise,
    const QuadratureSpec& quad, const EigenPair& pair,
    const MapSensitivity& sens, const MapPerturbation& tdot,
    FiniteDifferenceSteps steps) {
  require_grid(grid, tdot.grid, "verify_eigenvalue_response_map");
  ResponseReport report;
  report.name = "eigenvalue response (map)";
  report.delta = steps.delta;
  const ComplexDensity h = build_H_field(pair, sens);
  report.predicted =
      scalar(h.coeffs.cwiseProduct(as_complex(tdot.values)).sum() /
             static_cast<double>(grid.n()));
  auto fd = [&](double delta) {
    const cd moved = nearest_eigenvalue(
        perturbed_operator(grid, map, noise, quad, tdot, delta), pair.lambda);
    return scalar((moved - pair.lambda) / delta);
  };
  report.fd_delta = fd(steps.delta);
  report.fd_half_delta = fd(steps.half_delta);
  finalize_report(report);
  return report;
}

}  // namespace optresp
