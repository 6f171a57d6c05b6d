#pragma once

#include <string>

#include <Eigen/Dense>

#include "optresp/grid.hpp"
#include "optresp/map.hpp"
#include "optresp/noise.hpp"

namespace optresp {

struct QuadratureSpec {
  /// Gauss–Legendre points per piece and direction.
  int order = 8;
  /// Pieces are at most `piece_fraction · ε` wide in x and y.
  double piece_fraction = 0.125;
};

/// Numbers recorded while assembling a matrix.
struct AssemblyInfo {
  /// max_j |raw column sum - 1| before renormalisation.
  double max_column_deviation = 0.0;
  /// Largest mass clamped away from a column (negative entries).
  double max_clamped_mass = 0.0;
  Eigen::VectorXd raw_column_sums;
};

/// Column-stochastic Ulam matrix P of the transfer operator:
/// P(i, j) = n ∬_{I_i × I_j} k(x, y) dy dx, so Σ_i P(i, j) = 1 and the action on
/// a DensityVector is the plain product P·f. The kernel-valued grid
/// (used by KernelGrid and perturbations) is n·P.
///
/// With equal cell measures the adjoint in the discrete inner product is Pᵀ.
struct TransferMatrix {
  Grid grid;
  Eigen::MatrixXd entries;
  std::string map_name;
  std::string noise_name;
  double epsilon = 0.0;
  int quad_order = 0;
  AssemblyInfo info;

  TransferMatrix(Grid g, Eigen::MatrixXd p);

  std::size_t n() const noexcept { return grid.n(); }
  DensityVector apply(const DensityVector& f) const;
  DensityVector apply_adjoint(const DensityVector& f) const;
  /// n·P, the cell-averaged kernel.
  KernelGrid kernel() const;
};

/// Raw column sums must lie within this distance of 1.
inline constexpr double kColumnSumTolerance = 1e-6;

/// Assembles the Ulam matrix by composite Gauss–Legendre quadrature with
/// subdivision at map breakpoints and at the folded noise-support edges.
/// Columns are renormalised to sum to 1; AssemblyError names the offending
/// cell/column if entries are not finite or a raw column sum is off by more
/// than kColumnSumTolerance.
TransferMatrix assemble_transfer_matrix(const Grid& grid, const MapModel& map,
                                        const NoiseModel& noise,
                                        const QuadratureSpec& quad = {});

/// Discretised map-derivative factor:
/// dP/dδ = -factor · diag(Ṫ) for T₀ + δṪ with Ṫ piecewise constant, i.e. the
/// exact derivative of the renormalised Ulam matrix. factorᵀ·f is the discrete
/// 𝒢 operator (𝒢f)(y) = ∫ (P_π τ_{-T₀(y)} dρ/dx)(x) f(x) dx.
struct MapSensitivity {
  Grid grid;
  Eigen::MatrixXd factor;

  MapSensitivity(Grid g, Eigen::MatrixXd f);

  /// Discrete 𝒢 applied to a (possibly complex) vector.
  Eigen::VectorXd apply_G(const Eigen::VectorXd& f) const;
  Eigen::VectorXcd apply_G(const Eigen::VectorXcd& f) const;
};

struct AssembledSystem {
  TransferMatrix matrix;
  MapSensitivity sensitivity;
};

/// Assembles P and the map sensitivity in one pass.
AssembledSystem assemble_with_sensitivity(const Grid& grid, const MapModel& map,
                                          const NoiseModel& noise,
                                          const QuadratureSpec& quad = {});

}  // namespace optresp
