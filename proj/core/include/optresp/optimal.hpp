#pragma once

#include <vector>

#include <Eigen/Dense>

#include "optresp/grid.hpp"
#include "optresp/map.hpp"
#include "optresp/noise.hpp"
#include "optresp/response.hpp"
#include "optresp/spectral.hpp"
#include "optresp/transfer.hpp"

namespace optresp {

/// F_l = {(x, y) : k₀(x, y) ≥ l} on the grid, with column measures
/// m(F_l^y) = count / n and active columns Ξ(F_l) = {y : m(F_l^y) > 0}.
struct KernelFeasibility {
  Grid grid;
  double l = 0.0;
  KernelMask mask;
  Eigen::VectorXd column_measure;
  std::vector<std::size_t> active_columns;

  /// Cells of the kernel grid n·P with value ≥ l. InvalidParameter if l ≤ 0.
  static KernelFeasibility from_matrix(const TransferMatrix& a, double l);
  /// l = 1e-3 · max k₀.
  static KernelFeasibility from_matrix(const TransferMatrix& a);
  static KernelFeasibility full(const Grid& grid);

  bool empty() const noexcept { return active_columns.empty(); }
};

/// F̃_ℓ = {x : ℓ ≤ T₀(x) ≤ 1 - ℓ}, sampled at cell centres.
struct MapFeasibility {
  Grid grid;
  double ell = 0.0;
  CellMask mask;

  static MapFeasibility from_map(const Grid& grid, const MapModel& map,
                                 double ell = 0.0);
  static MapFeasibility full(const Grid& grid);

  bool empty() const noexcept { return !mask.any(); }
};

/// Removes per-column means over F_l^y and zeroes everything off F_l.
Eigen::MatrixXd project_kernel_feasible(const Eigen::MatrixXd& field,
                                        const KernelFeasibility& feas);

/// Maximiser of ⟨c, R(k̇)⟩ over unit-norm k̇ ∈ V_ker supported in F_l:
/// k̇ ∝ f₀(y) [y(x) - mean_{F_l^y} y] on F_l with y = (Id - L₀*)^{-1} c.
KernelPerturbation optimal_kernel_for_expectation(
    const ResolventSolver& resolvent, const DensityVector& c,
    const KernelFeasibility& feas);
KernelPerturbation optimal_kernel_for_expectation(
    const TransferMatrix& a, const DensityVector& f0, const DensityVector& c,
    const KernelFeasibility& feas);

/// Minimiser of ⟨k̇, E⟩ (fastest decrease of Re log λ₀):
/// k̇ ∝ mean_{F_l^y} E - E(x, y) on F_l.
KernelPerturbation optimal_kernel_for_mixing(const EigenPair& pair,
                                             const KernelFeasibility& feas);

/// Maximiser of ⟨c, R̂(Ṫ)⟩ over unit-norm Ṫ supported in F̃_ℓ:
/// Ṫ ∝ -f₀ · 𝒢((Id - L₀*)^{-1} c).
MapPerturbation optimal_map_for_expectation(const ResolventSolver& resolvent,
                                            const DensityVector& c,
                                            const MapSensitivity& sens,
                                            const MapFeasibility& feas);

/// Minimiser of ⟨Ṫ, Ê⟩: Ṫ = -Ê / ‖Ê‖ on F̃_ℓ.
MapPerturbation optimal_map_for_mixing(const EigenPair& pair,
                                       const MapSensitivity& sens,
                                       const MapFeasibility& feas);

/// Largest δ with P + δ·k̇/n ≥ 0 entrywise (infinity if k̇ never pushes an
/// entry down).
double max_admissible_delta(const TransferMatrix& a,
                            const KernelPerturbation& kdot);

/// Kernel path: k_δ = k₀ + δk̇. StepTooLarge if some entry turns negative;
/// columns are renormalised only to absorb round-off (factor within 1e-10).
TransferMatrix perturbed_operator(const TransferMatrix& a,
                                  const KernelPerturbation& kdot, double delta);

/// Map path: reassembles the matrix for T₀ + δṪ.
TransferMatrix perturbed_operator(const Grid& grid, const MapModel& map,
                                  const NoiseModel& noise,
                                  const QuadratureSpec& quad,
                                  const MapPerturbation& tdot, double delta);

}  // namespace optresp
