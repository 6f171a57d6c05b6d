#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optresp/grid.hpp"
#include "optresp/spectral.hpp"
#include "optresp/transfer.hpp"

namespace optresp {

using KernelMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using CellMask = Eigen::Matrix<bool, Eigen::Dynamic, 1>;

/// Discrete kernel perturbation k̇(x_i, y_j). Members of V_ker have zero
/// column means (1/n) Σ_i k̇(i, j) = 0.
struct KernelPerturbation {
  Grid grid;
  Eigen::MatrixXd values;
  std::optional<KernelMask> support_mask;

  KernelPerturbation(Grid g, Eigen::MatrixXd v,
                     std::optional<KernelMask> mask = std::nullopt);

  double norm() const;
  /// max_j |(1/n) Σ_i values(i, j)|.
  double max_column_mean() const;
  /// L̇f(x) = ∫ k̇(x, y) f(y) dy, discretised as (1/n) Σ_j k̇(i, j) f_j.
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& f) const;
};

/// Discrete map perturbation Ṫ at the cell centres.
struct MapPerturbation {
  Grid grid;
  Eigen::VectorXd values;
  std::optional<CellMask> support_mask;

  MapPerturbation(Grid g, Eigen::VectorXd v,
                  std::optional<CellMask> mask = std::nullopt);

  double norm() const;
};

/// Column-mean tolerance of V_ker, relative to max(1, max |k̇|).
inline constexpr double kColumnMeanTolerance = 1e-9;

/// Throws PreconditionError if kdot is not in V_ker or violates its mask.
void require_zero_column_mean(const KernelPerturbation& kdot);

/// k̇(i, j) = -n · factor(i, j) · Ṫ_j, the kernel derivative induced by T₀ + δṪ.
KernelPerturbation kernel_from_map(const MapSensitivity& sens,
                                   const MapPerturbation& tdot);

/// R(k̇) = (Id - L₀)^{-1} ∫ k̇(x, y) f₀(y) dy.
DensityVector density_response_kernel(const ResolventSolver& resolvent,
                                      const KernelPerturbation& kdot);
DensityVector density_response_kernel(const TransferMatrix& a,
                                      const DensityVector& f0,
                                      const KernelPerturbation& kdot);

/// ⟨c, R(k̇)⟩ with c projected onto span{f₀}^⊥.
double expectation_derivative(const ResolventSolver& resolvent,
                              const KernelPerturbation& kdot,
                              const DensityVector& c);
double expectation_derivative(const TransferMatrix& a, const DensityVector& f0,
                              const KernelPerturbation& kdot,
                              const DensityVector& c);

/// The same number through the adjoint: ⟨(Id - L₀*)^{-1}c, ∫ k̇ f₀ dy⟩.
double expectation_derivative_adjoint(const ResolventSolver& resolvent,
                                      const KernelPerturbation& kdot,
                                      const DensityVector& c);

/// R̂(Ṫ) = -(Id - L₀)^{-1} ∫ (P_π τ_{-T₀(y)} dρ/dx)(x) Ṫ(y) f₀(y) dy.
DensityVector density_response_map(const ResolventSolver& resolvent,
                                   const MapSensitivity& sens,
                                   const MapPerturbation& tdot);

/// λ̇ = ⟨L̇e, ê⟩ = ∬ k̇(x, y) conj(ê(x)) e(y) dy dx.
std::complex<double> eigenvalue_response_kernel(const EigenPair& pair,
                                                const KernelPerturbation& kdot);

/// E(x, y) = Re(conj(λ₀) conj(ê(x)) e(y)); for real λ₀ this is λ₀ ê(x) e(y).
KernelGrid build_E_field(const EigenPair& pair);

/// d/dδ Re log λ_δ = ⟨k̇, E⟩ / |λ₀|². SpectralError if |λ₀| ≤ 1e-12.
double mixing_rate_derivative(const EigenPair& pair,
                              const KernelPerturbation& kdot);

/// H(y) = -e(y) (𝒢 conj ê)(y), so that λ̇ = ⟨H, Ṫ⟩ = (1/n) Σ H_j Ṫ_j.
ComplexDensity build_H_field(const EigenPair& pair, const MapSensitivity& sens);

/// Ê(y) = -∫ (P_π τ_{-T₀(y)} dρ/dx)(x) E(x, y) dx, so ⟨k̇(Ṫ), E⟩ = ⟨Ṫ, Ê⟩.
DensityVector build_Ehat_field(const EigenPair& pair,
                               const MapSensitivity& sens);

/// Finite-difference check of a predicted first-order response.
struct ResponseReport {
  std::string name;
  Eigen::VectorXcd predicted;
  Eigen::VectorXcd fd_delta;
  Eigen::VectorXcd fd_half_delta;
  double delta = 0.0;
  double error_delta = 0.0;
  double error_half_delta = 0.0;
  double convergence_ratio = 0.0;
  bool passed = false;
};

inline constexpr double kRatioLow = 1.3;
inline constexpr double kRatioHigh = 2.7;

struct FiniteDifferenceSteps {
  double delta = 1e-3;
  double half_delta = 5e-4;
};

/// Compares R(k̇) with (f_δ - f₀)/δ for P + δk̇/n at both steps.
ResponseReport verify_density_response_kernel(const TransferMatrix& a,
                                              const KernelPerturbation& kdot,
                                              FiniteDifferenceSteps steps = {});

/// Compares R̂(Ṫ) with (f_δ - f₀)/δ where P_δ is reassembled from T₀ + δṪ.
ResponseReport verify_density_response_map(const Grid& grid,
                                           const MapModel& map,
                                           const NoiseModel& noise,
                                           const QuadratureSpec& quad,
                                           const MapPerturbation& tdot,
                                           FiniteDifferenceSteps steps = {});

/// Compares λ̇ with (λ_δ - λ₀)/δ, tracking λ_δ by nearest distance to λ₀.
ResponseReport verify_eigenvalue_response_kernel(
    const TransferMatrix& a, const EigenPair& pair,
    const KernelPerturbation& kdot, FiniteDifferenceSteps steps = {1e-4, 5e-5});

/// Compares ⟨H, Ṫ⟩ with eigenvalue differences of reassembled matrices.
ResponseReport verify_eigenvalue_response_map(
    const Grid& grid, const MapModel& map, const NoiseModel& noise,
    const QuadratureSpec& quad, const EigenPair& pair,
    const MapSensitivity& sens, const MapPerturbation& tdot,
    FiniteDifferenceSteps steps = {});

/// Fills the ratio/pass fields of a report from its vectors.
void finalize_report(ResponseReport& report);

/// Eigenvalue of `a` closest to `target`.
std::complex<double> nearest_eigenvalue(const TransferMatrix& a,
                                        std::complex<double> target);

}  // namespace optresp
