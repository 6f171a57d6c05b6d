#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "optresp/grid.hpp"
#include "optresp/transfer.hpp"

namespace optresp {

/// An eigenvalue λ of P with right eigenvector e (P e = λ e) and adjoint
/// eigenvector ê (Pᵀ ê = conj(λ) ê), scaled so that ‖e‖ = 1, the
/// largest-modulus entry of e is real positive, and ⟨e, ê⟩ = 1 in the
/// discrete complex inner product (1/n) Σ e·conj(ê).
///
/// With this convention λ̇ = ⟨L̇e, ê⟩ for any kernel perturbation.
struct EigenPair {
  std::complex<double> lambda;
  ComplexDensity right;
  ComplexDensity left;
  bool geometrically_simple = false;

  bool is_real(double tol = 1e-12) const;
  /// The same eigenvalue's conjugate partner (λ̄, ē, conj ê).
  EigenPair conjugate() const;
};

/// Eigenvalues sorted by |λ| descending, then Re λ descending, then Im λ
/// ascending.
struct SpectralSet {
  std::vector<std::complex<double>> eigenvalues;
};

enum class EigenSelector { LargestModulus, LargestModulusReal };

SpectralSet compute_spectrum(const TransferMatrix& a);

/// Strict weak ordering used by SpectralSet.
bool spectral_order(std::complex<double> a, std::complex<double> b);

/// Normalised fixed point: P f₀ = f₀, (1/n) Σ f₀ = 1, f₀ ≥ 0 after clamping
/// entries above -1e-10. SpectralError if the residual exceeds 1e-10.
DensityVector invariant_density(const TransferMatrix& a);

/// Eigenvalue separation below which λ counts as not simple.
inline constexpr double kSimplicityThreshold = 1e-8;

/// Selected eigenpair strictly inside the unit circle. DegenerateEigenvalue if
/// the selected eigenvalue is not isolated; EigenvalueNotFound if no real
/// eigenvalue of modulus > 0.1 exists for LargestModulusReal.
EigenPair subdominant_eigenpair(const TransferMatrix& a,
                                EigenSelector selector =
                                    EigenSelector::LargestModulus);

/// Cached bordered factorizations of Id - P and Id - Pᵀ restricted to the
/// complements of their one-dimensional kernels.
class ResolventSolver {
 public:
  ResolventSolver(const TransferMatrix& a, const DensityVector& f0);

  /// w ∈ V with (Id - P) w = v. PreconditionError unless |mean(v)| ≤ 1e-8.
  DensityVector solve(const DensityVector& v) const;

  /// y with (Id - Pᵀ) y = c and ⟨y, f₀⟩ = 0. c is first projected onto
  /// span{f₀}^⊥ via c - ⟨c, f₀⟩𝟙.
  DensityVector solve_adjoint(const DensityVector& c) const;

  const DensityVector& f0() const noexcept { return f0_; }

 private:
  DensityVector f0_;
  Eigen::PartialPivLU<Eigen::MatrixXd> forward_;
  Eigen::PartialPivLU<Eigen::MatrixXd> adjoint_;
};

DensityVector resolvent_solve(const TransferMatrix& a, const DensityVector& v);
DensityVector resolvent_solve_adjoint(const TransferMatrix& a,
                                      const DensityVector& c,
                                      const DensityVector& f0);

/// c - ⟨c, f₀⟩𝟙, which is orthogonal to f₀ when ∫f₀ = 1.
DensityVector project_out_f0(const DensityVector& c, const DensityVector& f0);

struct MixingReport {
  std::size_t trials = 0;
  std::size_t horizon = 0;
  /// max over trials of ‖P^N g‖ / ‖g‖.
  double max_relative_norm = 0.0;
  /// Largest fitted per-step contraction factor.
  double fitted_rate = 0.0;
  /// |λ₂| from a dense eigensolve.
  double subdominant_modulus = 0.0;
  bool passed = false;
};

/// Iterates random zero-mean vectors and fits their decay rate. Passes when
/// the final relative norm is below 1e-3 and the fitted rate is within 10% of
/// |λ₂|.
MixingReport mixing_check(const TransferMatrix& a, std::size_t trials = 8,
                          std::size_t horizon = 200, std::uint64_t seed = 0);

}  // namespace optresp
