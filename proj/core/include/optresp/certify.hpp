#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "optresp/optimal.hpp"
#include "optresp/response.hpp"

namespace optresp {

enum class Sense { Maximize, Minimize };

/// Standard-normal field, zeroed off F_l, column means over F_l^y removed,
/// scaled to unit norm: uniform on the unit sphere of the feasible subspace.
KernelPerturbation sample_kernel_feasible(const KernelFeasibility& feas,
                                         std::mt19937_64& rng);
MapPerturbation sample_map_feasible(const MapFeasibility& feas,
                                    std::mt19937_64& rng);

/// Orthonormal basis (discrete L² on [0,1]²) of the feasible subspace
/// {supp ⊆ F_l, zero column means}.
std::vector<Eigen::MatrixXd> kernel_feasible_basis(
    const KernelFeasibility& feas);
/// Orthonormal basis of {supp ⊆ F̃_ℓ}.
std::vector<Eigen::VectorXd> map_feasible_basis(const MapFeasibility& feas);

using KernelObjective = std::function<double(const KernelPerturbation&)>;
using MapObjective = std::function<double(const MapPerturbation&)>;

struct OptimalityCertificate {
  double objective = 0.0;
  double best_random = 0.0;
  /// Fraction of random candidates the optimum is at least as good as.
  double fraction_beaten = 0.0;
  bool beats_all_strictly = false;
  /// Cosine between the returned perturbation and the projected gradient
  /// assembled from objective evaluations on the feasible basis.
  double kkt_cosine = 0.0;
  double norm_error = 0.0;
  double feasibility_error = 0.0;
  std::size_t samples = 0;

  bool passed(double kkt_tol = 1e-8) const {
    return beats_all_strictly && kkt_cosine >= 1.0 - kkt_tol &&
           norm_error <= 1e-12 && feasibility_error <= 1e-9;
  }
};

OptimalityCertificate certify_kernel_optimum(const KernelObjective& objective,
                                             const KernelPerturbation& optimum,
                                             const KernelFeasibility& feas,
                                             Sense sense, std::size_t samples,
                                             std::uint64_t seed);

OptimalityCertificate certify_map_optimum(const MapObjective& objective,
                                          const MapPerturbation& optimum,
                                          const MapFeasibility& feas,
                                          Sense sense, std::size_t samples,
                                          std::uint64_t seed);

}  // namespace optresp
