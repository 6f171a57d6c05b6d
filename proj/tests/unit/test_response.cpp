#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "optresp/certify.hpp"
#include "optresp/error.hpp"
#include "optresp/optimal.hpp"
#include "optresp/response.hpp"
#include "support.hpp"

using namespace optresp;
using cd = std::complex<double>;

namespace {

struct Toy {
  TransferMatrix matrix;
  MapSensitivity sens;
};

Toy random_toy(int n, std::mt19937_64& rng) {
  TransferMatrix a(Grid(static_cast<std::size_t>(n)), testsupport::random_stochastic(n, rng));
  MapSensitivity s(a.grid, testsupport::center_columns(testsupport::random_normal(n, n, rng)));
  return {a, s};
}

FiniteDifferenceSteps admissible(const TransferMatrix& a, const KernelPerturbation& k, double wanted) {
  const double d = std::min(wanted, 0.5 * max_admissible_delta(a, k));
  return {d, d / 2};
}

}  // namespace

TEST_CASE("primal and adjoint expectation derivatives agree") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Toy toy = random_toy(10, rng);
    const DensityVector f0 = invariant_density(toy.matrix);
    const ResolventSolver res(toy.matrix, f0);
    const KernelPerturbation k(toy.matrix.grid, testsupport::center_columns(testsupport::random_normal(10, 10, rng)));
    const DensityVector c(toy.matrix.grid, testsupport::random_normal(10, 1, rng));
    const double primal = expectation_derivative(res, k, c);
    CHECK(primal == doctest::Approx(expectation_derivative_adjoint(res, k, c)).epsilon(1e-10));
    CHECK(primal == doctest::Approx(expectation_derivative(toy.matrix, f0, k, c)).epsilon(1e-12));
    // Density responses have zero mass.
    CHECK(std::abs(density_response_kernel(res, k).integral()) < 1e-12);
  }
}

TEST_CASE("kernel perturbations outside the zero-column-mean space are rejected") {
  const Grid g(4);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(4, 4);
  v(0, 1) = 1.0;
  CHECK_THROWS_AS(require_zero_column_mean(KernelPerturbation(g, v)), PreconditionError);
  v(1, 1) = -1.0;
  CHECK_NOTHROW(require_zero_column_mean(KernelPerturbation(g, v)));
  KernelMask mask = KernelMask::Constant(4, 4, true);
  mask(0, 1) = false;
  CHECK_THROWS_AS(require_zero_column_mean(KernelPerturbation(g, v, mask)), PreconditionError);
  CHECK(KernelPerturbation(g, v).max_column_mean() == 0.0);
  CHECK(KernelPerturbation(g, v).norm() == doctest::Approx(std::sqrt(2.0) / 4.0));
}

TEST_CASE("map-induced kernels have zero column means") {
  const AssembledSystem sys = assemble_with_sensitivity(Grid(60), pomeau_manneville(), bump_noise(0.1));
  std::mt19937_64 rng(2);
  const MapPerturbation t(sys.matrix.grid, testsupport::random_normal(60, 1, rng));
  const KernelPerturbation k = kernel_from_map(sys.sensitivity, t);
  CHECK(k.max_column_mean() < 1e-10 * k.values.cwiseAbs().maxCoeff());
  CHECK((k.values + 60.0 * sys.sensitivity.factor * t.values.asDiagonal()).norm() == 0.0);
}

TEST_CASE("E-field for a real eigenvalue is lambda times the outer product") {
  std::mt19937_64 rng(4);
  const Toy toy = random_toy(7, rng);
  const EigenPair p = subdominant_eigenpair(toy.matrix, EigenSelector::LargestModulusReal);
  REQUIRE(p.is_real());
  const KernelGrid e = build_E_field(p);
  const Eigen::MatrixXd outer =
      p.lambda.real() * p.left.coeffs.real() * p.right.coeffs.real().transpose();
  CHECK((e.values - outer).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two-path identities on a random system") {
  std::mt19937_64 rng(8);
  const Toy toy = random_toy(9, rng);
  const DensityVector f0 = invariant_density(toy.matrix);
  const ResolventSolver res(toy.matrix, f0);
  const EigenPair p = subdominant_eigenpair(toy.matrix, EigenSelector::LargestModulus);
  const MapPerturbation t(toy.matrix.grid, testsupport::random_normal(9, 1, rng));
  const KernelPerturbation k = kernel_from_map(toy.sens, t);

  const ComplexDensity h = build_H_field(p, toy.sens);
  const cd via_h = (h.coeffs.array() * t.values.array().cast<cd>()).sum() / 9.0;
  CHECK(std::abs(via_h - eigenvalue_response_kernel(p, k)) < 1e-10);

  const DensityVector ehat = build_Ehat_field(p, toy.sens);
  const double via_ehat = discrete_inner_product(ehat, DensityVector(toy.matrix.grid, t.values));
  CHECK(via_ehat == doctest::Approx(kernel_inner_product(k.values, build_E_field(p).values)).epsilon(1e-10));
  CHECK(via_ehat / std::norm(p.lambda) == doctest::Approx(mixing_rate_derivative(p, k)).epsilon(1e-10));
  // Re log derivative through λ̇.
  CHECK((eigenvalue_response_kernel(p, k) / p.lambda).real() ==
        doctest::Approx(mixing_rate_derivative(p, k)).epsilon(1e-10));

  CHECK((density_response_map(res, toy.sens, t).coeffs - density_response_kernel(res, k).coeffs).norm() < 1e-10);
}

TEST_CASE("finalize_report classifies convergence ratios") {
  auto report_with = [](double e1, double e2) {
    ResponseReport r;
    r.predicted = Eigen::VectorXcd::Zero(1);
    r.fd_delta = Eigen::VectorXcd::Constant(1, cd(e1, 0));
    r.fd_half_delta = Eigen::VectorXcd::Constant(1, cd(e2, 0));
    finalize_report(r);
    return r;
  };
  CHECK(report_with(2.0, 1.0).passed);
  CHECK(report_with(2.0, 1.0).convergence_ratio == doctest::Approx(2.0));
  CHECK_FALSE(report_with(4.0, 1.0).passed);
  CHECK_FALSE(report_with(1.0, 1.0).passed);
  CHECK(report_with(1.3, 1.0).passed);
  CHECK(report_with(2.7, 1.0).passed);
}

TEST_CASE("finite-difference checks on the Pomeau-Manneville system") {
  const Grid g(100);
  const MapModel t0 = pomeau_manneville();
  const NoiseModel rho = bump_noise(0.1);
  const AssembledSystem sys = assemble_with_sensitivity(g, t0, rho);
  const EigenPair p = subdominant_eigenpair(sys.matrix, EigenSelector::LargestModulusReal);
  std::mt19937_64 rng(21);
  const KernelPerturbation k = sample_kernel_feasible(KernelFeasibility::from_matrix(sys.matrix), rng);
  const MapPerturbation t = sample_map_feasible(MapFeasibility::full(g), rng);

  const ResponseReport r1 = verify_density_response_kernel(sys.matrix, k, admissible(sys.matrix, k, 1e-3));
  CHECK(r1.passed);
  CHECK(r1.convergence_ratio == doctest::Approx(2.0).epsilon(0.1));
  const ResponseReport r2 = verify_eigenvalue_response_kernel(sys.matrix, p, k, admissible(sys.matrix, k, 1e-4));
  CHECK(r2.passed);
  const ResponseReport r3 = verify_density_response_map(g, t0, rho, {}, t);
  CHECK(r3.passed);
  const ResponseReport r4 = verify_eigenvalue_response_map(g, t0, rho, {}, p, sys.sensitivity, t);
  CHECK(r4.passed);
}

TEST_CASE("complex eigenvalue response on the interval exchange") {
  const AssembledSystem sys = assemble_with_sensitivity(Grid(100), interval_exchange(), bump_noise(0.1));
  const EigenPair p = subdominant_eigenpair(sys.matrix, EigenSelector::LargestModulus);
  REQUIRE_FALSE(p.is_real());
  std::mt19937_64 rng(22);
  const KernelPerturbation k = sample_kernel_feasible(KernelFeasibility::from_matrix(sys.matrix), rng);
  const ResponseReport r = verify_eigenvalue_response_kernel(sys.matrix, p, k, admissible(sys.matrix, k, 1e-4));
  CHECK(r.passed);
  CHECK(std::abs(r.predicted[0].imag()) > 0.0);
}

TEST_CASE("nearest_eigenvalue tracks a target") {
  Eigen::Matrix2d m;
  m << 0.8, 0.3, 0.2, 0.7;
  const TransferMatrix a(Grid(2), m);
  CHECK(nearest_eigenvalue(a, cd(0.4, 0.1)).real() == doctest::Approx(0.5));
  CHECK(nearest_eigenvalue(a, cd(0.9, 0.0)).real() == doctest::Approx(1.0));
}
