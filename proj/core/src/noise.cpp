#include "optresp/noise.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "optresp/error.hpp"
#include "optresp/quadrature.hpp"

namespace optresp {

NoiseModel::NoiseModel(std::string name, double epsilon, Function density,
                       Function density_deriv,
                       std::optional<double> lipschitz_hint)
    : name_(std::move(name)),
      epsilon_(epsilon),
      density_(std::move(density)),
      deriv_(std::move(density_deriv)),
      lipschitz_(lipschitz_hint) {
  if (!(epsilon > 0.0) || epsilon > 1.0) {
    throw InvalidParameter("noise support radius must satisfy 0 < eps <= 1, got " +
                           std::to_string(epsilon));
  }
  if (!density_ || !deriv_) {
    throw InvalidInput("noise model needs both a density and its derivative");
  }
}

namespace {

double unnormalized_bump(double x, double eps) {
  const double gap = eps * eps - x * x;
  if (gap <= 0.0) return 0.0;
  return std::exp(-eps * eps / gap);
}

}  // namespace

double bump_normalization(double epsilon) {
  if (!(epsilon > 0.0)) {
    throw InvalidParameter("bump radius must be positive, got " +
                           std::to_string(epsilon));
  }
  // Even integrand: integrate one half.
  const auto half = integrate_adaptive(
      [epsilon](double x) { return unnormalized_bump(x, epsilon); }, 0.0,
      epsilon, 1e-13);
  return 1.0 / (2.0 * half.value);
}

NoiseModel bump_noise(double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1.0) {
    throw InvalidParameter("bump radius must satisfy 0 < eps <= 1, got " +
                           std::to_string(epsilon));
  }
  const double norm = bump_normalization(epsilon);
  const double eps2 = epsilon * epsilon;
  auto density = [norm, eps2](double x) {
    const double gap = eps2 - x * x;
    if (gap <= 0.0) return 0.0;
    return norm * std::exp(-eps2 / gap);
  };
  // Analytic derivative ρ(x)·(-2ε²x)/(ε²-x²)²; underflows cleanly to 0 at the edge.
  auto deriv = [norm, eps2](double x) {
    const double gap = eps2 - x * x;
    if (gap <= 0.0) return 0.0;
    const double rho = norm * std::exp(-eps2 / gap);
    if (rho == 0.0) return 0.0;
    return rho * (-2.0 * eps2 * x) / (gap * gap);
  };
  return NoiseModel("bump", epsilon, density, deriv);
}

}  // namespace optresp
