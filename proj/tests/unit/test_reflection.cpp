#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "optresp/error.hpp"
#include "optresp/noise.hpp"
#include "optresp/quadrature.hpp"
#include "optresp/reflection.hpp"
#include "support.hpp"

using namespace optresp;

namespace {

std::vector<double> uniform_points(int count) {
  std::vector<double> x;
  for (int k = 0; k <= count; ++k) x.push_back(static_cast<double>(k) / count);
  return x;
}

}  // namespace

TEST_CASE("fold point") {
  CHECK(fold_point(0.3) == doctest::Approx(0.3));
  CHECK(fold_point(-0.3) == doctest::Approx(0.3));
  CHECK(fold_point(1.2) == doctest::Approx(0.8));
  CHECK(fold_point(2.25) == doctest::Approx(0.25));
  CHECK(fold_point(-1.75) == doctest::Approx(0.25));
}

TEST_CASE("interior support is left alone") {
  CompactFunction f{[](double z) { return z * z; }, {{0.2, 0.4}}};
  const auto pts = uniform_points(50);
  const ReflectedDensity r = reflect_fold(f, pts, "z^2 on [0.2,0.4]");
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double expect = (pts[k] >= 0.2 && pts[k] <= 0.4) ? pts[k] * pts[k] : 0.0;
    CHECK(r.values[k] == doctest::Approx(expect));
  }
  CHECK(r.provenance == "z^2 on [0.2,0.4]");
}

TEST_CASE("noise centred on the boundary doubles by reflection") {
  const NoiseModel rho = bump_noise(0.1);
  const MapModel zero = testsupport::constant_map(0.0);
  for (double x : {0.0, 0.02, 0.05, 0.09}) {
    CHECK(kernel_value(zero, rho, x, 0.3) == doctest::Approx(2.0 * rho.density(x)).epsilon(1e-14));
  }
  CHECK(kernel_value(zero, rho, 0.2, 0.3) == 0.0);
}

TEST_CASE("Monte-Carlo histogram of folded noise matches the kernel") {
  // Oracle: sample π(t + ω), ω ~ ρ by rejection, and histogram.
  const double eps = 0.1;
  const NoiseModel rho = bump_noise(eps);
  const double peak = rho.density(0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> v(0.0, 1.0);
  for (double t : {0.0, 0.04, 0.97}) {
    const int bins = 20;
    std::vector<double> hist(bins, 0.0);
    const int samples = 400000;
    int accepted = 0;
    while (accepted < samples) {
      const double w = eps * u(rng);
      if (v(rng) * peak > rho.density(w)) continue;
      const double x = fold_point(t + w);
      hist[std::min(bins - 1, static_cast<int>(x * bins))] += 1.0;
      ++accepted;
    }
    const MapModel m = testsupport::constant_map(t);
    const GaussLegendre gl(8);
    for (int b = 0; b < bins; ++b) {
      const double a = static_cast<double>(b) / bins;
      double exact = 0.0;
      for (int s = 0; s < 16; ++s) {
        const double lo = a + s / (16.0 * bins);
        exact += gl.integrate([&](double x) { return kernel_value(m, rho, x, 0.5); }, lo, lo + 1.0 / (16.0 * bins));
      }
      CHECK(std::abs(hist[b] / samples - exact) < 4e-3);
    }
  }
}

TEST_CASE("kernel is stochastic in x for every source point") {
  const NoiseModel rho = bump_noise(0.1);
  const MapModel t = pomeau_manneville();
  for (double y : {0.0, 0.01, 0.2, 0.45, 0.5, 0.52, 0.95, 1.0}) {
    const double mass = testsupport::simpson([&](double x) { return kernel_value(t, rho, x, y); }, 0.0, 1.0, 40000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("kernel is symmetric about an interior image point") {
  const NoiseModel rho = bump_noise(0.1);
  const MapModel m = testsupport::constant_map(0.5);
  CHECK(kernel_value(m, rho, 0.5, 0.1) == doctest::Approx(rho.density(0.0)));
  for (double d : {0.01, 0.03, 0.07}) {
    CHECK(kernel_value(m, rho, 0.5 + d, 0.1) == doctest::Approx(kernel_value(m, rho, 0.5 - d, 0.1)));
  }
}

TEST_CASE("derivative factor matches shifts of the kernel") {
  const NoiseModel rho = bump_noise(0.1);
  const MapModel t = pomeau_manneville();
  const double h = 1e-5;
  for (double y : {0.1, 0.3, 0.6, 0.9}) {
    const double ty = t(y);
    const MapModel up = testsupport::constant_map(ty + h);
    const MapModel down = testsupport::constant_map(ty - h);
    for (int k = 1; k < 40; ++k) {
      const double x = k / 40.0;
      if (std::abs(std::abs(x - ty) - 0.1) < 5e-3 || std::abs(x + ty - 0.1) < 5e-3 ||
          std::abs(2.0 - x - ty - 0.1) < 5e-3) {
        continue;  // support edges
      }
      const double fd = -(kernel_value(up, rho, x, y) - kernel_value(down, rho, x, y)) / (2 * h);
      const double factor = kernel_map_derivative_factor(t, rho, x, y);
      CHECK(std::abs(factor - fd) <= 1e-4 * std::abs(factor) + 1e-6);
    }
  }
}

TEST_CASE("derivative factor integrates to zero in x") {
  const NoiseModel rho = bump_noise(0.1);
  const MapModel m = testsupport::constant_map(0.4);
  const double s = testsupport::simpson([&](double x) { return kernel_map_derivative_factor(m, rho, x, 0.0); }, 0.0, 1.0);
  CHECK(std::abs(s) < 1e-9);
  CHECK(kernel_map_derivative_factor(m, rho, 0.45, 0.0) == doctest::Approx(rho.density_deriv(0.05)));
}

TEST_CASE("fold norm bound for a single interval of length two") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double lo = -1.0 + 2.0 * (u(rng) + 1.0) / 2.0;
    const double c[3] = {u(rng), u(rng), u(rng)};
    CompactFunction f{[c, lo](double z) { return c[0] + c[1] * (z - lo) + c[2] * std::sin(7 * z); }, {{lo, lo + 2.0}}};
    const auto pts = uniform_points(4000);
    const ReflectedDensity r = reflect_fold(f, pts);
    double folded = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      folded += 0.5 * (r.values[k] * r.values[k] + r.values[k + 1] * r.values[k + 1]) / 4000.0;
    }
    const double norm = testsupport::simpson([&](double z) { return f.f(z) * f.f(z); }, lo, lo + 2.0);
    CHECK(std::sqrt(folded) <= 3.0 * std::sqrt(norm));
  }
}

TEST_CASE("fold rejects undeclared, unbounded or far supports") {
  const std::vector<double> pts = {0.5};
  CHECK_THROWS_AS(reflect_fold(CompactFunction{[](double) { return 1.0; }, {}}, pts), InvalidInput);
  CHECK_THROWS_AS(reflect_fold(CompactFunction{[](double) { return 1.0; }, {{0.0, INFINITY}}}, pts), InvalidInput);
  CHECK_THROWS_AS(reflect_fold(CompactFunction{[](double) { return 1.0; }, {{8.0, 9.0}}}, pts), InvalidInput);
  CHECK_THROWS_AS(reflect_fold(CompactFunction{nullptr, {{0.0, 1.0}}}, pts), InvalidInput);
  const std::vector<double> outside = {1.5};
  CHECK_THROWS_AS(reflect_fold(CompactFunction{[](double) { return 1.0; }, {{0.0, 1.0}}}, outside), InvalidInput);
}

TEST_CASE("shift range covers every contributing term") {
  const ShiftRange r = fold_shift_range(-0.1, 0.1);
  CHECK(r.first == 0);
  CHECK(r.last == 0);
  const ShiftRange w = fold_shift_range(-2.0, 3.0);
  CHECK(w.first == -2);
  CHECK(w.last == 4);
}
