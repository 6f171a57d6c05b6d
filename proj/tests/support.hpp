#pragma once

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "optresp/optresp.hpp"

namespace testsupport {

/// Composite Simpson rule, independent of the library's quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int panels = 20000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Random column-stochastic matrix with strictly positive entries.
inline Eigen::MatrixXd random_stochastic(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd p(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) p(i, j) = u(rng);
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

inline Eigen::MatrixXd random_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = g(rng);
  }
  return m;
}

/// Zero-column-sum copy of m.
inline Eigen::MatrixXd center_columns(Eigen::MatrixXd m) {
  for (int j = 0; j < m.cols(); ++j) m.col(j).array() -= m.col(j).mean();
  return m;
}

/// Map with a constant value.
inline optresp::MapModel constant_map(double c) {
  return optresp::MapModel("constant", "T(x) = c", [c](double) { return c; });
}

}  // namespace testsupport
