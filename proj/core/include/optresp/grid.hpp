#pragma once

#include <complex>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace optresp {

/// Equipartition of [0,1] into n cells I_i = [i/n, (i+1)/n).
class Grid {
 public:
  explicit Grid(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  double cell_width() const noexcept { return 1.0 / static_cast<double>(n_); }
  double center(std::size_t i) const noexcept {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(n_);
  }
  double left(std::size_t i) const noexcept {
    return static_cast<double>(i) / static_cast<double>(n_);
  }
  double right(std::size_t i) const noexcept {
    return static_cast<double>(i + 1) / static_cast<double>(n_);
  }
  Eigen::VectorXd centers() const;

  /// Index of the cell containing x, with x = 1 mapped to the last cell.
  std::size_t cell_of(double x) const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t n_;
};

Grid build_grid(std::size_t n);

/// Piecewise-constant function on a grid; coefficients are the local values.
struct DensityVector {
  Grid grid;
  Eigen::VectorXd coeffs;

  DensityVector(Grid g, Eigen::VectorXd c);
  static DensityVector constant(const Grid& g, double value);

  /// (1/n) Σ coeffs.
  double integral() const;
  /// Discrete L² norm sqrt((1/n) Σ coeffs²).
  double norm() const;
};

struct ComplexDensity {
  Grid grid;
  Eigen::VectorXcd coeffs;

  ComplexDensity(Grid g, Eigen::VectorXcd c);
  std::complex<double> integral() const;
  double norm() const;
};

/// Samples of a kernel g(x, y) on the cells: values(i, j) ↔ (x_i, y_j).
/// Rows are landing points x, columns are source points y.
struct KernelGrid {
  Grid grid;
  Eigen::MatrixXd values;

  KernelGrid(Grid g, Eigen::MatrixXd v);
};

/// (1/n) Σ f_i g_i. Throws InvalidInput on grid mismatch.
double discrete_inner_product(const DensityVector& f, const DensityVector& g);

/// (1/n) Σ f_i conj(g_i).
std::complex<double> discrete_inner_product(const ComplexDensity& f,
                                            const ComplexDensity& g);

/// sqrt((1/n²) ΣΣ k²).
double discrete_kernel_norm(const KernelGrid& k);

/// (1/n²) ΣΣ a·b over [0,1]².
double kernel_inner_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Ulam projection: coeffs_i = n ∫_{I_i} c(x) dx by adaptive quadrature.
/// Non-finite samples raise InvalidInput.
DensityVector project_observable(const Grid& grid,
                                 const std::function<double(double)>& c);

}  // namespace optresp
