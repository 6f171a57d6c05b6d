#include "optresp/grid.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "optresp/error.hpp"
#include "optresp/quadrature.hpp"

namespace optresp {

Grid::Grid(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidParameter("grid needs at least one cell");
}

Eigen::VectorXd Grid::centers() const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) c[static_cast<Eigen::Index>(i)] = center(i);
  return c;
}

std::size_t Grid::cell_of(double x) const noexcept {
  if (!(x > 0.0)) return 0;
  const auto i = static_cast<std::size_t>(x * static_cast<double>(n_));
  return i >= n_ ? n_ - 1 : i;
}

Grid build_grid(std::size_t n) { return Grid(n); }

namespace {

void require_size(const Grid& g, Eigen::Index size, const char* what) {
  if (size != static_cast<Eigen::Index>(g.n())) {
    throw InvalidInput(std::string(what) + " has " + std::to_string(size) +
                       " coefficients for a grid of " + std::to_string(g.n()));
  }
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) {
    throw InvalidInput("grid mismatch: n=" + std::to_string(a.n()) + " vs n=" +
                       std::to_string(b.n()));
  }
}

}  // namespace

DensityVector::DensityVector(Grid g, Eigen::VectorXd c)
    : grid(g), coeffs(std::move(c)) {
  require_size(grid, coeffs.size(), "density vector");
}

DensityVector DensityVector::constant(const Grid& g, double value) {
  return {g, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.n()), value)};
}

double DensityVector::integral() const { return coeffs.mean(); }

double DensityVector::norm() const {
  return std::sqrt(coeffs.squaredNorm() / static_cast<double>(grid.n()));
}

ComplexDensity::ComplexDensity(Grid g, Eigen::VectorXcd c)
    : grid(g), coeffs(std::move(c)) {
  require_size(grid, coeffs.size(), "complex density");
}

std::complex<double> ComplexDensity::integral() const { return coeffs.mean(); }

double ComplexDensity::norm() const {
  return std::sqrt(coeffs.squaredNorm() / static_cast<double>(grid.n()));
}

KernelGrid::KernelGrid(Grid g, Eigen::MatrixXd v) : grid(g), values(std::move(v)) {
  const auto n = static_cast<Eigen::Index>(grid.n());
  if (values.rows() != n || values.cols() != n) {
    throw InvalidInput("kernel grid must be n x n");
  }
}

double discrete_inner_product(const DensityVector& f, const DensityVector& g) {
  require_same_grid(f.grid, g.grid);
  return f.coeffs.dot(g.coeffs) / static_cast<double>(f.grid.n());
}

std::complex<double> discrete_inner_product(const ComplexDensity& f,
                                            const ComplexDensity& g) {
  require_same_grid(f.grid, g.grid);
  // Eigen's dot conjugates its first argument.
  return g.coeffs.dot(f.coeffs) / static_cast<double>(f.grid.n());
}

double discrete_kernel_norm(const KernelGrid& k) {
  const double n = static_cast<double>(k.grid.n());
  return std::sqrt(k.values.squaredNorm()) / n;
}

double kernel_inner_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput("kernel inner product of mismatched grids");
  }
  const double n = static_cast<double>(a.rows());
  return a.cwiseProduct(b).sum() / (n * n);
}

DensityVector project_observable(const Grid& grid,
                                 const std::function<double(double)>& c) {
  const std::size_t n = grid.n();
  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(n));
  const GaussLegendre probe(5);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = grid.left(i);
    const double b = grid.right(i);
    for (double node : probe.nodes()) {
      const double x = 0.5 * (a + b) + 0.5 * (b - a) * node;
      if (!std::isfinite(c(x))) {
        throw InvalidInput("observable is not finite at x=" + std::to_string(x));
      }
    }
    const auto r = integrate_adaptive(c, a, b, 1e-13);
    coeffs[static_cast<Eigen::Index>(i)] = r.value * static_cast<double>(n);
  }
  return {grid, std::move(coeffs)};
}

}  // namespace optresp
