#include "optresp/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "optresp/error.hpp"
#include "optresp/parallel.hpp"
#include "optresp/quadrature.hpp"
#include "optresp/reflection.hpp"

namespace optresp {

TransferMatrix::TransferMatrix(Grid g, Eigen::MatrixXd p)
    : grid(g), entries(std::move(p)) {
  const auto n = static_cast<Eigen::Index>(grid.n());
  if (entries.rows() != n || entries.cols() != n) {
    throw InvalidInput("transfer matrix must be n x n");
  }
}

DensityVector TransferMatrix::apply(const DensityVector& f) const {
  if (!(f.grid == grid)) throw InvalidInput("grid mismatch in transfer apply");
  return {grid, entries * f.coeffs};
}

DensityVector TransferMatrix::apply_adjoint(const DensityVector& f) const {
  if (!(f.grid == grid)) throw InvalidInput("grid mismatch in adjoint apply");
  return {grid, entries.transpose() * f.coeffs};
}

KernelGrid TransferMatrix::kernel() const {
  return {grid, entries * static_cast<double>(grid.n())};
}

MapSensitivity::MapSensitivity(Grid g, Eigen::MatrixXd f)
    : grid(g), factor(std::move(f)) {
  const auto n = static_cast<Eigen::Index>(grid.n());
  if (factor.rows() != n || factor.cols() != n) {
    throw InvalidInput("map sensitivity must be n x n");
  }
}

Eigen::VectorXd MapSensitivity::apply_G(const Eigen::VectorXd& f) const {
  return factor.transpose() * f;
}

Eigen::VectorXcd MapSensitivity::apply_G(const Eigen::VectorXcd& f) const {
  return factor.transpose().cast<std::complex<double>>() * f;
}

namespace {

/// Splits [a, b] at the sorted cut points inside it and then into pieces no
/// longer than h_max.
void split_interval(double a, double b, const std::vector<double>& cuts,
                    double h_max, std::vector<std::pair<double, double>>& out) {
  out.clear();
  double start = a;
  auto emit = [&](double lo, double hi) {
    if (!(hi > lo)) return;
    const auto pieces =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / h_max)));
    const double h = (hi - lo) / static_cast<double>(pieces);
    for (std::size_t p = 0; p < pieces; ++p) {
      const double l = lo + h * static_cast<double>(p);
      out.emplace_back(l, p + 1 == pieces ? hi : l + h);
    }
  };
  for (double c : cuts) {
    if (c > start && c < b) {
      emit(start, c);
      start = c;
    }
  }
  emit(start, b);
}

/// Image of [u, v] (length ≤ 2) under the fold π, intersected with [0,1].
std::pair<double, double> folded_support(double u, double v) {
  double lo = std::min(fold_point(u), fold_point(v));
  double hi = std::max(fold_point(u), fold_point(v));
  for (double k = std::ceil(u); k <= v; k += 1.0) {
    const auto ki = static_cast<long>(k);
    if (ki % 2 == 0) lo = 0.0;
    else hi = 1.0;
  }
  return {lo, hi};
}

struct RawAssembly {
  Eigen::MatrixXd kernel;  // n ∬ k
  Eigen::MatrixXd deriv;   // n ∬ factor, empty unless requested
};

template <bool WithDerivative>
RawAssembly assemble_raw(const Grid& grid, const MapModel& map,
                         const NoiseModel& noise, const QuadratureSpec& quad) {
  if (quad.order < 1 || !(quad.piece_fraction > 0.0)) {
    throw InvalidParameter("quadrature order and piece fraction must be positive");
  }
  const std::size_t n = grid.n();
  const auto ni = static_cast<Eigen::Index>(n);
  const double nd = static_cast<double>(n);
  const double eps = noise.epsilon();
  const double h_max = quad.piece_fraction * eps;
  const GaussLegendre rule(quad.order);
  const auto& nodes = rule.nodes();
  const auto& weights = rule.weights();

  RawAssembly raw;
  raw.kernel = Eigen::MatrixXd::Zero(ni, ni);
  if constexpr (WithDerivative) raw.deriv = Eigen::MatrixXd::Zero(ni, ni);

  const auto& breaks = map.breakpoints();
  auto rho = [&noise](double z) { return noise.density(z); };
  auto drho = [&noise](double z) { return noise.density_deriv(z); };

  parallel_for(n, [&](std::size_t j) {
    std::vector<std::pair<double, double>> y_pieces;
    std::vector<std::pair<double, double>> x_pieces;
    std::vector<double> y_cuts;
    const double ya = grid.left(j);
    const double yb = grid.right(j);
    for (double b : breaks) {
      if (b > ya && b < yb) y_cuts.push_back(b);
    }
    split_interval(ya, yb, y_cuts, h_max, y_pieces);

    const auto jj = static_cast<Eigen::Index>(j);
    for (const auto& [y0, y1] : y_pieces) {
      const double yh = 0.5 * (y1 - y0);
      const double ym = 0.5 * (y1 + y0);
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double y = ym + yh * nodes[q];
        const double wy = weights[q] * yh;
        const double t = map(y);
        if (!std::isfinite(t)) {
          throw AssemblyError("map is not finite at y=" + std::to_string(y) +
                              " (column " + std::to_string(j) + ")");
        }
        const ShiftRange range = fold_shift_range(t - eps, t + eps);
        const auto [xlo, xhi] = folded_support(t - eps, t + eps);
        std::vector<double> x_cuts = {fold_point(t - eps), fold_point(t + eps)};
        std::sort(x_cuts.begin(), x_cuts.end());

        const std::size_t i_first = grid.cell_of(xlo);
        const std::size_t i_last = grid.cell_of(xhi);
        for (std::size_t i = i_first; i <= i_last; ++i) {
          const double xa = std::max(grid.left(i), xlo);
          const double xb = std::min(grid.right(i), xhi);
          if (!(xb > xa)) continue;
          split_interval(xa, xb, x_cuts, h_max, x_pieces);
          double sum_k = 0.0;
          double sum_d = 0.0;
          for (const auto& [x0, x1] : x_pieces) {
            const double xh = 0.5 * (x1 - x0);
            const double xm = 0.5 * (x1 + x0);
            double pk = 0.0;
            double pd = 0.0;
            for (std::size_t r = 0; r < nodes.size(); ++r) {
              const double x = xm + xh * nodes[r];
              pk += weights[r] * fold_shifted(rho, t, x, range);
              if constexpr (WithDerivative) {
                pd += weights[r] * fold_shifted(drho, t, x, range);
              }
            }
            sum_k += xh * pk;
            sum_d += xh * pd;
          }
          const auto ii = static_cast<Eigen::Index>(i);
          raw.kernel(ii, jj) += nd * wy * sum_k;
          if constexpr (WithDerivative) raw.deriv(ii, jj) += nd * wy * sum_d;
        }
      }
    }
  });
  return raw;
}

TransferMatrix normalise(const Grid& grid, Eigen::MatrixXd raw,
                         const MapModel& map, const NoiseModel& noise,
                         const QuadratureSpec& quad) {
  const auto n = raw.cols();
  AssemblyInfo info;
  info.raw_column_sums = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double clamped = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = raw(i, j);
      if (!std::isfinite(v)) {
        throw AssemblyError("non-finite quadrature value in cell (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      if (v < 0.0) {
        clamped -= v;
        raw(i, j) = 0.0;
      }
    }
    info.max_clamped_mass = std::max(info.max_clamped_mass, clamped);
    const double s = raw.col(j).sum();
    info.raw_column_sums[j] = s;
    const double dev = std::abs(s - 1.0);
    info.max_column_deviation = std::max(info.max_column_deviation, dev);
    if (!(dev <= kColumnSumTolerance)) {
      Eigen::Index worst = 0;
      raw.col(j).maxCoeff(&worst);
      throw AssemblyError("quadrature did not converge in column " +
                          std::to_string(j) + " (largest cell (" +
                          std::to_string(worst) + ", " + std::to_string(j) +
                          ")): raw column sum " + std::to_string(s));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) raw.col(j) /= info.raw_column_sums[j];

  TransferMatrix out(grid, std::move(raw));
  out.map_name = map.name();
  out.noise_name = noise.name();
  out.epsilon = noise.epsilon();
  out.quad_order = quad.order;
  out.info = std::move(info);
  return out;
}

}  // namespace

TransferMatrix assemble_transfer_matrix(const Grid& grid, const MapModel& map,
                                        const NoiseModel& noise,
                                        const QuadratureSpec& quad) {
  auto raw = assemble_raw<false>(grid, map, noise, quad);
  return normalise(grid, std::move(raw.kernel), map, noise, quad);
}

AssembledSystem assemble_with_sensitivity(const Grid& grid, const MapModel& map,
                                          const NoiseModel& noise,
                                          const QuadratureSpec& quad) {
  auto raw = assemble_raw<true>(grid, map, noise, quad);
  TransferMatrix p = normalise(grid, std::move(raw.kernel), map, noise, quad);
  // Derivative of raw/colsum(raw) along T₀ + δṪ, with raw' = -G_raw·diag(Ṫ).
  const Eigen::VectorXd& s = p.info.raw_column_sums;
  const Eigen::RowVectorXd g_sums = raw.deriv.colwise().sum();
  Eigen::MatrixXd factor = raw.deriv - p.entries * g_sums.asDiagonal();
  for (Eigen::Index j = 0; j < factor.cols(); ++j) factor.col(j) /= s[j];
  return {std::move(p), MapSensitivity(grid, std::move(factor))};
}

}  // namespace optresp
