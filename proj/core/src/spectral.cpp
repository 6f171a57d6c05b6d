#include "optresp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "optresp/error.hpp"

namespace optresp {

using cd = std::complex<double>;

bool EigenPair::is_real(double tol) const {
  return std::abs(lambda.imag()) <= tol * std::max(1.0, std::abs(lambda));
}

EigenPair EigenPair::conjugate() const {
  EigenPair c{std::conj(lambda),
              ComplexDensity(right.grid, right.coeffs.conjugate()),
              ComplexDensity(left.grid, left.coeffs.conjugate()),
              geometrically_simple};
  return c;
}

bool spectral_order(cd a, cd b) {
  const double ma = std::abs(a);
  const double mb = std::abs(b);
  if (ma != mb) return ma > mb;
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() < b.imag();
}

SpectralSet compute_spectrum(const TransferMatrix& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a.entries, false);
  if (solver.info() != Eigen::Success) {
    throw SpectralError("dense eigensolver failed to converge");
  }
  SpectralSet s;
  const auto& ev = solver.eigenvalues();
  s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), spectral_order);
  return s;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

double leading_residual(const Eigen::MatrixXd& p, const Eigen::VectorXd& f) {
  return (p * f - f).norm();
}

}  // namespace

DensityVector invariant_density(const TransferMatrix& a) {
  const Eigen::Index n = a.entries.rows();
  const double nd = static_cast<double>(n);
  Eigen::MatrixXd bordered = Eigen::MatrixXd::Zero(n + 1, n + 1);
  bordered.topLeftCorner(n, n) =
      Eigen::MatrixXd::Identity(n, n) - a.entries;
  bordered.topRightCorner(n, 1).setOnes();
  bordered.bottomLeftCorner(1, n).setConstant(1.0 / nd);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs[n] = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(bordered);
  // A multiple eigenvalue 1 makes the bordered system singular. The rcond
  // estimate alone misses exact zero pivots, so check those too.
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double rcond = std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
  if (!(rcond > 1e-13)) {
    throw SpectralError("invariant density is not unique: eigenvalue 1 is not simple (rcond " +
                        fmt(rcond) + ")");
  }
  Eigen::VectorXd sol = lu.solve(rhs);
  sol += lu.solve(rhs - bordered * sol);  // one refinement step
  Eigen::VectorXd f = sol.head(n);
  if (!f.allFinite()) {
    throw SpectralError("invariant density solve is singular (eigenvalue 1 not simple?)");
  }
  const double min_entry = f.minCoeff();
  if (min_entry < -1e-10 * std::max(1.0, f.cwiseAbs().maxCoeff())) {
    throw SpectralError("invariant density has negative entries (min " +
                        fmt(min_entry) + "); eigenvalue 1 is not simple or the matrix is not stochastic");
  }
  f = f.cwiseMax(0.0);
  f /= f.mean();
  const double res = leading_residual(a.entries, f);
  if (!(res <= 1e-10)) {
    throw SpectralError("invariant density residual " + fmt(res) +
                        " exceeds 1e-10");
  }
  return {a.grid, std::move(f)};
}

namespace {

Eigen::Index closest_index(const Eigen::VectorXcd& values, cd target) {
  Eigen::Index best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const double d = std::abs(values[k] - target);
    if (d < dist) {
      dist = d;
      best = k;
    }
  }
  return best;
}

}  // namespace

EigenPair subdominant_eigenpair(const TransferMatrix& a, EigenSelector selector) {
  const Eigen::Index n = a.entries.rows();
  if (n < 2) throw EigenvalueNotFound("a 1-cell system has no subdominant eigenvalue");
  Eigen::EigenSolver<Eigen::MatrixXd> right(a.entries, true);
  if (right.info() != Eigen::Success) {
    throw SpectralError("dense eigensolver failed to converge");
  }
  const Eigen::VectorXcd ev = right.eigenvalues();
  const Eigen::Index leading = closest_index(ev, cd(1.0, 0.0));
  if (std::abs(ev[leading] - 1.0) > 1e-8) {
    throw SpectralError("matrix has no eigenvalue 1; is it column-stochastic?");
  }

  Eigen::Index chosen = -1;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == leading) continue;
    const cd lam = ev[k];
    if (selector == EigenSelector::LargestModulusReal &&
        std::abs(lam.imag()) > 1e-12 * std::max(1.0, std::abs(lam))) {
      continue;
    }
    if (chosen < 0 || spectral_order(lam, ev[chosen])) chosen = k;
  }
  if (chosen < 0 || (selector == EigenSelector::LargestModulusReal &&
                     std::abs(ev[chosen]) <= 0.1)) {
    throw EigenvalueNotFound("no real subdominant eigenvalue of modulus > 0.1");
  }
  const cd lambda = ev[chosen];
  if (std::abs(lambda) >= 1.0 - 1e-8) {
    throw SpectralError("no spectral gap: subdominant |lambda| = " +
                        fmt(std::abs(lambda)));
  }
  double separation = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k != chosen) separation = std::min(separation, std::abs(ev[k] - lambda));
  }
  if (!(separation > kSimplicityThreshold)) {
    throw DegenerateEigenvalue("selected eigenvalue is not simple (separation " +
                               fmt(separation) + ")");
  }

  Eigen::EigenSolver<Eigen::MatrixXd> adjoint(a.entries.transpose(), true);
  if (adjoint.info() != Eigen::Success) {
    throw SpectralError("adjoint eigensolver failed to converge");
  }
  const Eigen::Index partner = closest_index(adjoint.eigenvalues(), std::conj(lambda));
  if (std::abs(adjoint.eigenvalues()[partner] - std::conj(lambda)) >
      1e-6 * std::max(1.0, std::abs(lambda))) {
    throw SpectralError("eigenvalues of P and P^T disagree");
  }

  const double nd = static_cast<double>(n);
  Eigen::VectorXcd e = right.eigenvectors().col(chosen);
  Eigen::VectorXcd ehat = adjoint.eigenvectors().col(partner);
  const bool real_pair = lambda.imag() == 0.0;

  e /= std::sqrt(e.squaredNorm() / nd);
  Eigen::Index big = 0;
  e.cwiseAbs().maxCoeff(&big);
  e *= std::conj(e[big]) / std::abs(e[big]);
  const cd overlap = ehat.dot(e) / nd;  // (1/n) Σ e conj(ê)
  if (std::abs(overlap) < 1e-14) {
    throw DegenerateEigenvalue("right and adjoint eigenvectors are orthogonal");
  }
  ehat /= std::conj(overlap);
  if (real_pair) {
    e = e.real().cast<cd>();
    ehat = ehat.real().cast<cd>();
  }
  return EigenPair{lambda, ComplexDensity(a.grid, std::move(e)),
                   ComplexDensity(a.grid, std::move(ehat)), true};
}

DensityVector project_out_f0(const DensityVector& c, const DensityVector& f0) {
  const double proj = discrete_inner_product(c, f0);
  return {c.grid, c.coeffs.array() - proj};
}

ResolventSolver::ResolventSolver(const TransferMatrix& a, const DensityVector& f0)
    : f0_(f0) {
  if (!(f0.grid == a.grid)) throw InvalidInput("grid mismatch in resolvent");
  const Eigen::Index n = a.entries.rows();
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd fwd = Eigen::MatrixXd::Zero(n + 1, n + 1);
  fwd.topLeftCorner(n, n) = id - a.entries;
  fwd.topRightCorner(n, 1) = f0.coeffs;
  fwd.bottomLeftCorner(1, n).setConstant(1.0 / nd);
  forward_.compute(fwd);

  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n + 1, n + 1);
  adj.topLeftCorner(n, n) = id - a.entries.transpose();
  adj.topRightCorner(n, 1).setOnes();
  adj.bottomLeftCorner(1, n) = f0.coeffs.transpose() / nd;
  adjoint_.compute(adj);
}

namespace {

Eigen::VectorXd bordered_solve(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                               const Eigen::VectorXd& rhs_top) {
  const Eigen::Index n = rhs_top.size();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs.head(n) = rhs_top;
  const Eigen::MatrixXd& m = lu.reconstructedMatrix();
  Eigen::VectorXd sol = lu.solve(rhs);
  sol += lu.solve(rhs - m * sol);
  if (!sol.allFinite()) {
    throw LinearAlgebraError("resolvent system is singular beyond its rank-1 kernel");
  }
  const double res = (m * sol - rhs).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if (!(res <= 1e-10 * scale)) {
    throw LinearAlgebraError("resolvent residual " + fmt(res) + " exceeds 1e-10");
  }
  return sol.head(n);
}

}  // namespace

DensityVector ResolventSolver::solve(const DensityVector& v) const {
  if (!(v.grid == f0_.grid)) throw InvalidInput("grid mismatch in resolvent solve");
  const double mean = v.integral();
  const double scale = std::max(1.0, v.coeffs.cwiseAbs().maxCoeff());
  if (!(std::abs(mean) <= 1e-8 * scale)) {
    throw PreconditionError("resolvent argument is not zero-mean (mean " +
                            fmt(mean) + ")");
  }
  return {v.grid, bordered_solve(forward_, v.coeffs)};
}

DensityVector ResolventSolver::solve_adjoint(const DensityVector& c) const {
  if (!(c.grid == f0_.grid)) throw InvalidInput("grid mismatch in adjoint solve");
  const DensityVector projected = project_out_f0(c, f0_);
  return {c.grid, bordered_solve(adjoint_, projected.coeffs)};
}

DensityVector resolvent_solve(const TransferMatrix& a, const DensityVector& v) {
  return ResolventSolver(a, invariant_density(a)).solve(v);
}

DensityVector resolvent_solve_adjoint(const TransferMatrix& a,
                                      const DensityVector& c,
                                      const DensityVector& f0) {
  return ResolventSolver(a, f0).solve_adjoint(c);
}

MixingReport mixing_check(const TransferMatrix& a, std::size_t trials,
                          std::size_t horizon, std::uint64_t seed) {
  MixingReport report;
  report.trials = trials;
  report.horizon = horizon;
  const Eigen::Index n = a.entries.rows();

  // Spectral projection away from the eigenvalue-1 direction keeps round-off
  // from re-seeding it; falls back to 𝟙 when no unique fixed point exists.
  Eigen::VectorXd fixed = Eigen::VectorXd::Ones(n);
  try {
    fixed = invariant_density(a).coeffs;
  } catch (const SpectralError&) {
  }

  const SpectralSet spectrum = compute_spectrum(a);
  report.subdominant_modulus =
      spectrum.eigenvalues.size() > 1 ? std::abs(spectrum.eigenvalues[1]) : 0.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kFloor = 1e-12;
  for (std::size_t t = 0; t < trials; ++t) {
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) g[i] = normal(rng);
    g.array() -= g.mean();
    const double g0 = g.norm();
    if (g0 == 0.0) continue;
    std::vector<double> rel(horizon + 1, 0.0);
    rel[0] = 1.0;
    for (std::size_t k = 1; k <= horizon; ++k) {
      g = a.entries * g;
      g -= g.mean() * fixed;
      rel[k] = g.norm() / g0;
    }
    report.max_relative_norm = std::max(report.max_relative_norm, rel[horizon]);

    std::size_t last = 0;
    for (std::size_t k = 0; k <= horizon; ++k) {
      if (rel[k] >= kFloor) last = k;
    }
    double rate = 0.0;
    if (last >= 2) {
      const std::size_t first = last / 2;
      rate = std::pow(rel[last] / rel[first],
                      1.0 / static_cast<double>(last - first));
    } else if (last == 1) {
      rate = rel[1];
    }
    report.fitted_rate = std::max(report.fitted_rate, rate);
  }
  const double target = report.subdominant_modulus;
  report.passed = report.max_relative_norm < 1e-3 &&
                  std::abs(report.fitted_rate - target) <=
                      std::max(0.1 * target, 1e-3);
  return report;
}

}  // namespace optresp
