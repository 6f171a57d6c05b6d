#include "optresp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "optresp/error.hpp"

namespace optresp {

GaussLegendre::GaussLegendre(int order) {
  if (order < 1) {
    throw InvalidParameter("Gauss-Legendre order must be >= 1, got " +
                           std::to_string(order));
  }
  const auto m = static_cast<std::size_t>(order);
  nodes_.assign(m, 0.0);
  weights_.assign(m, 0.0);
  if (m == 1) {
    weights_[0] = 2.0;
    return;
  }
  // Newton on P_m from the usual cosine guess; roots come in ± pairs.
  for (std::size_t i = 0; i < m / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(m) + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= m; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(m) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes_[i] = -x;
    nodes_[m - 1 - i] = x;
    weights_[i] = w;
    weights_[m - 1 - i] = w;
  }
  if (m % 2 == 1) {
    // Middle node x = 0: weight from P'_m(0).
    double p0 = 1.0;
    double p1 = 0.0;
    for (std::size_t k = 2; k <= m; ++k) {
      const double kk = static_cast<double>(k);
      const double p2 = -(kk - 1.0) * p0 / kk;
      p0 = p1;
      p1 = p2;
    }
    const double dp = static_cast<double>(m) * p0;  // P'_m(0) = m P_{m-1}(0)
    weights_[m / 2] = 2.0 / (dp * dp);
  }
}

AdaptiveResult integrate_adaptive(const std::function<double(double)>& f,
                                  double a, double b, double abs_tol,
                                  int max_depth) {
  using boost::math::quadrature::gauss_kronrod;
  AdaptiveResult out;
  if (a == b) return out;
  // Boost takes a relative tolerance; derive it from abs_tol and a single
  // Kronrod pass so cancellation-heavy integrands do not over-refine.
  double l1 = 0.0;
  gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &out.error_estimate, &l1);
  const double rel_tol =
      l1 > 0.0 ? std::max(abs_tol / l1, 1e-14) : 1e-14;
  out.value = gauss_kronrod<double, 31>::integrate(
      f, a, b, static_cast<unsigned>(max_depth), rel_tol, &out.error_estimate,
      &l1);
  if (!std::isfinite(out.value)) {
    throw NumericError("adaptive quadrature produced a non-finite value");
  }
  if (out.error_estimate > abs_tol && out.error_estimate > 1e-12 * l1) {
    std::ostringstream msg;
    msg << "adaptive quadrature on [" << a << ", " << b
        << "] did not reach tolerance: error " << std::scientific
        << out.error_estimate << " vs integral of |f| " << l1;
    throw NumericError(msg.str());
  }
  return out;
}

}  // namespace optresp
