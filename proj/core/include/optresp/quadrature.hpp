#pragma once

#include <functional>
#include <vector>

namespace optresp {

/// Gauss–Legendre rule on [-1, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(int order);

  int order() const noexcept { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// ∫_a^b f using the rule mapped affinely onto [a, b].
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      sum += weights_[k] * f(mid + half * nodes_[k]);
    }
    return half * sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct AdaptiveResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive Gauss–Kronrod on [a, b]. Throws NumericError when the error
/// estimate exceeds both abs_tol and 1e-12 of ∫|f|.
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f,
                                  double a, double b, double abs_tol = 1e-12,
                                  int max_depth = 30);

}  // namespace optresp
