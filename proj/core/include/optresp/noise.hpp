#pragma once

#include <functional>
#include <optional>
#include <string>

namespace optresp {

/// Probability density of the additive noise, compactly supported on
/// [-epsilon, epsilon], together with its derivative.
///
/// Immutable after construction; copies share nothing mutable.
class NoiseModel {
 public:
  using Function = std::function<double(double)>;

  NoiseModel(std::string name, double epsilon, Function density,
             Function density_deriv,
             std::optional<double> lipschitz_hint = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  double epsilon() const noexcept { return epsilon_; }

  /// Zero outside (-epsilon, epsilon).
  double density(double x) const {
    return (x <= -epsilon_ || x >= epsilon_) ? 0.0 : density_(x);
  }
  double density_deriv(double x) const {
    return (x <= -epsilon_ || x >= epsilon_) ? 0.0 : deriv_(x);
  }

  /// Lipschitz constant of the density. Recorded for reference only; no
  /// algorithm consumes it.
  std::optional<double> lipschitz_hint() const noexcept { return lipschitz_; }

 private:
  std::string name_;
  double epsilon_;
  Function density_;
  Function deriv_;
  std::optional<double> lipschitz_;
};

/// N(ε) with ∫ N(ε) exp(-ε²/(ε²-x²)) dx = 1 over (-ε, ε).
double bump_normalization(double epsilon);

/// The smooth bump ρ_ε(x) = N(ε) exp(-ε²/(ε²-x²)), 0 < ε ≤ 1.
NoiseModel bump_noise(double epsilon);

}  // namespace optresp
