#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "optresp/map.hpp"
#include "optresp/noise.hpp"

namespace optresp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
};

/// A real function on ℝ together with a declared (finite) support.
struct CompactFunction {
  std::function<double(double)> f;
  std::vector<Interval> support;
};

/// P_π f sampled on a set of points of [0,1].
struct ReflectedDensity {
  std::vector<double> points;
  std::vector<double> values;
  std::string provenance;
};

/// Largest |i| of the even shifts the fold may use.
inline constexpr int kMaxFoldShift = 4;

/// Even shift indices i with f(i ± x) possibly nonzero for some x ∈ [0,1],
/// given a support [lo, hi]. Throws InvalidInput if the support is not finite
/// or needs |i| > kMaxFoldShift.
struct ShiftRange {
  int first = 0;  // even
  int last = 0;   // even, inclusive
};
ShiftRange fold_shift_range(double lo, double hi);

/// π(z): the reflection of ℝ onto [0,1], π(z) = min_i |z - 2i|.
double fold_point(double z) noexcept;

/// (P_π f)(x) = Σ_{i ∈ 2ℤ} f(i + x) + f(i - x), summed over the finitely many
/// shifts that meet the declared support.
ReflectedDensity reflect_fold(const CompactFunction& f,
                              std::span<const double> eval_points,
                              std::string provenance = {});

/// (P_π g(· - t))(x) for g supported in the window that produced `range`.
/// Hot path of assembly.
template <typename G>
double fold_shifted(const G& g, double t, double x, ShiftRange range) {
  double sum = 0.0;
  for (int i = range.first; i <= range.last; i += 2) {
    sum += g(i + x - t) + g(i - x - t);
  }
  return sum;
}

/// k(x, y) = (P_π τ_{-T(y)} ρ)(x).
double kernel_value(const MapModel& map, const NoiseModel& noise, double x,
                    double y);

/// (P_π τ_{-T(y)} dρ/dx)(x). The map derivative of the kernel is
/// k̇(x, y) = -factor(x, y) · Ṫ(y).
double kernel_map_derivative_factor(const MapModel& map,
                                    const NoiseModel& noise, double x,
                                    double y);

}  // namespace optresp
