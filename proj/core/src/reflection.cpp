#include "optresp/reflection.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "optresp/error.hpp"

namespace optresp {

ShiftRange fold_shift_range(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw InvalidInput("fold needs a finite, ordered support interval");
  }
  // f(i + x) needs i ∈ [lo - 1, hi]; f(i - x) needs i ∈ [lo, hi + 1].
  ShiftRange r;
  r.first = 2 * static_cast<int>(std::ceil((lo - 1.0) / 2.0));
  r.last = 2 * static_cast<int>(std::floor((hi + 1.0) / 2.0));
  if (r.first < -kMaxFoldShift || r.last > kMaxFoldShift) {
    throw InvalidInput("support [" + std::to_string(lo) + ", " +
                       std::to_string(hi) +
                       "] needs reflection shifts beyond |i| <= 4");
  }
  return r;
}

double fold_point(double z) noexcept {
  double r = std::fmod(z, 2.0);
  if (r < 0.0) r += 2.0;
  return r > 1.0 ? 2.0 - r : r;
}

ReflectedDensity reflect_fold(const CompactFunction& f,
                              std::span<const double> eval_points,
                              std::string provenance) {
  if (!f.f) throw InvalidInput("fold needs a function");
  if (f.support.empty()) throw InvalidInput("fold needs a declared support");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& iv : f.support) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
      throw InvalidInput("fold support intervals must be finite and ordered");
    }
    lo = std::min(lo, iv.lo);
    hi = std::max(hi, iv.hi);
  }
  const ShiftRange range = fold_shift_range(lo, hi);
  auto inside = [&f](double z) {
    for (const auto& iv : f.support) {
      if (z >= iv.lo && z <= iv.hi) return true;
    }
    return false;
  };
  auto g = [&](double z) { return inside(z) ? f.f(z) : 0.0; };

  ReflectedDensity out;
  out.provenance = std::move(provenance);
  out.points.assign(eval_points.begin(), eval_points.end());
  out.values.reserve(eval_points.size());
  for (double x : eval_points) {
    if (x < 0.0 || x > 1.0) {
      throw InvalidInput("fold evaluation point outside [0,1]: " + std::to_string(x));
    }
    double sum = 0.0;
    for (int i = range.first; i <= range.last; i += 2) {
      sum += g(i + x) + g(i - x);
    }
    out.values.push_back(sum);
  }
  return out;
}

double kernel_value(const MapModel& map, const NoiseModel& noise, double x,
                    double y) {
  const double t = map(y);
  const double eps = noise.epsilon();
  const ShiftRange range = fold_shift_range(t - eps, t + eps);
  return fold_shifted([&noise](double z) { return noise.density(z); }, t, x,
                      range);
}

double kernel_map_derivative_factor(const MapModel& map,
                                    const NoiseModel& noise, double x,
                                    double y) {
  const double t = map(y);
  const double eps = noise.epsilon();
  const ShiftRange range = fold_shift_range(t - eps, t + eps);
  return fold_shifted([&noise](double z) { return noise.density_deriv(z); }, t, x,
                      range);
}

}  // namespace optresp
