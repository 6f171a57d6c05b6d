#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace optresp {

/// A deterministic interval map T: [0,1] → [0,1], evaluated pointwise.
///
/// `breakpoints` lists interior points where T (or its derivative) may jump;
/// quadrature splits cells there. Discontinuities need no other treatment
/// since every use of T sits under an integral.
class MapModel {
 public:
  using Function = std::function<double(double)>;
  using Parameter = std::pair<std::string, double>;

  MapModel(std::string name, std::string description, Function eval,
           std::vector<Parameter> parameters = {},
           std::vector<double> breakpoints = {});

  double operator()(double x) const { return eval_(x); }
  double eval(double x) const { return eval_(x); }

  const std::string& name() const noexcept { return name_; }
  const std::string& description() const noexcept { return description_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }

 private:
  std::string name_;
  std::string description_;
  Function eval_;
  std::vector<Parameter> params_;
  std::vector<double> breaks_;
};

/// T(x) = x(1 + (2x)^α) on [0, 1/2), 2x - 1 on [1/2, 1].
MapModel pomeau_manneville(double alpha = 0.5);

/// Interval exchange: interval k (in domain order, lengths[k]) is translated
/// to slot permutation[k] of the image (0-based). Lengths are normalised to
/// sum 1.
MapModel interval_exchange(std::vector<int> permutation,
                           std::vector<double> lengths);

/// Lengths of the default weak-mixing exchange: the normalised leading
/// eigenvector of [[13,37,77,47],[10,30,60,37],[3,10,24,14],[4,10,19,12]].
std::vector<double> default_exchange_lengths();

/// (1234) → (4321) with default_exchange_lengths().
MapModel interval_exchange();

enum class AffineMode { Modulo, Clamp };

/// T(x) = a·x + b, folded into [0,1] by `mode`.
MapModel affine(double a, double b, AffineMode mode = AffineMode::Clamp);

/// Piecewise-linear interpolation of (x, T(x)) samples; x strictly increasing
/// and covering [0,1] after constant extension at the ends.
MapModel table_map(std::vector<std::pair<double, double>> samples,
                   std::string label = "table");

/// Reads a two-column CSV "x,T(x)"; lines starting with '#' and a
/// non-numeric header line are skipped.
MapModel load_table_map(const std::string& path);

/// Builds a map by name: "pomeau-manneville" (alpha), "interval-exchange",
/// "affine" (a, b, mode), "table" (path). Unknown names raise InvalidInput.
struct MapSpec {
  std::string name;
  std::vector<MapModel::Parameter> parameters;
  std::vector<int> permutation;   // interval-exchange only
  std::vector<double> lengths;    // interval-exchange only
  std::string table_path;         // table only
  std::string affine_mode = "clamp";
};
MapModel make_map(const MapSpec& spec);

/// T₀ + δ·Ṫ with Ṫ piecewise constant on the n-cell equipartition. The result
/// may overshoot [0,1] by O(δ); the reflecting noise absorbs that.
MapModel perturbed_map(const MapModel& base, std::vector<double> cell_values,
                       double delta);

}  // namespace optresp
