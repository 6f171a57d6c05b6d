#include "optresp/map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "optresp/error.hpp"

namespace optresp {

MapModel::MapModel(std::string name, std::string description, Function eval,
                   std::vector<Parameter> parameters,
                   std::vector<double> breakpoints)
    : name_(std::move(name)),
      description_(std::move(description)),
      eval_(std::move(eval)),
      params_(std::move(parameters)),
      breaks_(std::move(breakpoints)) {
  if (!eval_) throw InvalidInput("map '" + name_ + "' has no evaluator");
  std::sort(breaks_.begin(), breaks_.end());
  std::erase_if(breaks_, [](double b) { return !(b > 0.0 && b < 1.0); });
}

MapModel pomeau_manneville(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidParameter("Pomeau-Manneville alpha must be positive");
  }
  auto eval = [alpha](double x) {
    if (x < 0.5) return x * (1.0 + std::pow(2.0 * x, alpha));
    return 2.0 * x - 1.0;
  };
  return MapModel("pomeau-manneville",
                  "x(1+(2x)^alpha) on [0,1/2), 2x-1 on [1/2,1]", eval,
                  {{"alpha", alpha}}, {0.5});
}

MapModel interval_exchange(std::vector<int> permutation,
                           std::vector<double> lengths) {
  const std::size_t m = lengths.size();
  if (m == 0 || permutation.size() != m) {
    throw InvalidInput("interval exchange needs matching permutation and lengths");
  }
  std::vector<int> sorted = permutation;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < m; ++k) {
    if (sorted[k] != static_cast<int>(k)) {
      throw InvalidInput("interval exchange permutation must be a permutation of 0..m-1");
    }
  }
  for (double l : lengths) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw InvalidParameter("interval exchange lengths must be positive");
    }
  }
  const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
  for (double& l : lengths) l /= total;

  // Domain starts in order; image slot s is filled by the interval k with
  // permutation[k] = s.
  std::vector<double> domain_start(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) {
    domain_start[k] = domain_start[k - 1] + lengths[k - 1];
  }
  std::vector<std::size_t> by_slot(m);
  for (std::size_t k = 0; k < m; ++k) {
    by_slot[static_cast<std::size_t>(permutation[k])] = k;
  }
  std::vector<double> image_start(m, 0.0);
  double pos = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    image_start[by_slot[s]] = pos;
    pos += lengths[by_slot[s]];
  }
  std::vector<double> breaks(domain_start.begin() + 1, domain_start.end());

  auto eval = [domain_start, image_start, breaks](double x) {
    const auto k = static_cast<std::size_t>(
        std::upper_bound(breaks.begin(), breaks.end(), x) - breaks.begin());
    return std::clamp(x - domain_start[k] + image_start[k], 0.0, 1.0);
  };
  std::vector<MapModel::Parameter> params;
  for (std::size_t k = 0; k < m; ++k) {
    params.emplace_back("length" + std::to_string(k + 1), lengths[k]);
  }
  for (std::size_t k = 0; k < m; ++k) {
    params.emplace_back("slot" + std::to_string(k + 1),
                        static_cast<double>(permutation[k]));
  }
  return MapModel("interval-exchange", "piecewise translation of intervals",
                  eval, std::move(params), std::move(breaks));
}

std::vector<double> default_exchange_lengths() {
  Eigen::Matrix4d m;
  m << 13, 37, 77, 47,
       10, 30, 60, 37,
        3, 10, 24, 14,
        4, 10, 19, 12;
  Eigen::EigenSolver<Eigen::Matrix4d> solver(m);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < 4; ++k) {
    if (solver.eigenvalues()[k].real() > solver.eigenvalues()[best].real()) {
      best = k;
    }
  }
  Eigen::Vector4d v = solver.eigenvectors().col(best).real().cwiseAbs();
  v /= v.sum();
  return {v[0], v[1], v[2], v[3]};
}

MapModel interval_exchange() {
  return interval_exchange({3, 2, 1, 0}, default_exchange_lengths());
}

MapModel affine(double a, double b, AffineMode mode) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidParameter("affine coefficients must be finite");
  }
  std::vector<double> breaks;
  if (mode == AffineMode::Modulo && a != 0.0) {
    // Jumps where a·x + b crosses an integer.
    const double lo = std::min(b, a + b);
    const double hi = std::max(b, a + b);
    for (double k = std::ceil(lo); k <= std::floor(hi); k += 1.0) {
      breaks.push_back((k - b) / a);
    }
  }
  auto eval = [a, b, mode](double x) {
    const double v = a * x + b;
    if (mode == AffineMode::Clamp) return std::clamp(v, 0.0, 1.0);
    return v - std::floor(v);
  };
  return MapModel("affine",
                  mode == AffineMode::Clamp ? "clamp(a*x+b)" : "(a*x+b) mod 1",
                  eval, {{"a", a}, {"b", b}}, std::move(breaks));
}

MapModel table_map(std::vector<std::pair<double, double>> samples,
                   std::string label) {
  if (samples.size() < 2) {
    throw InvalidInput("table map needs at least two samples");
  }
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto [x, t] = samples[k];
    if (!std::isfinite(x) || !std::isfinite(t)) {
      throw InvalidInput("table map sample " + std::to_string(k) + " is not finite");
    }
    if (t < 0.0 || t > 1.0) {
      throw InvalidInput("table map value out of [0,1] at sample " + std::to_string(k));
    }
    if (k > 0 && !(x > samples[k - 1].first)) {
      throw InvalidInput("table map abscissae must be strictly increasing");
    }
  }
  auto data = std::make_shared<const std::vector<std::pair<double, double>>>(
      std::move(samples));
  auto eval = [data](double x) {
    const auto& s = *data;
    if (x <= s.front().first) return s.front().second;
    if (x >= s.back().first) return s.back().second;
    auto it = std::upper_bound(
        s.begin(), s.end(), x,
        [](double v, const std::pair<double, double>& p) { return v < p.first; });
    const auto& [x1, t1] = *it;
    const auto& [x0, t0] = *(it - 1);
    return t0 + (t1 - t0) * (x - x0) / (x1 - x0);
  };
  return MapModel("table", std::move(label), eval,
                  {{"samples", static_cast<double>(data->size())}});
}

MapModel load_table_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open map table '" + path + "'");
  std::vector<std::pair<double, double>> samples;
  std::string line;
  std::size_t line_no = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    double x = 0.0;
    double t = 0.0;
    char comma = 0;
    if (!(ls >> x >> comma >> t) || comma != ',') {
      if (samples.empty() && !header_skipped) {
        header_skipped = true;
        continue;
      }
      throw InvalidInput("malformed map table line " + std::to_string(line_no) +
                         " in '" + path + "'");
    }
    samples.emplace_back(x, t);
  }
  return table_map(std::move(samples), path);
}

namespace {

double param_or(const std::vector<MapModel::Parameter>& ps,
                const std::string& key, double fallback) {
  for (const auto& [k, v] : ps) {
    if (k == key) return v;
  }
  return fallback;
}

}  // namespace

MapModel make_map(const MapSpec& spec) {
  if (spec.name == "pomeau-manneville") {
    return pomeau_manneville(param_or(spec.parameters, "alpha", 0.5));
  }
  if (spec.name == "interval-exchange") {
    if (spec.permutation.empty() && spec.lengths.empty()) {
      return interval_exchange();
    }
    auto lengths = spec.lengths.empty() ? default_exchange_lengths() : spec.lengths;
    auto perm = spec.permutation;
    if (perm.empty()) {
      perm.resize(lengths.size());
      for (std::size_t k = 0; k < perm.size(); ++k) {
        perm[k] = static_cast<int>(perm.size() - 1 - k);
      }
    }
    return interval_exchange(std::move(perm), std::move(lengths));
  }
  if (spec.name == "affine") {
    AffineMode mode = AffineMode::Clamp;
    if (spec.affine_mode == "mod" || spec.affine_mode == "modulo") {
      mode = AffineMode::Modulo;
    } else if (spec.affine_mode != "clamp") {
      throw InvalidInput("affine mode must be 'clamp' or 'mod', got '" +
                         spec.affine_mode + "'");
    }
    return affine(param_or(spec.parameters, "a", 1.0),
                  param_or(spec.parameters, "b", 0.0), mode);
  }
  if (spec.name == "table") {
    if (spec.table_path.empty()) throw InvalidInput("table map needs a path");
    return load_table_map(spec.table_path);
  }
  throw InvalidInput("unknown map '" + spec.name + "'");
}

MapModel perturbed_map(const MapModel& base, std::vector<double> cell_values,
                       double delta) {
  const std::size_t n = cell_values.size();
  if (n == 0) throw InvalidInput("map perturbation is empty");
  std::vector<double> breaks = base.breakpoints();
  for (std::size_t i = 1; i < n; ++i) {
    breaks.push_back(static_cast<double>(i) / static_cast<double>(n));
  }
  auto values = std::make_shared<const std::vector<double>>(std::move(cell_values));
  auto eval = [base, values, delta, n](double x) {
    const double scaled = std::floor(x * static_cast<double>(n));
    const std::size_t i =
        scaled <= 0.0 ? 0 : std::min(static_cast<std::size_t>(scaled), n - 1);
    return base(x) + delta * (*values)[i];
  };
  auto params = base.parameters();
  params.emplace_back("delta", delta);
  return MapModel(base.name(), base.description() + " + delta*Tdot", eval,
                  std::move(params), std::move(breaks));
}

}  // namespace optresp
