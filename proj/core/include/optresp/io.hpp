#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "optresp/grid.hpp"
#include "optresp/map.hpp"
#include "optresp/response.hpp"
#include "optresp/spectral.hpp"
#include "optresp/transfer.hpp"

namespace optresp::io {

/// Formats a double with round-trip precision, locale-independent.
std::string format_double(double v);

/// "# n=<n> map=<name> epsilon=<eps> layout=row-major rows=x(landing) cols=y(source)"
/// followed by n rows of n comma-separated values.
void write_transfer_csv(const std::filesystem::path& path,
                        const TransferMatrix& a);
TransferMatrix read_transfer_csv(const std::filesystem::path& path);

void write_kernel_csv(const std::filesystem::path& path, const KernelGrid& k,
                      const std::string& map_name, double epsilon);
KernelGrid read_kernel_csv(const std::filesystem::path& path);

/// Heatmap-friendly matrix: header, then a first row of y centres and a first
/// column of x centres.
void write_kernel_heatmap(const std::filesystem::path& path,
                          const Eigen::MatrixXd& values, const Grid& grid,
                          const std::string& label);

/// Binary cache keyed by (map, ε, n, quadrature order).
struct CacheKey {
  std::string map_name;
  double epsilon = 0.0;
  std::size_t n = 0;
  int quad_order = 0;

  std::string file_name() const;
};
void write_transfer_cache(const std::filesystem::path& path,
                          const CacheKey& key, const TransferMatrix& a);
/// nullopt if the file is missing or its key differs.
std::optional<TransferMatrix> read_transfer_cache(
    const std::filesystem::path& path, const CacheKey& key);

/// index,re,im,abs.
void write_spectrum_csv(const std::filesystem::path& path,
                        const SpectralSet& spectrum, const Grid& grid);

/// Columns named by `names`, first column the cell centre.
void write_vectors_csv(const std::filesystem::path& path, const Grid& grid,
                       const std::vector<std::string>& names,
                       const std::vector<Eigen::VectorXd>& columns,
                       const std::string& header_note = {});

}  // namespace optresp::io
