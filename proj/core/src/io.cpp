#include "optresp/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "optresp/error.hpp"

namespace optresp::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  return in;
}

double parse_double(const std::string& s, const fs::path& path) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r' || last[-1] == '\t')) --last;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw InvalidInput("malformed number '" + s + "' in " + path.string());
  }
  return v;
}

// Reads "key=value" tokens from a '#' header line.
std::string header_value(const std::string& header, const std::string& key) {
  std::istringstream is(header.substr(header.find_first_not_of("# ")));
  std::string token;
  while (is >> token) {
    const auto eq = token.find('=');
    if (eq != std::string::npos && token.substr(0, eq) == key) {
      return token.substr(eq + 1);
    }
  }
  return {};
}

std::string grid_note(const Grid& grid) {
  return "n=" + std::to_string(grid.n()) + " cells=[i/n,(i+1)/n) x=cell-centre";
}

Eigen::MatrixXd read_matrix_rows(std::istream& in, std::size_t n,
                                 const fs::path& path) {
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m(ni, ni);
  std::string line;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (row >= ni) throw InvalidInput("too many rows in " + path.string());
    std::istringstream ls(line);
    std::string cell;
    Eigen::Index col = 0;
    while (std::getline(ls, cell, ',')) {
      if (col >= ni) throw InvalidInput("too many columns in " + path.string());
      m(row, col++) = parse_double(cell, path);
    }
    if (col != ni) throw InvalidInput("short row in " + path.string());
    ++row;
  }
  if (row != ni) throw InvalidInput("expected " + std::to_string(n) + " rows in " + path.string());
  return m;
}

void write_matrix_rows(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::size_t parse_n(const std::string& header, const fs::path& path) {
  const std::string v = header_value(header, "n");
  std::size_t n = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), n);
  if (v.empty() || res.ec != std::errc() || n == 0) {
    throw InvalidInput("missing n= in header of " + path.string());
  }
  return n;
}

}  // namespace

void write_transfer_csv(const fs::path& path, const TransferMatrix& a) {
  auto out = open_out(path);
  out << "# n=" << a.n() << " map=" << a.map_name << " noise=" << a.noise_name
      << " epsilon=" << format_double(a.epsilon)
      << " layout=row-major rows=x(landing) cols=y(source)\n";
  write_matrix_rows(out, a.entries);
}

TransferMatrix read_transfer_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string header;
  std::getline(in, header);
  if (header.empty() || header[0] != '#') {
    throw InvalidInput("missing header in " + path.string());
  }
  const std::size_t n = parse_n(header, path);
  TransferMatrix a(Grid(n), read_matrix_rows(in, n, path));
  a.map_name = header_value(header, "map");
  a.noise_name = header_value(header, "noise");
  const std::string eps = header_value(header, "epsilon");
  if (!eps.empty()) a.epsilon = parse_double(eps, path);
  return a;
}

void write_kernel_csv(const fs::path& path, const KernelGrid& k,
                      const std::string& map_name, double epsilon) {
  auto out = open_out(path);
  out << "# n=" << k.grid.n() << " map=" << map_name
      << " epsilon=" << format_double(epsilon)
      << " layout=row-major rows=x(landing) cols=y(source)\n";
  write_matrix_rows(out, k.values);
}

KernelGrid read_kernel_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string header;
  std::getline(in, header);
  if (header.empty() || header[0] != '#') {
    throw InvalidInput("missing header in " + path.string());
  }
  const std::size_t n = parse_n(header, path);
  return {Grid(n), read_matrix_rows(in, n, path)};
}

void write_kernel_heatmap(const fs::path& path, const Eigen::MatrixXd& values,
                          const Grid& grid, const std::string& label) {
  const auto n = static_cast<Eigen::Index>(grid.n());
  if (values.rows() != n || values.cols() != n) {
    throw InvalidInput("heatmap values do not match the grid");
  }
  auto out = open_out(path);
  out << "# " << grid_note(grid) << " field=" << label
      << " first-row=y first-col=x\n";
  out << "x\\y";
  for (Eigen::Index j = 0; j < n; ++j) {
    out << ',' << format_double(grid.center(static_cast<std::size_t>(j)));
  }
  out << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    out << format_double(grid.center(static_cast<std::size_t>(i)));
    for (Eigen::Index j = 0; j < n; ++j) out << ',' << format_double(values(i, j));
    out << '\n';
  }
}

std::string CacheKey::file_name() const {
  std::string safe;
  for (char c : map_name) safe += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
  return safe + "_eps" + format_double(epsilon) + "_n" + std::to_string(n) +
         "_q" + std::to_string(quad_order) + ".bin";
}

namespace {

constexpr char kMagic[8] = {'O', 'P', 'T', 'R', 'E', 'S', 'P', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool get(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

void write_transfer_cache(const fs::path& path, const CacheKey& key,
                          const TransferMatrix& a) {
  if (a.n() != key.n) throw InvalidInput("cache key does not match matrix size");
  auto out = open_out(path);
  out.write(kMagic, sizeof kMagic);
  const auto len = static_cast<std::uint64_t>(key.map_name.size());
  put(out, len);
  out.write(key.map_name.data(), static_cast<std::streamsize>(len));
  put(out, key.epsilon);
  put(out, static_cast<std::uint64_t>(key.n));
  put(out, static_cast<std::int64_t>(key.quad_order));
  out.write(reinterpret_cast<const char*>(a.entries.data()),
            static_cast<std::streamsize>(sizeof(double) * a.entries.size()));
  if (!out) throw InvalidInput("failed writing cache " + path.string());
}

std::optional<TransferMatrix> read_transfer_cache(const fs::path& path,
                                                  const CacheKey& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    return std::nullopt;
  }
  std::uint64_t len = 0;
  if (!get(in, len) || len > 4096) return std::nullopt;
  std::string name(len, '\0');
  if (!in.read(name.data(), static_cast<std::streamsize>(len))) return std::nullopt;
  double eps = 0.0;
  std::uint64_t n = 0;
  std::int64_t order = 0;
  if (!get(in, eps) || !get(in, n) || !get(in, order)) return std::nullopt;
  if (name != key.map_name || eps != key.epsilon || n != key.n ||
      order != key.quad_order) {
    return std::nullopt;
  }
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m(ni, ni);
  if (!in.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(sizeof(double) * m.size()))) {
    return std::nullopt;
  }
  TransferMatrix a(Grid(n), std::move(m));
  a.map_name = key.map_name;
  a.epsilon = key.epsilon;
  a.quad_order = key.quad_order;
  return a;
}

void write_spectrum_csv(const fs::path& path, const SpectralSet& spectrum,
                        const Grid& grid) {
  auto out = open_out(path);
  out << "# " << grid_note(grid) << " order=|lambda| desc\n";
  out << "index,re,im,abs\n";
  for (std::size_t k = 0; k < spectrum.eigenvalues.size(); ++k) {
    const auto& v = spectrum.eigenvalues[k];
    out << k << ',' << format_double(v.real()) << ',' << format_double(v.imag())
        << ',' << format_double(std::abs(v)) << '\n';
  }
}

void write_vectors_csv(const fs::path& path, const Grid& grid,
                       const std::vector<std::string>& names,
                       const std::vector<Eigen::VectorXd>& columns,
                       const std::string& header_note) {
  if (names.size() != columns.size()) throw InvalidInput("column names and data differ in count");
  const auto n = static_cast<Eigen::Index>(grid.n());
  for (const auto& c : columns) {
    if (c.size() != n) throw InvalidInput("column length does not match the grid");
  }
  auto out = open_out(path);
  out << "# " << grid_note(grid);
  if (!header_note.empty()) out << ' ' << header_note;
  out << '\n' << 'x';
  for (const auto& name : names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    out << format_double(grid.center(static_cast<std::size_t>(i)));
    for (const auto& c : columns) out << ',' << format_double(c[i]);
    out << '\n';
  }
}

}  // namespace optresp::io
