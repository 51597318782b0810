#include "pcl/grid_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pcl/errors.hpp"

namespace pcl {

static_assert(std::endian::native == std::endian::little,
              "binary I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'C', 'L', '1'};

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("truncated binary header");
  return v;
}

}  // namespace

GridField GridField::zeros(FieldKind kind, const GridSpec& grid) {
  const std::size_t cols = kind == FieldKind::Control ? grid.n_time : grid.n_time + 1;
  return GridField(kind, grid.n_space, cols);
}

bool GridField::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

bool GridField::matches(const GridSpec& grid) const {
  const std::size_t cols = kind_ == FieldKind::Control ? grid.n_time : grid.n_time + 1;
  return n_space_ == grid.n_space && n_cols_ == cols;
}

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::State:
      return "state";
    case FieldKind::Control:
      return "control";
    case FieldKind::Adjoint:
      return "adjoint";
  }
  return "unknown";
}

void write_csv(const std::filesystem::path& path, const GridField& field, const GridSpec& grid) {
  auto out = open_out(path, std::ios::out | std::ios::trunc);
  out << std::setprecision(17);
  out << "x";
  for (std::size_t n = 0; n < field.n_cols(); ++n) out << ',' << grid.t(n);
  out << '\n';
  for (std::size_t i = 0; i < field.n_space(); ++i) {
    out << grid.x(i);
    for (std::size_t n = 0; n < field.n_cols(); ++n) out << ',' << field(i, n);
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

GridField read_csv(const std::filesystem::path& path, FieldKind kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV '" + path.string() + "'");
  const auto n_cols =
      static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    bool first = true;
    while (std::getline(ls, cell, ',')) {
      if (first) {  // x coordinate
        first = false;
        continue;
      }
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("bad number '" + cell + "' in '" + path.string() + "'");
      }
    }
    if (row.size() != n_cols) throw IoError("ragged CSV '" + path.string() + "'");
    rows.push_back(std::move(row));
  }
  GridField field(kind, rows.size(), n_cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t n = 0; n < n_cols; ++n) field(i, n) = rows[i][n];
  return field;
}

void write_binary(const std::filesystem::path& path, const GridField& field) {
  auto out = open_out(path, std::ios::out | std::ios::binary | std::ios::trunc);
  out.write(kMagic, 4);
  write_u64(out, 2);
  write_u64(out, field.n_space());
  write_u64(out, field.n_cols());
  for (std::size_t i = 0; i < field.n_space(); ++i)
    for (std::size_t n = 0; n < field.n_cols(); ++n) {
      const double v = field(i, n);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

GridField read_binary(const std::filesystem::path& path, FieldKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("'" + path.string() + "' is not a PCL1 file");
  if (read_u64(in) != 2) throw IoError("expected a rank-2 PCL1 array");
  const auto rows = read_u64(in);
  const auto cols = read_u64(in);
  GridField field(kind, rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t n = 0; n < cols; ++n) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      field(i, n) = v;
    }
  if (!in) throw IoError("truncated data in '" + path.string() + "'");
  return field;
}

GridField read_field(const std::filesystem::path& path, FieldKind kind) {
  if (path.extension() == ".csv") return read_csv(path, kind);
  return read_binary(path, kind);
}

void write_series_csv(const std::filesystem::path& path, std::span<const double> times,
                      std::span<const double> values) {
  auto out = open_out(path, std::ios::out | std::ios::trunc);
  out << std::setprecision(17);
  for (std::size_t k = 0; k < times.size(); ++k) out << (k ? "," : "") << times[k];
  out << '\n';
  for (std::size_t k = 0; k < values.size(); ++k) out << (k ? "," : "") << values[k];
  out << '\n';
}

}  // namespace pcl
