#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pcl/problem.hpp"

namespace pcl {

enum class FieldKind { State, Control, Adjoint };

/// Values sampled on the space-time grid, indexed (space i, time n).
/// State and Adjoint fields carry n_time + 1 snapshots; Control fields carry
/// one value per slab, n_time columns. Storage is one contiguous column per
/// time index.
class GridField {
 public:
  GridField() = default;
  GridField(FieldKind kind, std::size_t n_space, std::size_t n_cols, double fill = 0.0)
      : kind_(kind), n_space_(n_space), n_cols_(n_cols), data_(n_space * n_cols, fill) {}

  /// Zero field of the right shape for `kind` on `grid`.
  static GridField zeros(FieldKind kind, const GridSpec& grid);

  FieldKind kind() const noexcept { return kind_; }
  std::size_t n_space() const noexcept { return n_space_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t n) { return data_[n * n_space_ + i]; }
  double operator()(std::size_t i, std::size_t n) const { return data_[n * n_space_ + i]; }

  std::span<double> column(std::size_t n) { return {data_.data() + n * n_space_, n_space_}; }
  std::span<const double> column(std::size_t n) const {
    return {data_.data() + n * n_space_, n_space_};
  }

  /// Flat view in column (time-major) order; this is the optimizer's layout.
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool all_finite() const;
  /// True when the shape matches what `kind` requires on `grid`.
  bool matches(const GridSpec& grid) const;

  friend bool operator==(const GridField&, const GridField&) = default;

 private:
  FieldKind kind_ = FieldKind::Control;
  std::size_t n_space_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<double> data_;
};

std::string to_string(FieldKind kind);

/// CSV: header "x,<t_0>,<t_1>,..." then one row per space index starting with
/// x_i. Values are written with 17 significant digits.
void write_csv(const std::filesystem::path& path, const GridField& field, const GridSpec& grid);
GridField read_csv(const std::filesystem::path& path, FieldKind kind);

/// Binary layout (little-endian): magic "PCL1", uint64 rank, uint64 dims[rank],
/// then float64 values in row-major order. A GridField is rank 2 with dims
/// (n_space, n_cols).
void write_binary(const std::filesystem::path& path, const GridField& field);
GridField read_binary(const std::filesystem::path& path, FieldKind kind);

/// Reads either format, chosen by file extension (.csv, anything else binary).
GridField read_field(const std::filesystem::path& path, FieldKind kind);

/// Writes a 1-D series as a two-row CSV: header of times, then values.
void write_series_csv(const std::filesystem::path& path, std::span<const double> times,
                      std::span<const double> values);

}  // namespace pcl
