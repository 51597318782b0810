#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pcl {

/// One logged iterate of any training or optimization phase.
struct RunRow {
  std::size_t iter = 0;
  std::string phase;  // "adam", "qn", "adjoint"
  std::size_t epoch = 0;
  double loss_total = 0.0;
  std::vector<double> terms;  // aligned with RunRecord::term_names
  double grad_norm = 0.0;
  double step_length = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
  std::optional<double> rel_l2_u;
  // Line-search data: directional derivatives at the start and the accepted
  // point, so the Wolfe conditions can be re-checked offline.
  double dir_deriv0 = 0.0;
  double dir_deriv = 0.0;
  double loss_before = 0.0;
  std::optional<double> validation_total;
};

struct RunRecord {
  std::string method;
  std::vector<std::string> term_names;
  std::vector<RunRow> rows;

  /// Columns: iter, phase, epoch, loss_total, <terms...>, grad_norm,
  /// step_length, lr, wall_seconds, rel_l2_u, loss_before, dir_deriv0,
  /// dir_deriv, validation_total. With zero_timing the wall clock column is
  /// written as 0 so that reruns compare bitwise.
  void write_csv(const std::filesystem::path& path, bool zero_timing = false) const;
};

}  // namespace pcl
