#include "pcl/run_record.hpp"

#include <fstream>
#include <iomanip>

#include "pcl/errors.hpp"

namespace pcl {

void RunRecord::write_csv(const std::filesystem::path& path, bool zero_timing) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  out << "iter,phase,epoch,loss_total";
  for (const auto& name : term_names) out << ',' << name;
  out << ",grad_norm,step_length,lr,wall_seconds,rel_l2_u,loss_before,dir_deriv0,dir_deriv,"
         "validation_total\n";
  auto optional_cell = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  for (const auto& row : rows) {
    out << row.iter << ',' << row.phase << ',' << row.epoch << ',' << row.loss_total;
    for (std::size_t k = 0; k < term_names.size(); ++k)
      out << ',' << (k < row.terms.size() ? row.terms[k] : 0.0);
    out << ',' << row.grad_norm << ',' << row.step_length << ',' << row.lr << ','
        << (zero_timing ? 0.0 : row.wall_seconds) << ',';
    optional_cell(row.rel_l2_u);
    out << ',' << row.loss_before << ',' << row.dir_deriv0 << ',' << row.dir_deriv << ',';
    optional_cell(row.validation_total);
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pcl
