#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pcl/config.hpp"
#include "pcl/evaluation.hpp"
#include "pcl/run_record.hpp"
#include "pcl/training.hpp"

namespace pcl {

/// One method's run: the evaluated result plus its optimization log and, for
/// PINN methods, the trained networks and final losses.
struct StageRun {
  MethodResult result;
  RunRecord record;
  std::vector<MlpParams> nets;
  std::optional<LossBreakdown> final_training_loss;
  std::optional<LossBreakdown> final_validation;
  std::string stop_reason;
};

/// Reference control read from cfg.reference_path, if configured.
std::optional<GridField> load_reference(const ExperimentConfig& cfg);

/// Discrete-adjoint optimization from `initial`, then evaluation.
StageRun run_adjoint_stage(Method method, const GridField& initial, const ExperimentConfig& cfg,
                           const GridField* monitor_reference);

/// PINN training of the given formulation from seeded networks, then
/// evaluation of the exported control.
StageRun run_pinn_stage(Formulation formulation, const ExperimentConfig& cfg,
                        const GridField* monitor_reference);

/// Adjoint from scratch, direct PINN, indirect PINN, adjoint warm-started from
/// the direct-PINN control. The last one is the reference for every method's
/// rel_l2_u. A failed stage is recorded; stages depending on it are skipped.
std::vector<StageRun> run_comparison(const ExperimentConfig& cfg);

/// <dir>/<method>/{control,solver_state,net_state}.csv, control.bin,
/// snapshot_errors.csv, run.csv and network parameter files.
void write_stage(const std::filesystem::path& dir, const StageRun& stage, const GridSpec& grid,
                 bool zero_timing);

/// summary.json text. With zero_timing all wall-clock fields are 0.
std::string summary_json(const std::vector<StageRun>& stages, const ExperimentConfig& cfg,
                         bool zero_timing);

}  // namespace pcl
