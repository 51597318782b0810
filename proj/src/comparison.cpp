#include "pcl/comparison.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>

#include "pcl/discrete_adjoint.hpp"
#include "pcl/errors.hpp"

namespace pcl {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StageRun failed(Method m, const std::string& status) {
  StageRun s;
  s.result.method = m;
  s.result.status = status;
  return s;
}

}  // namespace

std::optional<GridField> load_reference(const ExperimentConfig& cfg) {
  if (cfg.reference_path.empty()) return std::nullopt;
  auto ref = read_field(cfg.reference_path, FieldKind::Control);
  if (!ref.matches(cfg.grid)) throw InvalidArgument("reference control does not match the grid");
  return ref;
}

StageRun run_adjoint_stage(Method method, const GridField& initial, const ExperimentConfig& cfg,
                           const GridField* monitor_reference) {
  const auto t0 = std::chrono::steady_clock::now();
  auto run = optimize_adjoint(initial, cfg.spec, cfg.grid, cfg.adjoint_qn, monitor_reference);
  StageRun s;
  s.result = evaluate_method(method, run.control, nullptr, monitor_reference, cfg.spec, cfg.grid);
  s.result.iterations = run.iterations;
  s.result.wall_seconds = seconds_since(t0);
  s.record = std::move(run.record);
  s.stop_reason = to_string(run.reason);
  return s;
}

StageRun run_pinn_stage(Formulation formulation, const ExperimentConfig& cfg,
                        const GridField* monitor_reference) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<MlpParams> nets;
  for (std::size_t k = 0; k < network_count(formulation); ++k)
    nets.push_back(init_params(cfg.arch, cfg.seed + k));
  auto trained = train_pinn(formulation, std::move(nets), cfg.spec, cfg.grid, cfg.weights,
                            cfg.pinn, monitor_reference);
  const Method method =
      formulation == Formulation::Direct ? Method::DirectPinn : Method::IndirectPinn;
  StageRun s;
  s.result = evaluate_method(method, export_control(trained.nets[1], cfg.grid), &trained.nets[0],
                             monitor_reference, cfg.spec, cfg.grid);
  s.result.iterations = trained.iterations;
  s.result.wall_seconds = seconds_since(t0);
  s.record = std::move(trained.record);
  s.nets = std::move(trained.nets);
  s.final_training_loss = trained.final_training_loss;
  s.final_validation = trained.final_validation;
  s.stop_reason = trained.epoch_reasons.empty() ? "adam_only"
                                                : to_string(trained.epoch_reasons.back());
  return s;
}

std::vector<StageRun> run_comparison(const ExperimentConfig& cfg) {
  throw_if_invalid(validate_spec(cfg.spec, cfg.grid));
  throw_if_invalid(validate_weights(cfg.weights));
  const auto monitor_ref = load_reference(cfg);
  const GridField* mref = monitor_ref ? &*monitor_ref : nullptr;

  const auto guarded = [](Method m, auto&& body) -> StageRun {
    try {
      return body();
    } catch (const Error& e) {
      return failed(m, std::string("failed: ") + e.what());
    }
  };

  std::vector<StageRun> stages;
  stages.push_back(guarded(Method::AdjointScratch, [&] {
    return run_adjoint_stage(Method::AdjointScratch, GridField::zeros(FieldKind::Control, cfg.grid),
                             cfg, mref);
  }));
  stages.push_back(guarded(Method::DirectPinn,
                           [&] { return run_pinn_stage(Formulation::Direct, cfg, mref); }));
  stages.push_back(guarded(Method::IndirectPinn,
                           [&] { return run_pinn_stage(Formulation::Indirect, cfg, mref); }));
  if (stages[1].result.status == "ok") {
    const GridField warm = stages[1].result.control;
    stages.push_back(guarded(Method::AdjointFromPinn, [&] {
      return run_adjoint_stage(Method::AdjointFromPinn, warm, cfg, mref);
    }));
  } else {
    stages.push_back(failed(Method::AdjointFromPinn, "skipped: direct_pinn did not finish"));
  }

  const auto& reference = stages[3].result;
  for (auto& s : stages) {
    s.result.rel_l2_u_vs_reference.reset();
    if (reference.status != "ok" || s.result.status != "ok") continue;
    try {
      s.result.rel_l2_u_vs_reference = rel_l2(s.result.control, reference.control, cfg.grid);
    } catch (const ZeroReference&) {
    }
  }
  return stages;
}

void write_stage(const std::filesystem::path& dir, const StageRun& stage, const GridSpec& grid,
                 bool zero_timing) {
  const auto sub = dir / to_string(stage.result.method);
  std::filesystem::create_directories(sub);
  if (!stage.record.rows.empty()) stage.record.write_csv(sub / "run.csv", zero_timing);
  if (stage.result.status != "ok") return;
  const auto& r = stage.result;
  write_csv(sub / "control.csv", r.control, grid);
  write_binary(sub / "control.bin", r.control);
  write_csv(sub / "solver_state.csv", r.solver_state.snapshots, grid);
  if (r.net_state) {
    write_csv(sub / "net_state.csv", r.net_state->snapshots, grid);
    std::vector<double> times(grid.n_time + 1);
    for (std::size_t n = 0; n <= grid.n_time; ++n) times[n] = grid.t(n);
    write_series_csv(sub / "snapshot_errors.csv", times, r.snapshot_errors);
  }
  static const char* names[] = {"state", "control", "adjoint"};
  for (std::size_t k = 0; k < stage.nets.size() && k < 3; ++k)
    write_params(sub / (std::string("params_") + names[k] + ".bin"), stage.nets[k]);
}

std::string summary_json(const std::vector<StageRun>& stages, const ExperimentConfig& cfg,
                         bool zero_timing) {
  using nlohmann::ordered_json;
  const auto objective_json = [](const ObjectiveBreakdown& o) {
    return ordered_json{{"J_T", o.j_terminal}, {"J_Q", o.j_control}, {"J", o.j_total}};
  };
  ordered_json methods = ordered_json::array();
  for (const auto& s : stages) {
    const auto& r = s.result;
    ordered_json m;
    m["method"] = to_string(r.method);
    m["status"] = r.status;
    if (r.status == "ok") {
      m["rectangle"] = objective_json(r.objective_rect);
      m["trapezoid"] = objective_json(r.objective_trap);
      m["rel_l2_u"] = r.rel_l2_u_vs_reference ? ordered_json(*r.rel_l2_u_vs_reference)
                                              : ordered_json(nullptr);
      m["iterations"] = r.iterations;
      m["stop_reason"] = s.stop_reason;
      m["terminal_identity"] = r.terminal_identity;
      m["tv_x"] = r.tv_x;
      if (!r.snapshot_errors.empty()) m["state_snapshot_error_max"] =
          *std::max_element(r.snapshot_errors.begin(), r.snapshot_errors.end());
      if (s.final_training_loss) m["final_training_loss"] = s.final_training_loss->total;
      if (s.final_validation) m["final_validation_loss"] = s.final_validation->total;
    }
    m["wall_seconds"] = zero_timing ? 0.0 : r.wall_seconds;
    methods.push_back(std::move(m));
  }
  ordered_json root;
  root["reference_method"] = to_string(Method::AdjointFromPinn);
  root["config_sha256"] = sha256_hex(dump_config(cfg));
  root["seed"] = cfg.seed;
  root["methods"] = std::move(methods);
  return root.dump(2) + "\n";
}

}  // namespace pcl
