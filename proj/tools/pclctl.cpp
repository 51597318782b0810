// pclctl: command-line driver for the optimal-control experiments.
#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "pcl/comparison.hpp"
#include "pcl/config.hpp"
#include "pcl/discrete_adjoint.hpp"
#include "pcl/errors.hpp"
#include "pcl/evaluation.hpp"
#include "pcl/fd_solver.hpp"
#include "pcl/gradient_check.hpp"

#ifndef PCL_VERSION
#define PCL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace pcl;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> threads;
  bool deterministic = false;
  bool coarse = false;
  std::string reference;
  std::string init_control;
};

struct Invocation {
  std::string subcommand;
  CommonOptions common;
  bool zero_control = false;
  std::string control_path;
  std::string params_path;
  std::string state_params_path;
  std::string export_kind = "control";
};

ExperimentConfig effective_config(const CommonOptions& o) {
  auto cfg = o.coarse ? coarse_config() : default_config();
  if (!o.config_path.empty()) {
    if (!fs::exists(o.config_path)) throw IoError("config file not found: " + o.config_path);
    cfg = load_config(o.config_path, cfg);
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.deterministic) cfg.deterministic = true;
  if (!o.reference.empty()) cfg.reference_path = o.reference;
  if (!o.init_control.empty()) cfg.init_control_path = o.init_control;
  cfg.sync();
  throw_if_invalid(validate_spec(cfg.spec, cfg.grid));
  throw_if_invalid(validate_weights(cfg.weights));
  return cfg;
}

fs::path output_dir(const CommonOptions& o) {
  fs::path dir = o.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("PCL_OUT_DIR")) dir = env;
  }
  if (dir.empty()) dir = "pcl_out";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  const auto probe = dir / ".write_probe";
  std::ofstream(probe) << "";
  if (!fs::exists(probe)) throw IoError("output directory is not writable: " + dir.string());
  fs::remove(probe);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
}

void write_manifest(const fs::path& dir, const Invocation& inv, const ExperimentConfig& cfg,
                    const std::vector<std::string>& argv, double wall, int exit_code) {
  nlohmann::ordered_json m;
  m["tool"] = "pclctl";
  m["version"] = PCL_VERSION;
  m["subcommand"] = inv.subcommand;
  m["argv"] = argv;
  m["seed"] = cfg.seed;
  m["threads"] = cfg.pinn.par.threads;
  m["deterministic"] = cfg.deterministic;
  m["config_sha256"] = sha256_hex(dump_config(cfg));
  m["config"] = dump_config(cfg);
  m["compiler"] = std::string(__VERSION__);
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  m["wall_seconds"] = wall;
  m["exit_code"] = exit_code;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void print_stage(const StageRun& s) {
  const auto& r = s.result;
  std::cout << to_string(r.method) << ": " << r.status;
  if (r.status == "ok") {
    std::cout << " J_rect=" << r.objective_rect.j_total << " J_trap=" << r.objective_trap.j_total
              << " iterations=" << r.iterations;
    if (r.rel_l2_u_vs_reference) std::cout << " rel_l2_u=" << *r.rel_l2_u_vs_reference;
    if (s.final_training_loss) std::cout << " final_loss=" << s.final_training_loss->total;
  }
  std::cout << "\n";
}

int finish_stages(const fs::path& out, const std::vector<StageRun>& stages,
                  const ExperimentConfig& cfg) {
  for (const auto& s : stages) {
    write_stage(out, s, cfg.grid, cfg.deterministic);
    print_stage(s);
  }
  write_text(out / "summary.json", summary_json(stages, cfg, cfg.deterministic));
  for (const auto& s : stages)
    if (s.result.status != "ok") return 2;
  // A line search that fails before any accepted step is a dead end. Later
  // failures just mean the iterate stopped improving in float64.
  for (const auto& s : stages)
    if (s.stop_reason == to_string(StopReason::LineSearchFailure) && s.result.iterations == 0) {
      std::cout << to_string(s.result.method) << ": line search failed at the initial point\n";
      return 2;
    }
  return 0;
}

int run_solve(const Invocation& inv, const ExperimentConfig& cfg, const fs::path& out) {
  GridField control = GridField::zeros(FieldKind::Control, cfg.grid);
  if (!inv.zero_control) {
    if (inv.control_path.empty())
      throw InvalidArgument("solve needs --zero-control or --control <file>");
    control = read_field(inv.control_path, FieldKind::Control);
    if (!control.matches(cfg.grid)) throw InvalidArgument("control does not match the grid");
  }
  const auto traj = solve_state(control, cfg.spec, cfg.grid);
  write_csv(out / "state.csv", traj.snapshots, cfg.grid);
  write_binary(out / "state.bin", traj.snapshots);
  const auto rect = objective(traj, control, cfg.spec, cfg.grid);
  const auto trap = trapezoid_objective(traj, control, cfg.spec, cfg.grid);
  nlohmann::ordered_json j;
  j["rectangle"] = {{"J_T", rect.j_terminal}, {"J_Q", rect.j_control}, {"J", rect.j_total}};
  j["trapezoid"] = {{"J_T", trap.j_terminal}, {"J_Q", trap.j_control}, {"J", trap.j_total}};
  write_text(out / "objective.json", j.dump(2) + "\n");
  std::cout << "solve: J_rect=" << rect.j_total << " J_trap=" << trap.j_total << "\n";
  return 0;
}

int run_adjoint(const ExperimentConfig& cfg, const fs::path& out) {
  const auto ref = load_reference(cfg);
  GridField init = GridField::zeros(FieldKind::Control, cfg.grid);
  Method method = Method::AdjointScratch;
  if (!cfg.init_control_path.empty()) {
    init = read_field(cfg.init_control_path, FieldKind::Control);
    if (!init.matches(cfg.grid)) throw InvalidArgument("initial control does not match the grid");
    method = Method::AdjointFromPinn;
  }
  auto stage = run_adjoint_stage(method, init, cfg, ref ? &*ref : nullptr);
  return finish_stages(out, {stage}, cfg);
}

int run_pinn(Formulation f, const ExperimentConfig& cfg, const fs::path& out) {
  const auto ref = load_reference(cfg);
  auto local = cfg;
  local.pinn.progress = &std::cout;
  auto stage = run_pinn_stage(f, local, ref ? &*ref : nullptr);
  return finish_stages(out, {stage}, cfg);
}

int run_evaluate(const Invocation& inv, const ExperimentConfig& cfg, const fs::path& out) {
  if (inv.control_path.empty()) throw InvalidArgument("evaluate needs --control <file>");
  const auto control = read_field(inv.control_path, FieldKind::Control);
  const auto ref = load_reference(cfg);
  std::optional<MlpParams> state_net;
  if (!inv.state_params_path.empty()) state_net = read_params(inv.state_params_path);
  StageRun s;
  s.result = evaluate_method(state_net ? Method::DirectPinn : Method::AdjointScratch, control,
                             state_net ? &*state_net : nullptr, ref ? &*ref : nullptr, cfg.spec,
                             cfg.grid);
  return finish_stages(out, {s}, cfg);
}

int run_compare(const ExperimentConfig& cfg, const fs::path& out) {
  auto local = cfg;
  local.pinn.progress = &std::cout;
  return finish_stages(out, run_comparison(local), cfg);
}

int run_check_gradients(const ExperimentConfig& cfg, bool coarse) {
  double adj_worst = 0.0;
  if (coarse) {
    for (auto [n, m] : {std::pair<std::size_t, std::size_t>{9, 3}, {17, 5}, {33, 10}})
      for (std::uint64_t s = 0; s < 5; ++s) {
        const auto r = check_adjoint_gradient(n, m, cfg.seed + s);
        adj_worst = std::max({adj_worst, r.max_directional, r.max_component});
      }
  } else {
    const auto r = check_adjoint_gradient(cfg.grid.n_space, cfg.grid.n_time, cfg.seed);
    adj_worst = std::max(r.max_directional, r.max_component);
  }
  double mlp_worst = 0.0;
  for (auto f : {Formulation::Direct, Formulation::Indirect}) {
    const auto r = check_pinn_gradient(f, 10, cfg.seed);
    mlp_worst = std::max({mlp_worst, r.max_directional, r.max_component});
  }
  std::cout << "adjoint_vs_fd max_rel_err=" << adj_worst << "\n"
            << "mlp_loss_vs_fd max_rel_err=" << mlp_worst << "\n";
  const bool ok = adj_worst <= 1e-6 && mlp_worst <= 1e-6;
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

int run_export(const Invocation& inv, const ExperimentConfig& cfg, const fs::path& out) {
  if (inv.params_path.empty()) throw InvalidArgument("export needs --params <file>");
  const auto net = read_params(inv.params_path);
  if (inv.export_kind == "control") {
    const auto u = export_control(net, cfg.grid);
    write_csv(out / "control.csv", u, cfg.grid);
    write_binary(out / "control.bin", u);
  } else if (inv.export_kind == "state") {
    const auto y = sample_state(net, cfg.grid);
    write_csv(out / "state.csv", y, cfg.grid);
    write_binary(out / "state.bin", y);
  } else {
    throw InvalidArgument("--kind must be control or state");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = std::chrono::steady_clock::now();
  keep_large_allocations_resident();
  std::vector<std::string> args(argv, argv + argc);

  CLI::App app{"Allen-Cahn optimal control: discrete adjoint, direct and indirect PINNs"};
  app.set_version_flag("--version", PCL_VERSION);
  app.require_subcommand(1);
  Invocation inv;
  auto add_common = [&](CLI::App* sub) {
    auto& o = inv.common;
    sub->add_option("--config", o.config_path, "INI configuration file");
    sub->add_option("--seed", o.seed, "seed for network init and collocation");
    sub->add_option("--out", o.out_dir, "output directory (fallback: $PCL_OUT_DIR)");
    sub->add_option("--threads", o.threads, "worker threads inside loss kernels")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--deterministic", o.deterministic,
                  "single thread, wall-clock fields written as 0");
    sub->add_flag("--coarse", o.coarse, "test-scale problem (N = 33, N_t = 10)");
    sub->add_option("--reference", o.reference, "reference control file for rel-L2 logging");
    sub->add_option("--init-control", o.init_control, "initial control for the adjoint run");
  };

  auto* solve = app.add_subcommand("solve", "integrate the state equation for one control");
  add_common(solve);
  solve->add_flag("--zero-control", inv.zero_control, "use u = 0");
  solve->add_option("--control", inv.control_path, "control file (.csv or PCL1 binary)");

  auto* adjoint = app.add_subcommand("adjoint", "discrete-adjoint quasi-Newton optimization");
  add_common(adjoint);
  auto* direct = app.add_subcommand("pinn-direct", "train the direct PINN");
  add_common(direct);
  auto* indirect = app.add_subcommand("pinn-indirect", "train the indirect (KKT) PINN");
  add_common(indirect);

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a control on the shared grid");
  add_common(evaluate);
  evaluate->add_option("--control", inv.control_path, "control file")->required();
  evaluate->add_option("--state-params", inv.state_params_path,
                       "state network parameters to compare against the solver");

  auto* compare = app.add_subcommand("compare", "run all four methods and compare");
  add_common(compare);
  auto* check = app.add_subcommand("check-gradients", "finite-difference gradient checks");
  add_common(check);
  auto* exporter = app.add_subcommand("export", "sample a network on the grid");
  add_common(exporter);
  exporter->add_option("--params", inv.params_path, "network parameter file")->required();
  exporter->add_option("--kind", inv.export_kind, "control | state");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  inv.subcommand = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    cfg = effective_config(inv.common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  int code = 0;
  fs::path out;
  try {
    if (inv.subcommand != "check-gradients") out = output_dir(inv.common);
    if (inv.subcommand == "solve") code = run_solve(inv, cfg, out);
    else if (inv.subcommand == "adjoint") code = run_adjoint(cfg, out);
    else if (inv.subcommand == "pinn-direct") code = run_pinn(Formulation::Direct, cfg, out);
    else if (inv.subcommand == "pinn-indirect") code = run_pinn(Formulation::Indirect, cfg, out);
    else if (inv.subcommand == "evaluate") code = run_evaluate(inv, cfg, out);
    else if (inv.subcommand == "compare") code = run_compare(cfg, out);
    else if (inv.subcommand == "check-gradients") code = run_check_gradients(cfg, inv.common.coarse);
    else if (inv.subcommand == "export") code = run_export(inv, cfg, out);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    code = 2;
  }
  if (!out.empty()) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
      write_manifest(out, inv, cfg, args, wall, code);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      if (code == 0) code = 1;
    }
  }
  return code;
}
