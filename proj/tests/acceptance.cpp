// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any evaluated criterion fails.

#include <CLI11.hpp>
#include <json.hpp>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "pcl/comparison.hpp"
#include "pcl/config.hpp"
#include "pcl/discrete_adjoint.hpp"
#include "pcl/evaluation.hpp"
#include "pcl/fd_solver.hpp"
#include "pcl/mlp.hpp"
#include "pcl/parallel.hpp"
#include "pcl/pinn_losses.hpp"
#include "pcl/training.hpp"

namespace fs = std::filesystem;
using namespace pcl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class Phi>
double central_difference(const Phi& phi, double h) {
  return (phi(-2.0 * h) - 8.0 * phi(-h) + 8.0 * phi(h) - phi(2.0 * h)) / (12.0 * h);
}

double rel_err(double a, double b) {
  const double den = std::max(std::abs(a), std::abs(b));
  return den == 0.0 ? 0.0 : std::abs(a - b) / den;
}

// Quadrature-weighted relative L2 error of two controls, written out directly.
double control_rel_l2(const GridField& a, const GridField& b, const GridSpec& g) {
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < a.n_cols(); ++n)
    for (std::size_t i = 0; i < a.n_space(); ++i) {
      const double w = ((i == 0 || i + 1 == a.n_space()) ? 0.5 : 1.0) * g.dx * g.dt;
      num += w * (a(i, n) - b(i, n)) * (a(i, n) - b(i, n));
      den += w * b(i, n) * b(i, n);
    }
  return std::sqrt(num / den);
}

// Forward oracle in extended precision: Neumann ghost points, one RK4 step per
// slab, rectangle-rule objective, y0 = cos(pi x), yd = 0, f(y) = y^3 - y.
long double oracle_objective(const GridField& u, const ProblemSpec& spec, const GridSpec& g) {
  const std::size_t n = g.n_space;
  const long double dx = g.dx, dt = g.dt, nu = spec.diffusion();
  const long double pi = 3.141592653589793238462643383279502884L;
  using Vec = std::vector<long double>;
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = std::cos(pi * static_cast<long double>(i) * dx);
  auto rhs = [&](const Vec& v, std::size_t m) {
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const long double l = i == 0 ? v[1] : v[i - 1], r = i + 1 == n ? v[n - 2] : v[i + 1];
      out[i] = nu * (l - 2 * v[i] + r) / (dx * dx) - v[i] * v[i] * v[i] + v[i] + u(i, m);
    }
    return out;
  };
  auto axpy = [&](const Vec& a, long double c, const Vec& b) {
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + c * b[i];
    return out;
  };
  for (std::size_t m = 0; m < g.n_time; ++m) {
    const Vec k1 = rhs(y, m), k2 = rhs(axpy(y, dt / 2, k1), m), k3 = rhs(axpy(y, dt / 2, k2), m),
              k4 = rhs(axpy(y, dt, k3), m);
    for (std::size_t i = 0; i < n; ++i) y[i] += dt * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) / 6;
  }
  long double jt = 0, jq = 0;
  for (auto v : y) jt += v * v;
  for (double v : u.flat()) jq += static_cast<long double>(v) * v;
  return 0.5L * spec.beta_terminal * dx * jt + 0.5L * spec.beta_control * dx * dt * jq;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
  std::cout << "criterion " << id << " [" << title << "]: " << (o.pass ? "PASS" : "FAIL") << "  "
            << o.detail << std::endl;
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Discrete-adjoint gradient against central differences of the forward
// objective on three coarse grids, five seeds each.
Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  const auto base = default_allen_cahn();
  double worst = 0.0, worst_match = 0.0;
  for (auto [n_space, n_time] : {std::pair<std::size_t, std::size_t>{9, 3}, {17, 5}, {33, 10}}) {
    const auto grid = GridSpec::uniform(n_space, n_time, base.spec.horizon, 1);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      std::mt19937_64 rng(1000 + seed);
      std::uniform_real_distribution<double> d(-1.0, 1.0);
      GridField u = GridField::zeros(FieldKind::Control, grid), dir = u;
      for (auto& v : u.flat()) v = d(rng);
      for (auto& v : dir.flat()) v = d(rng);
      const auto g = gradient(u, base.spec, grid);
      worst_match = std::max(worst_match, rel_err(g.objective.j_total,
                                                   static_cast<double>(oracle_objective(u, base.spec, grid))));
      auto j_along = [&](const GridField& e) {
        return [&, e](double h) {
          GridField w = u;
          for (std::size_t k = 0; k < w.size(); ++k) w.flat()[k] += h * e.flat()[k];
          return oracle_objective(w, base.spec, grid);
        };
      };
      double gd = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) gd += g.gradient.flat()[k] * dir.flat()[k];
      worst = std::max(worst, rel_err(gd, central_difference(j_along(dir), 3e-4)));
      std::uniform_int_distribution<std::size_t> pick(0, u.size() - 1);
      for (int c = 0; c < 20; ++c) {
        const std::size_t k = pick(rng);
        GridField e = GridField::zeros(FieldKind::Control, grid);
        e.flat()[k] = 1.0;
        worst = std::max(worst, rel_err(g.gradient.flat()[k], central_difference(j_along(e), 3e-4)));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && worst_match <= 1e-13 && secs <= 30.0,
          "max rel err " + fmt("%.2e", worst) + " (tol 1e-6), oracle J agrees to " +
              fmt("%.1e", worst_match) + ", " + fmt("%.2f", secs) + " s (limit 30 s)"};
}

// 2. Network jets against finite differences, and the parameter gradients of
// both full losses on a 10-point collocation set.
Outcome mlp_oracle() {
  const auto t0 = Clock::now();
  const auto s = default_allen_cahn();
  auto perturbed = [](std::uint64_t seed) {
    auto p = init_params(MlpArchitecture{}, seed);
    std::mt19937_64 rng(seed + 500);
    std::uniform_real_distribution<double> d(-0.15, 0.15);
    for (auto& v : p.flat) v += d(rng);
    return p;
  };
  double worst1 = 0.0, worst2 = 0.0;
  const auto net = perturbed(21);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> ux(0.02, 0.98), ut(0.05, 2.95);
  const double h = 1e-3;
  for (int k = 0; k < 50; ++k) {
    const double x = ux(rng), t = ut(rng);
    const auto j = jet(net, x, t);
    auto fx = [&](double d) { return forward(net, x + d, t); };
    auto ft = [&](double d) { return forward(net, x, t + d); };
    const double h2 = 3 * h;  // d_xx can be small next to the field value
    const double fxx =
        (-fx(2 * h2) + 16 * fx(h2) - 30 * fx(0) + 16 * fx(-h2) - fx(-2 * h2)) / (12 * h2 * h2);
    worst1 = std::max({worst1, rel_err(j.d_x, central_difference(fx, h)),
                       rel_err(j.d_t, central_difference(ft, h))});
    worst2 = std::max(worst2, rel_err(j.d_xx, fxx));
  }

  auto c = sample_collocation(s.grid, s.spec, 10, 10, 23);
  c.initial_xs.clear();
  for (std::size_t k = 0; k < 10; ++k) c.initial_xs.push_back(s.grid.x(k * 51 + 7));
  c.terminal_xs = c.initial_xs;
  const auto y = perturbed(31), u = perturbed(32);
  double worst_grad = 0.0;
  for (int form = 0; form < 2; ++form) {
    auto loss = [&](const MlpParams& a, const MlpParams& b, std::vector<Eigen::VectorXd>* g) {
      return form == 0 ? direct_loss(a, b, c, s.spec, s.weights, g)
                       : indirect_loss(a, b, c, s.spec, s.weights, g);
    };
    std::vector<Eigen::VectorXd> grads;
    loss(y, u, &grads);
    for (int which = 0; which < 2; ++which)
      for (Eigen::Index k = 0; k < y.flat.size(); ++k) {
        const double fd = central_difference(
            [&](double d) {
              MlpParams a = y, b = u;
              (which == 0 ? a : b).flat[k] += d;
              return loss(a, b, nullptr).total;
            },
            1e-3);
        worst_grad = std::max(worst_grad, rel_err(grads[which][k], fd));
      }
  }
  const double secs = seconds_since(t0);
  return {worst1 <= 1e-8 && worst2 <= 1e-6 && worst_grad <= 1e-6 && secs <= 60.0,
          "jet d_x/d_t " + fmt("%.2e", worst1) + " (tol 1e-8), d_xx " + fmt("%.2e", worst2) +
              " (tol 1e-6), loss gradients " + fmt("%.2e", worst_grad) + " (tol 1e-6), " +
              fmt("%.1f", secs) + " s (limit 60 s)"};
}

// 3. Observed temporal order of the uncontrolled solve.
Outcome rk4_order() {
  const auto t0 = Clock::now();
  const auto s = default_allen_cahn();
  auto final_state = [&](std::size_t n_space, std::size_t n_time, std::size_t substeps) {
    const auto g = GridSpec::uniform(n_space, n_time, s.spec.horizon, substeps);
    const auto traj = solve_state(GridField::zeros(FieldKind::Control, g), s.spec, g);
    const auto col = traj.snapshots.column(g.n_time);
    return std::vector<double>(col.begin(), col.end());
  };
  auto orders = [&](auto run) {
    const auto ref = run(32);
    std::vector<double> errs;
    for (std::size_t m : {1, 2, 4}) {
      const auto y = run(m);
      double e = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) e = std::max(e, std::abs(y[i] - ref[i]));
      errs.push_back(e);
    }
    return std::pair{std::log2(errs[0] / errs[1]), std::log2(errs[1] / errs[2])};
  };
  // Steps 0.05, 0.025, 0.0125 where a single step of 0.05 is stable (N = 33),
  // and on the default grid, where it is not, 0.025, 0.0125, 0.00625.
  const auto [a1, a2] = orders([&](std::size_t m) { return final_state(33, 60 * m, 1); });
  const auto [b1, b2] = orders([&](std::size_t m) { return final_state(513, 60, 2 * m); });
  const double lo = std::min({a1, a2, b1, b2});
  const double secs = seconds_since(t0);
  return {lo >= 3.5 && secs <= 10.0,
          "N=33 dt 0.05/0.025/0.0125: " + fmt("%.3f", a1) + ", " + fmt("%.3f", a2) +
              "; N=513 dt 0.025/0.0125/0.00625: " + fmt("%.3f", b1) + ", " + fmt("%.3f", b2) +
              " (min 3.5), " + fmt("%.1f", secs) + " s (limit 10 s)"};
}

// 4. Default architecture size.
Outcome parameter_count() {
  const MlpArchitecture arch;
  std::size_t expect = 0;
  for (std::size_t l = 0; l + 1 < arch.widths.size(); ++l)
    expect += arch.widths[l] * arch.widths[l + 1] + arch.widths[l + 1];
  const auto n = static_cast<std::size_t>(init_params(arch, 1).flat.size());
  return {n == 1185 && expect == 1185 && arch.parameter_count() == 1185,
          "flat length " + std::to_string(n) + " (expected 1185)"};
}

// 8. beta_Q U - Lambda vanishes bitwise at every evaluated point.
Outcome stationarity() {
  const auto s = default_allen_cahn();
  std::size_t points = 0, nonzero = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = sample_collocation(s.grid, s.spec, 20000, 512, seed);
    const auto v = indirect_point_values(init_params(MlpArchitecture{}, 3 * seed),
                                         init_params(MlpArchitecture{}, 3 * seed + 1), c, s.spec);
    for (std::size_t k = 0; k < v.control.size(); ++k, ++points)
      if (s.spec.beta_control * v.control[k] - v.adjoint[k] != 0.0) ++nonzero;
  }
  return {nonzero == 0 && points == 100000,
          std::to_string(nonzero) + " nonzero residuals over " + std::to_string(points) + " points"};
}

// 9. Quadrature examples on the default grid.
Outcome quadrature() {
  const auto s = default_allen_cahn();
  StateTrajectory traj{GridField::zeros(FieldKind::State, s.grid), s.grid};
  for (auto& v : traj.snapshots.column(s.grid.n_time)) v = 1.0;
  const auto zero_u = GridField::zeros(FieldKind::Control, s.grid);
  const double jt = objective(traj, zero_u, s.spec, s.grid).j_terminal;
  const GridField ones(FieldKind::Control, s.grid.n_space, s.grid.n_time, 1.0);
  const auto zero_traj = StateTrajectory{GridField::zeros(FieldKind::State, s.grid), s.grid};
  const double jc = trapezoid_objective(zero_traj, ones, s.spec, s.grid).j_control;
  const double e1 = std::abs(jt - 513.0 / 1024.0) / (513.0 / 1024.0);
  const double e2 = std::abs(jc - 1.5e-3) / 1.5e-3;
  return {e1 <= 1e-15 && e2 <= 1e-15, "j_terminal rel err " + fmt("%.1e", e1) +
                                          ", j_control(trap) rel err " + fmt("%.1e", e2) +
                                          " (tol 1e-15)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10. Two deterministic coarse comparisons produce identical files.
Outcome determinism(const std::string& pclctl) {
  const auto root = fs::temp_directory_path() / ("pcl_acceptance_det_" + std::to_string(::getpid()));
  fs::remove_all(root);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = pclctl + " compare --coarse --deterministic --seed 7 --out '" +
                            (root / run).string() + "' > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
      return {false, std::string("compare run ") + run + " failed"};
  }
  std::size_t compared = 0, differing = 0;
  std::set<std::string> names;
  for (const char* run : {"a", "b"})
    for (const auto& e : fs::recursive_directory_iterator(root / run))
      if (e.is_regular_file() && e.path().filename() != "manifest.json")
        names.insert(fs::relative(e.path(), root / run).string());
  bool saw_summary = false, saw_csv = false;
  for (const auto& n : names) {
    ++compared;
    if (!fs::exists(root / "a" / n) || !fs::exists(root / "b" / n) ||
        slurp(root / "a" / n) != slurp(root / "b" / n))
      ++differing;
    saw_summary |= n == "summary.json";
    saw_csv |= n.ends_with(".csv");
  }
  fs::remove_all(root);
  return {differing == 0 && saw_summary && saw_csv,
          std::to_string(compared) + " files compared (manifest excluded), " +
              std::to_string(differing) + " differ"};
}

// 6. Method ordering from the four controls: both errors against the
// adjoint_from_pinn control, both objectives recomputed on the solver grid.
Outcome ordering(const GridField& scratch, const GridField& direct, const GridField& indirect,
                 const GridField& ref, const ExperimentConfig& cfg, const std::string& scale) {
  const double e_dir = control_rel_l2(direct, ref, cfg.grid);
  const double e_ind = control_rel_l2(indirect, ref, cfg.grid);
  const double j_ref = objective(solve_state(ref, cfg.spec, cfg.grid), ref, cfg.spec, cfg.grid).j_total;
  const double j_scr =
      objective(solve_state(scratch, cfg.spec, cfg.grid), scratch, cfg.spec, cfg.grid).j_total;
  return {e_ind < e_dir && j_ref <= j_scr,
          "rel_l2_u indirect " + fmt("%.4e", e_ind) + " < direct " + fmt("%.4e", e_dir) +
              "; J(adjoint_from_pinn) " + fmt("%.6e", j_ref) + " <= J(adjoint_scratch) " +
              fmt("%.6e", j_scr) + " (" + scale + ")"};
}

Outcome desk_ordering() {
  const auto t0 = Clock::now();
  auto cfg = default_config();
  cfg.pinn.n_int = 5000;
  cfg.pinn.n_validation = 5000;
  cfg.pinn.qn.outer_epochs = 10;
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  cfg.sync();
  const auto stages = run_comparison(cfg);
  auto find = [&](Method m) -> const GridField* {
    for (const auto& s : stages)
      if (s.result.method == m && s.result.status == "ok") return &s.result.control;
    return nullptr;
  };
  const auto *scratch = find(Method::AdjointScratch), *direct = find(Method::DirectPinn),
             *indirect = find(Method::IndirectPinn), *ref = find(Method::AdjointFromPinn);
  if (!scratch || !direct || !indirect || !ref) return {false, "a comparison stage failed"};
  return ordering(*scratch, *direct, *indirect, *ref, cfg,
                  "desk scale: N_int 5000, 10 epochs, " + fmt("%.0f", seconds_since(t0)) + " s");
}

// 5 and 7 from a full-size comparison directory: the indirect networks and the
// controls are reloaded and the quantities recomputed here.
struct PaperOutcomes {
  Outcome c5, c6, c7;
};

// Opt-in variant whose full-size run is reported for information only.
ExperimentConfig adaptive_config() {
  auto cfg = default_config();
  cfg.pinn.qn.memory = 0;
  cfg.pinn.qn.adaptive_broyden = true;
  return cfg;
}

PaperOutcomes paper_scale(const fs::path& dir, ExperimentConfig cfg = default_config(),
                          const std::string& expected = "the default configuration") {
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  cfg.seed = summary.at("seed").get<std::uint64_t>();
  cfg.sync();
  // The recorded config text must hash to the summary's digest and, read by
  // the current loader (keys added since default), must equal `cfg`.
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  const auto text = manifest.at("config").get<std::string>();
  const fs::path copy = fs::temp_directory_path() / "pcl_acceptance_run_config.ini";
  { std::ofstream(copy) << text; }
  auto recorded = load_config(copy, default_config());
  const auto qn_name = recorded.pinn.qn.variant_name();
  fs::remove(copy);
  recorded.threads = cfg.threads;
  recorded.deterministic = cfg.deterministic;
  recorded.sync();
  if (summary.at("config_sha256") != sha256_hex(text) ||
      dump_config(recorded) != dump_config(cfg)) {
    const Outcome bad{false, "run in " + dir.string() + " does not use " + expected};
    return {bad, bad, bad};
  }
  const auto state = read_params(dir / "indirect_pinn" / "params_state.bin");
  const auto control = read_params(dir / "indirect_pinn" / "params_control.bin");
  const auto last = sample_collocation(cfg.grid, cfg.spec, cfg.pinn.n_int, cfg.pinn.n_bc,
                                       cfg.pinn.colloc_seed + cfg.pinn.qn.outer_epochs);
  const auto loss = indirect_loss(state, control, last, cfg.spec, cfg.weights, nullptr,
                                  {std::max(1u, std::thread::hardware_concurrency())});
  const Outcome c5{loss.total <= 1e-7, "final indirect training loss " + fmt("%.3e", loss.total) +
                                           " (tol 1e-7), " + qn_name + ", recomputed from " +
                                           dir.string()};

  const auto u_ind = read_field(dir / "indirect_pinn" / "control.bin", FieldKind::Control);
  const auto u_ref = read_field(dir / "adjoint_from_pinn" / "control.bin", FieldKind::Control);
  const auto u_dir = read_field(dir / "direct_pinn" / "control.bin", FieldKind::Control);
  const auto u_scr = read_field(dir / "adjoint_scratch" / "control.bin", FieldKind::Control);
  const bool exported = u_ind == export_control(control, cfg.grid);
  const double e = control_rel_l2(u_ind, u_ref, cfg.grid);
  const Outcome c7{exported && e <= 5e-2,
                   "rel_l2_u(indirect_pinn) " + fmt("%.4e", e) + " (tol 5e-2)" +
                       (exported ? "" : "; stored control does not match the stored network")};
  return {c5, ordering(u_scr, u_dir, u_ind, u_ref, cfg, "full size, " + dir.string()), c7};
}

}  // namespace

int main(int argc, char** argv) {
  keep_large_allocations_resident();
  CLI::App app{"acceptance checks"};
  std::string pclctl, paper_run, paper_out, adaptive_run;
  bool run_paper = false, skip_desk = false;
  app.add_option("--pclctl", pclctl, "pclctl binary used for the determinism check")->required();
  app.add_option("--paper-run", paper_run, "existing full-size compare output to check");
  app.add_flag("--run-paper", run_paper, "run the full-size comparison now (about an hour or more)");
  app.add_option("--paper-out", paper_out, "output directory for --run-paper");
  app.add_option("--adaptive-run", adaptive_run,
                 "full-size compare with the opt-in adaptive update, reported as info");
  app.add_flag("--skip-desk", skip_desk, "skip the desk-scale method-ordering run");
  CLI11_PARSE(app, argc, argv);

  report(1, "adjoint gradient vs finite differences", gradient_oracle());
  report(2, "network derivatives and loss gradients vs finite differences", mlp_oracle());
  report(3, "RK4 temporal order", rk4_order());
  report(4, "parameter count", parameter_count());

  if (run_paper) {
    if (paper_out.empty()) paper_out = (fs::temp_directory_path() / "pcl_paper_run").string();
    const std::string cmd = pclctl + " compare --deterministic --seed 7 --out '" + paper_out + "'";
    std::cout << "running full-size comparison: " << cmd << std::endl;
    if (std::system(cmd.c_str()) != 0) std::cout << "full-size comparison reported a failure\n";
    paper_run = paper_out;
  }
  // Criterion 6 is judged at full size when a full-size run is available; the
  // desk-scale comparison is then printed for information only.
  if (!paper_run.empty() && fs::exists(fs::path(paper_run) / "summary.json")) {
    const auto paper = paper_scale(paper_run);
    report(5, "indirect training loss at full size", paper.c5);
    report(6, "method ordering", paper.c6);
    report(7, "indirect control accuracy at full size", paper.c7);
    if (!skip_desk) {
      const auto desk = desk_ordering();
      std::cout << "info [method ordering at desk scale]: " << (desk.pass ? "holds" : "does not hold")
                << "  " << desk.detail << std::endl;
    }
  } else {
    std::cout << "criterion 5 [indirect training loss at full size]: NOT RUN (needs --paper-run or --run-paper)\n";
    if (skip_desk) std::cout << "criterion 6 [method ordering]: SKIPPED (--skip-desk)\n";
    else report(6, "method ordering", desk_ordering());
    std::cout << "criterion 7 [indirect control accuracy at full size]: NOT RUN (needs --paper-run or --run-paper)\n";
  }

  if (!adaptive_run.empty() && fs::exists(fs::path(adaptive_run) / "summary.json")) {
    const auto adaptive =
        paper_scale(adaptive_run, adaptive_config(), "the default configuration with the adaptive update");
    const auto info = [](const std::string& what, const Outcome& o) {
      std::cout << "info [" << what << ", adaptive update]: " << (o.pass ? "within" : "outside")
                << " the criterion  " << o.detail << std::endl;
    };
    info("indirect training loss at full size", adaptive.c5);
    info("method ordering", adaptive.c6);
    info("indirect control accuracy at full size", adaptive.c7);
  }

  report(8, "stationarity identity", stationarity());
  report(9, "quadrature examples", quadrature());
  report(10, "deterministic compare", determinism(pclctl));

  std::cout << (failures == 0 ? "ALL EVALUATED CRITERIA PASS" : std::to_string(failures) + " FAILED")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
