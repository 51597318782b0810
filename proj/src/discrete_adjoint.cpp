#include "pcl/discrete_adjoint.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pcl/errors.hpp"
#include "pcl/evaluation.hpp"

namespace pcl {

namespace {

// out = J(v)^T w = nu L^T w - f'(v) .* w
void rhs_jacobian_transpose(std::span<const double> v, std::span<const double> w,
                            const ProblemSpec& spec, double dx, std::span<double> out) {
  laplacian_neumann_transpose(w, dx, out);
  const double nu = spec.diffusion();
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = nu * out[i] - spec.reaction.derivative(v[i]) * w[i];
}

}  // namespace

StepAdjoint rk4_step_adjoint(std::span<const double> y, std::span<const double> u,
                             std::span<const double> incoming, const ProblemSpec& spec,
                             const GridSpec& grid, double h) {
  const std::size_t n = y.size();
  if (u.size() != n || incoming.size() != n)
    throw InvalidArgument("rk4_step_adjoint: length mismatch");
  const double dx = grid.dx;

  // Forward stages.
  std::vector<double> k1(n), k2(n), k3(n), y2(n), y3(n), y4(n);
  state_rhs(y, u, spec, dx, k1);
  for (std::size_t i = 0; i < n; ++i) y2[i] = y[i] + 0.5 * h * k1[i];
  state_rhs(y2, u, spec, dx, k2);
  for (std::size_t i = 0; i < n; ++i) y3[i] = y[i] + 0.5 * h * k2[i];
  state_rhs(y3, u, spec, dx, k3);
  for (std::size_t i = 0; i < n; ++i) y4[i] = y[i] + h * k3[i];

  // Reverse sweep. bar_k_j is the costate of stage slope k_j.
  StepAdjoint out{std::vector<double>(incoming.begin(), incoming.end()),
                  std::vector<double>(n, 0.0)};
  auto& ybar = out.costate;
  auto& ubar = out.control_sensitivity;
  std::vector<double> kbar(n), stage_bar(n);

  // k4 = F(y4), y4 = y + h k3
  for (std::size_t i = 0; i < n; ++i) kbar[i] = h / 6.0 * incoming[i];
  rhs_jacobian_transpose(y4, kbar, spec, dx, stage_bar);
  for (std::size_t i = 0; i < n; ++i) {
    ubar[i] += kbar[i];
    ybar[i] += stage_bar[i];
    kbar[i] = h / 3.0 * incoming[i] + h * stage_bar[i];  // bar k3
  }
  // k3 = F(y3), y3 = y + h/2 k2
  rhs_jacobian_transpose(y3, kbar, spec, dx, stage_bar);
  for (std::size_t i = 0; i < n; ++i) {
    ubar[i] += kbar[i];
    ybar[i] += stage_bar[i];
    kbar[i] = h / 3.0 * incoming[i] + 0.5 * h * stage_bar[i];  // bar k2
  }
  // k2 = F(y2), y2 = y + h/2 k1
  rhs_jacobian_transpose(y2, kbar, spec, dx, stage_bar);
  for (std::size_t i = 0; i < n; ++i) {
    ubar[i] += kbar[i];
    ybar[i] += stage_bar[i];
    kbar[i] = h / 6.0 * incoming[i] + 0.5 * h * stage_bar[i];  // bar k1
  }
  // k1 = F(y)
  rhs_jacobian_transpose(y, kbar, spec, dx, stage_bar);
  for (std::size_t i = 0; i < n; ++i) {
    ubar[i] += kbar[i];
    ybar[i] += stage_bar[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(ybar[i]) || !std::isfinite(ubar[i]))
      throw NonFiniteObjective("rk4_step_adjoint: non-finite costate");
  return out;
}

StepAdjoint slab_adjoint(std::span<const double> y, std::span<const double> u,
                         std::span<const double> incoming, const ProblemSpec& spec,
                         const GridSpec& grid) {
  const double h = grid.inner_step();
  const std::size_t n = y.size();
  std::vector<std::vector<double>> substates;
  substates.reserve(grid.substeps);
  substates.emplace_back(y.begin(), y.end());
  for (std::size_t s = 1; s < grid.substeps; ++s)
    substates.push_back(rk4_step(substates.back(), u, spec, grid, h));

  StepAdjoint acc{std::vector<double>(incoming.begin(), incoming.end()),
                  std::vector<double>(n, 0.0)};
  for (std::size_t s = grid.substeps; s-- > 0;) {
    auto step = rk4_step_adjoint(substates[s], u, acc.costate, spec, grid, h);
    acc.costate = std::move(step.costate);
    for (std::size_t i = 0; i < n; ++i) acc.control_sensitivity[i] += step.control_sensitivity[i];
  }
  const double running = spec.beta_control * grid.dx * grid.dt;
  for (std::size_t i = 0; i < n; ++i) acc.control_sensitivity[i] += running * u[i];
  return acc;
}

GradientResult gradient(const GridField& control, const ProblemSpec& spec, const GridSpec& grid) {
  GradientResult out{GridField::zeros(FieldKind::Control, grid),
                     GridField::zeros(FieldKind::Adjoint, grid),
                     {},
                     solve_state(control, spec, grid)};
  out.objective = objective(out.trajectory, control, spec, grid);

  // dJ_T / dY^{N_t}
  auto terminal = out.costates.column(grid.n_time);
  const auto final_state = out.trajectory.snapshots.column(grid.n_time);
  for (std::size_t i = 0; i < grid.n_space; ++i)
    terminal[i] =
        spec.beta_terminal * grid.dx * (final_state[i] - spec.target_state(grid.x(i)));

  for (std::size_t n = grid.n_time; n-- > 0;) {
    auto step = slab_adjoint(out.trajectory.snapshots.column(n), control.column(n),
                             out.costates.column(n + 1), spec, grid);
    std::copy(step.costate.begin(), step.costate.end(), out.costates.column(n).begin());
    std::copy(step.control_sensitivity.begin(), step.control_sensitivity.end(),
              out.gradient.column(n).begin());
  }
  return out;
}

AdjointRun optimize_adjoint(const GridField& initial_control, const ProblemSpec& spec,
                            const GridSpec& grid, const QuasiNewtonConfig& cfg,
                            const GridField* reference) {
  if (!initial_control.matches(grid) || initial_control.kind() != FieldKind::Control)
    throw InvalidArgument("optimize_adjoint: initial control has the wrong shape");
  if (reference && !reference->matches(grid))
    throw InvalidArgument("optimize_adjoint: reference control has the wrong shape");

  const auto size = static_cast<Eigen::Index>(initial_control.size());
  auto to_field = [&](const Eigen::VectorXd& x) {
    GridField u = GridField::zeros(FieldKind::Control, grid);
    std::copy(x.data(), x.data() + size, u.flat().begin());
    return u;
  };

  Objective f = [&](const Eigen::VectorXd& x) {
    Evaluation e;
    try {
      auto g = gradient(to_field(x), spec, grid);
      e.value = g.objective.j_total;
      e.gradient = Eigen::Map<const Eigen::VectorXd>(g.gradient.flat().data(), size);
      e.terms = {g.objective.j_terminal, g.objective.j_control};
    } catch (const BlowUpError&) {
      e.value = std::numeric_limits<double>::infinity();
      e.gradient = Eigen::VectorXd::Constant(size, std::numeric_limits<double>::quiet_NaN());
      e.terms = {e.value, e.value};
    }
    return e;
  };

  AdjointRun run;
  run.record.method = "adjoint/" + cfg.variant_name();
  run.record.term_names = {"j_terminal", "j_control"};

  QuasiNewtonLog log;
  log.record = &run.record;
  log.phase = "adjoint";
  if (reference) {
    log.monitor = [&](const Eigen::VectorXd& x) -> std::optional<double> {
      return rel_l2(to_field(x), *reference, grid);
    };
  }

  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(initial_control.flat().data(), size);
  QuasiNewtonState state;
  const std::size_t epochs = std::max<std::size_t>(1, cfg.outer_epochs);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    log.epoch = epoch + 1;
    log.iter_offset = run.iterations;
    auto result = quasi_newton_minimize(f, x, cfg, &state, log);
    x = result.x;
    run.iterations += result.iterations;
    run.evaluations += result.evaluations;
    run.reason = result.reason;
    if (result.reason != StopReason::IterationBudget) break;
  }
  run.control = to_field(x);
  return run;
}

}  // namespace pcl
