#include "pcl/evaluation.hpp"

#include <cmath>

#include "pcl/errors.hpp"

namespace pcl {

std::vector<double> space_time_weights(FieldKind kind, const GridSpec& grid) {
  const auto wx = trapezoid_weights(grid);
  const std::size_t cols = kind == FieldKind::Control ? grid.n_time : grid.n_time + 1;
  std::vector<double> w(grid.n_space * cols);
  for (std::size_t n = 0; n < cols; ++n) {
    double wt = grid.dt;
    if (kind != FieldKind::Control && (n == 0 || n == grid.n_time)) wt *= 0.5;
    for (std::size_t i = 0; i < grid.n_space; ++i) w[n * grid.n_space + i] = wx[i] * wt;
  }
  return w;
}

double rel_l2(const GridField& a, const GridField& b, const GridSpec& grid) {
  if (a.n_space() != b.n_space() || a.n_cols() != b.n_cols() || !b.matches(grid))
    throw InvalidArgument("rel_l2: fields do not share the grid shape");
  const auto w = space_time_weights(b.kind(), grid);
  const auto fa = a.flat();
  const auto fb = b.flat();
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double d = fa[k] - fb[k];
    num += w[k] * d * d;
    den += w[k] * fb[k] * fb[k];
  }
  if (den == 0.0) throw ZeroReference("rel_l2: reference field is zero");
  return std::sqrt(num) / std::sqrt(den);
}

GridField export_control(const MlpParams& control_net, const GridSpec& grid) {
  auto u = GridField::zeros(FieldKind::Control, grid);
  for (std::size_t n = 0; n < grid.n_time; ++n)
    for (std::size_t i = 0; i < grid.n_space; ++i) u(i, n) = forward(control_net, grid.x(i), grid.t(n));
  return u;
}

GridField sample_state(const MlpParams& state_net, const GridSpec& grid) {
  auto y = GridField::zeros(FieldKind::State, grid);
  for (std::size_t n = 0; n <= grid.n_time; ++n)
    for (std::size_t i = 0; i < grid.n_space; ++i) y(i, n) = forward(state_net, grid.x(i), grid.t(n));
  return y;
}

std::vector<double> snapshot_errors(const GridField& a, const GridField& b, const GridSpec& grid) {
  if (a.n_space() != b.n_space() || a.n_cols() != b.n_cols() || a.n_space() != grid.n_space)
    throw InvalidArgument("snapshot_errors: shape mismatch");
  const auto wx = trapezoid_weights(grid);
  std::vector<double> out(a.n_cols());
  for (std::size_t n = 0; n < a.n_cols(); ++n) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < grid.n_space; ++i) {
      const double d = a(i, n) - b(i, n);
      num += wx[i] * d * d;
      den += wx[i] * b(i, n) * b(i, n);
    }
    out[n] = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  }
  return out;
}

double max_total_variation_x(const GridField& control) {
  double best = 0.0;
  for (std::size_t n = 0; n < control.n_cols(); ++n) {
    double tv = 0.0;
    for (std::size_t i = 1; i < control.n_space(); ++i) tv += std::abs(control(i, n) - control(i - 1, n));
    best = std::max(best, tv);
  }
  return best;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::AdjointScratch: return "adjoint_scratch";
    case Method::DirectPinn: return "direct_pinn";
    case Method::IndirectPinn: return "indirect_pinn";
    case Method::AdjointFromPinn: return "adjoint_from_pinn";
  }
  return "unknown";
}

MethodResult evaluate_method(Method method, const GridField& control,
                             const MlpParams* state_net, const GridField* reference,
                             const ProblemSpec& spec, const GridSpec& grid) {
  if (!control.matches(grid) || control.kind() != FieldKind::Control)
    throw InvalidArgument("evaluate_method: control does not match the grid");
  MethodResult r;
  r.method = method;
  r.control = control;
  r.solver_state = solve_state(control, spec, grid);
  r.objective_rect = objective(r.solver_state, control, spec, grid);
  r.objective_trap = trapezoid_objective(r.solver_state, control, spec, grid);
  if (reference) r.rel_l2_u_vs_reference = rel_l2(control, *reference, grid);
  if (state_net) {
    r.net_state = StateTrajectory{sample_state(*state_net, grid), grid};
    r.snapshot_errors = snapshot_errors(r.net_state->snapshots, r.solver_state.snapshots, grid);
  }
  const auto last = grid.n_time - 1;
  for (std::size_t i = 0; i < grid.n_space; ++i)
    r.terminal_identity =
        std::max(r.terminal_identity, std::abs(r.solver_state.snapshots(i, grid.n_time) +
                                               spec.beta_control * control(i, last)));
  r.tv_x = max_total_variation_x(control);
  return r;
}

}  // namespace pcl
