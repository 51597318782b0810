#include "pcl/fd_solver.hpp"

#include <cmath>
#include <string>

#include "pcl/errors.hpp"

namespace pcl {

namespace {

void require_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n)
    throw InvalidArgument(std::string(what) + ": expected length " + std::to_string(n) +
                          ", got " + std::to_string(v.size()));
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " contains non-finite values");
}

}  // namespace

void laplacian_neumann(std::span<const double> v, double dx, std::span<double> out) {
  const std::size_t n = v.size();
  if (n < 3) throw InvalidArgument("laplacian_neumann needs at least 3 points");
  require_size(out, n, "laplacian_neumann output");
  const double inv = 1.0 / (dx * dx);
  out[0] = 2.0 * (v[1] - v[0]) * inv;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (v[i - 1] - 2.0 * v[i] + v[i + 1]) * inv;
  out[n - 1] = 2.0 * (v[n - 2] - v[n - 1]) * inv;
}

std::vector<double> laplacian_neumann(std::span<const double> v, double dx) {
  std::vector<double> out(v.size());
  laplacian_neumann(v, dx, out);
  return out;
}

void laplacian_neumann_transpose(std::span<const double> w, double dx, std::span<double> out) {
  const std::size_t n = w.size();
  if (n < 3) throw InvalidArgument("laplacian_neumann_transpose needs at least 3 points");
  require_size(out, n, "laplacian_neumann_transpose output");
  const double inv = 1.0 / (dx * dx);
  // Scatter each row of L into the columns it touches.
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
  out[0] += -2.0 * w[0];
  out[1] += 2.0 * w[0];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i - 1] += w[i];
    out[i] += -2.0 * w[i];
    out[i + 1] += w[i];
  }
  out[n - 2] += 2.0 * w[n - 1];
  out[n - 1] += -2.0 * w[n - 1];
  for (std::size_t j = 0; j < n; ++j) out[j] *= inv;
}

void state_rhs(std::span<const double> y, std::span<const double> u, const ProblemSpec& spec,
               double dx, std::span<double> out) {
  laplacian_neumann(y, dx, out);
  const double nu = spec.diffusion();
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = nu * out[i] - spec.reaction.value(y[i]) + u[i];
}

std::vector<double> rk4_step(std::span<const double> y, std::span<const double> u,
                             const ProblemSpec& spec, const GridSpec& grid, double h) {
  const std::size_t n = y.size();
  require_size(u, n, "rk4_step control");
  check_finite(y, "rk4_step state");
  check_finite(u, "rk4_step control");
  std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n), out(n);
  state_rhs(y, u, spec, grid.dx, k1);
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + 0.5 * h * k1[i];
  state_rhs(stage, u, spec, grid.dx, k2);
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + 0.5 * h * k2[i];
  state_rhs(stage, u, spec, grid.dx, k3);
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + h * k3[i];
  state_rhs(stage, u, spec, grid.dx, k4);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

std::vector<double> rk4_step(std::span<const double> y, std::span<const double> u,
                             const ProblemSpec& spec, const GridSpec& grid) {
  return rk4_step(y, u, spec, grid, grid.dt);
}

std::vector<double> advance_slab(std::span<const double> y, std::span<const double> u,
                                 const ProblemSpec& spec, const GridSpec& grid) {
  std::vector<double> current(y.begin(), y.end());
  const double h = grid.inner_step();
  for (std::size_t s = 0; s < grid.substeps; ++s) current = rk4_step(current, u, spec, grid, h);
  return current;
}

std::vector<double> sample_on_grid(const Profile& profile, const GridSpec& grid) {
  std::vector<double> v(grid.n_space);
  for (std::size_t i = 0; i < grid.n_space; ++i) v[i] = profile(grid.x(i));
  return v;
}

StateTrajectory solve_state(const GridField& control, const ProblemSpec& spec,
                            const GridSpec& grid) {
  if (!control.matches(grid) || control.kind() != FieldKind::Control)
    throw InvalidArgument("solve_state: control must be an N x N_t control field");
  StateTrajectory traj{GridField::zeros(FieldKind::State, grid), grid};
  const auto y0 = sample_on_grid(spec.initial_state, grid);
  std::copy(y0.begin(), y0.end(), traj.snapshots.column(0).begin());
  for (std::size_t n = 0; n < grid.n_time; ++n) {
    std::vector<double> next;
    try {
      next = advance_slab(traj.snapshots.column(n), control.column(n), spec, grid);
    } catch (const InvalidArgument&) {
      throw BlowUpError(n, "state blow-up: non-finite input to step at time index " +
                               std::to_string(n));
    }
    for (double v : next)
      if (!std::isfinite(v))
        throw BlowUpError(n + 1, "state blow-up: non-finite value at time index " +
                                     std::to_string(n + 1));
    std::copy(next.begin(), next.end(), traj.snapshots.column(n + 1).begin());
  }
  return traj;
}

ObjectiveBreakdown objective(const StateTrajectory& traj, const GridField& control,
                             const ProblemSpec& spec, const GridSpec& grid) {
  if (!traj.snapshots.matches(grid) || !control.matches(grid))
    throw InvalidArgument("objective: shape mismatch");
  ObjectiveBreakdown out;
  const auto final_state = traj.snapshots.column(grid.n_time);
  double terminal = 0.0;
  for (std::size_t i = 0; i < grid.n_space; ++i) {
    const double d = final_state[i] - spec.target_state(grid.x(i));
    terminal += d * d;
  }
  double running = 0.0;
  for (double u : control.flat()) running += u * u;
  out.j_terminal = 0.5 * spec.beta_terminal * grid.dx * terminal;
  out.j_control = 0.5 * spec.beta_control * grid.dx * grid.dt * running;
  out.j_total = out.j_terminal + out.j_control;
  return out;
}

std::vector<double> trapezoid_weights(const GridSpec& grid) {
  std::vector<double> w(grid.n_space, grid.dx);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

ObjectiveBreakdown trapezoid_objective(const StateTrajectory& traj, const GridField& control,
                                       const ProblemSpec& spec, const GridSpec& grid) {
  if (!traj.snapshots.matches(grid) || !control.matches(grid))
    throw InvalidArgument("trapezoid_objective: shape mismatch");
  const auto w = trapezoid_weights(grid);
  ObjectiveBreakdown out;
  const auto final_state = traj.snapshots.column(grid.n_time);
  double terminal = 0.0;
  for (std::size_t i = 0; i < grid.n_space; ++i) {
    const double d = final_state[i] - spec.target_state(grid.x(i));
    terminal += w[i] * d * d;
  }
  double running = 0.0;
  for (std::size_t n = 0; n < grid.n_time; ++n) {
    const auto col = control.column(n);
    double slab = 0.0;
    for (std::size_t i = 0; i < grid.n_space; ++i) slab += w[i] * col[i] * col[i];
    running += slab;
  }
  running *= grid.dt;
  out.j_terminal = 0.5 * spec.beta_terminal * terminal;
  out.j_control = 0.5 * spec.beta_control * running;
  out.j_total = out.j_terminal + out.j_control;
  return out;
}

}  // namespace pcl
