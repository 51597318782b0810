#pragma once

#include <span>
#include <vector>

#include "pcl/grid_field.hpp"
#include "pcl/problem.hpp"

namespace pcl {

/// Forward trajectory on the grid: snapshot n holds Y(., t_n), n = 0..N_t.
struct StateTrajectory {
  GridField snapshots;
  GridSpec grid;
};

/// Discrete objective J = J_T + J_Q.
struct ObjectiveBreakdown {
  double j_terminal = 0.0;
  double j_control = 0.0;
  double j_total = 0.0;
};

/// Centered second difference with Neumann ghost points v_0 := v_2 and
/// v_{N+1} := v_{N-1} eliminated into the boundary rows. Requires N >= 3.
void laplacian_neumann(std::span<const double> v, double dx, std::span<double> out);
std::vector<double> laplacian_neumann(std::span<const double> v, double dx);

/// Transpose of the operator above (it is not symmetric at the boundary rows).
void laplacian_neumann_transpose(std::span<const double> w, double dx, std::span<double> out);

/// Right-hand side nu * L y - f(y) + u of the semi-discrete system.
void state_rhs(std::span<const double> y, std::span<const double> u, const ProblemSpec& spec,
               double dx, std::span<double> out);

/// One classical RK4 step of size h with u held fixed across the four stages.
std::vector<double> rk4_step(std::span<const double> y, std::span<const double> u,
                             const ProblemSpec& spec, const GridSpec& grid, double h);

/// One RK4 step of size grid.dt.
std::vector<double> rk4_step(std::span<const double> y, std::span<const double> u,
                             const ProblemSpec& spec, const GridSpec& grid);

/// Advances one control slab [t_n, t_{n+1}) with grid.substeps RK4 steps.
std::vector<double> advance_slab(std::span<const double> y, std::span<const double> u,
                                 const ProblemSpec& spec, const GridSpec& grid);

std::vector<double> sample_on_grid(const Profile& profile, const GridSpec& grid);

/// Integrates the state equation for a piecewise-constant control. Throws
/// BlowUpError carrying the first time index with a non-finite entry.
StateTrajectory solve_state(const GridField& control, const ProblemSpec& spec,
                            const GridSpec& grid);

/// Rectangle-rule objective, the one the adjoint gradient differentiates:
///   J_T = beta_T/2 dx sum_i (Y_i^{N_t} - yd_i)^2
///   J_Q = beta_Q/2 dx dt sum_{n,i} (U_i^n)^2
ObjectiveBreakdown objective(const StateTrajectory& traj, const GridField& control,
                             const ProblemSpec& spec, const GridSpec& grid);

/// Reporting objective: trapezoidal rule in x. In time the control is
/// piecewise constant, so the per-slab trapezoid is exact (dt * U^n).
ObjectiveBreakdown trapezoid_objective(const StateTrajectory& traj, const GridField& control,
                                       const ProblemSpec& spec, const GridSpec& grid);

/// Trapezoid weights in x (dx, halved at both ends).
std::vector<double> trapezoid_weights(const GridSpec& grid);

}  // namespace pcl
