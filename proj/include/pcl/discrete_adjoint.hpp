#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pcl/fd_solver.hpp"
#include "pcl/grid_field.hpp"
#include "pcl/optimizers.hpp"
#include "pcl/problem.hpp"
#include "pcl/run_record.hpp"

namespace pcl {

/// Reverse-mode transpose of one RK4 step of size h at (y, u).
struct StepAdjoint {
  std::vector<double> costate;            // d(out)/d(y)^T * incoming
  std::vector<double> control_sensitivity;  // d(out)/d(u)^T * incoming
};

/// Recomputes the four stages from y and propagates `incoming` (the costate
/// of the step's output) back through them.
StepAdjoint rk4_step_adjoint(std::span<const double> y, std::span<const double> u,
                             std::span<const double> incoming, const ProblemSpec& spec,
                             const GridSpec& grid, double h);

/// Transpose of one control slab (grid.substeps RK4 steps) plus the running
/// cost term beta_Q dx dt u_n in the control gradient.
StepAdjoint slab_adjoint(std::span<const double> y, std::span<const double> u,
                         std::span<const double> incoming, const ProblemSpec& spec,
                         const GridSpec& grid);

/// Costates are p^n = dJ/dY^n with respect to the Euclidean inner product on
/// the raw arrays; the continuous adjoint corresponds to lambda ~ -p / dx.
struct GradientResult {
  GridField gradient;  // Control layout, dJ/dU
  GridField costates;  // Adjoint layout, dJ/dY
  ObjectiveBreakdown objective;
  StateTrajectory trajectory;
};

/// Exact gradient of objective(solve_state(U), U) in one forward pass (all
/// snapshots stored) and one backward sweep.
GradientResult gradient(const GridField& control, const ProblemSpec& spec, const GridSpec& grid);

struct AdjointRun {
  GridField control;
  RunRecord record;
  StopReason reason = StopReason::IterationBudget;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
};

/// Minimizes the discrete objective over the flattened control array with the
/// quasi-Newton driver (cfg.max_iters_per_epoch iterations per epoch, for
/// cfg.outer_epochs epochs). When `reference` is given, each logged iterate
/// carries its relative L2 control error.
AdjointRun optimize_adjoint(const GridField& initial_control, const ProblemSpec& spec,
                            const GridSpec& grid, const QuasiNewtonConfig& cfg,
                            const GridField* reference = nullptr);

}  // namespace pcl
