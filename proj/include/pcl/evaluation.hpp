#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcl/fd_solver.hpp"
#include "pcl/grid_field.hpp"
#include "pcl/mlp.hpp"
#include "pcl/problem.hpp"

namespace pcl {

/// Space-time quadrature weights for a field of the given kind, laid out like
/// GridField::flat(). Control: x-trapezoid times dt per slab. State/Adjoint:
/// x-trapezoid times time-trapezoid over the N_t + 1 snapshots.
std::vector<double> space_time_weights(FieldKind kind, const GridSpec& grid);

/// sqrt(sum w (a - b)^2) / sqrt(sum w b^2). Throws ZeroReference if b is zero
/// and InvalidArgument on a shape mismatch.
double rel_l2(const GridField& a, const GridField& b, const GridSpec& grid);

/// U_i^n = forward(net, x_i, t_n), n = 0..N_t-1: each slab takes the value at
/// its left endpoint.
GridField export_control(const MlpParams& control_net, const GridSpec& grid);

/// Network state sampled at every grid node, n = 0..N_t.
GridField sample_state(const MlpParams& state_net, const GridSpec& grid);

/// Relative L2 discrepancy of `a` against `b` per snapshot, with spatial
/// trapezoid weights. Snapshots where b vanishes report the absolute norm.
std::vector<double> snapshot_errors(const GridField& a, const GridField& b, const GridSpec& grid);

/// max_n sum_i |U_{i+1}^n - U_i^n|
double max_total_variation_x(const GridField& control);

enum class Method { AdjointScratch, DirectPinn, IndirectPinn, AdjointFromPinn };

std::string to_string(Method m);

struct MethodResult {
  Method method = Method::AdjointScratch;
  GridField control;
  StateTrajectory solver_state;  // always recomputed from `control`
  std::optional<StateTrajectory> net_state;
  std::vector<double> snapshot_errors;  // net_state against solver_state
  ObjectiveBreakdown objective_rect;
  ObjectiveBreakdown objective_trap;
  std::optional<double> rel_l2_u_vs_reference;
  /// sup_i |Y_i(T) + beta_Q U_i^{N_t-1}| on the solver state (last slab).
  double terminal_identity = 0.0;
  double tv_x = 0.0;
  double wall_seconds = 0.0;
  std::size_t iterations = 0;
  std::string status = "ok";
};

/// Re-solves the state from `control`, computes both quadratures and, when
/// given, the error against `reference`. With `state_net` the network state is
/// sampled on the grid and compared snapshot by snapshot. Propagates
/// BlowUpError from the solver.
MethodResult evaluate_method(Method method, const GridField& control,
                             const MlpParams* state_net, const GridField* reference,
                             const ProblemSpec& spec, const GridSpec& grid);

}  // namespace pcl
