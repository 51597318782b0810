#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pcl/mlp.hpp"
#include "pcl/parallel.hpp"
#include "pcl/problem.hpp"

namespace pcl {

/// Collocation points for one loss evaluation. Interior points are i.i.d.
/// uniform on (0,1) x (0,T); boundary times uniform on (0,T); initial and
/// terminal samples are the N grid points.
struct CollocationSet {
  std::vector<double> interior_x;
  std::vector<double> interior_t;
  std::vector<double> boundary_times;
  std::vector<double> initial_xs;
  std::vector<double> terminal_xs;
  std::uint64_t seed = 0;

  friend bool operator==(const CollocationSet&, const CollocationSet&) = default;
};

CollocationSet sample_collocation(const GridSpec& grid, const ProblemSpec& spec,
                                  std::size_t n_int, std::size_t n_bc, std::uint64_t seed);

/// Named loss components plus the weighted total.
struct LossBreakdown {
  std::vector<std::pair<std::string, double>> terms;
  double total = 0.0;

  double term(const std::string& name) const;
  std::vector<std::string> names() const;
  std::vector<double> values() const;
};

/// r_y = y_t - nu y_xx + f(y) - u
double state_residual(const FieldJet& state, double control_value, const ProblemSpec& spec);

/// r_lambda = -lambda_t - nu lambda_xx + f'(y) lambda
double adjoint_residual(const FieldJet& state, const FieldJet& adjoint, const ProblemSpec& spec);

/// Adjoint tied to the control network: Lambda = beta_Q U, channel by channel.
/// Makes the stationarity residual beta_Q U - Lambda vanish identically.
FieldJet adjoint_by_construction(const FieldJet& control, double beta_control);

/// Direct loss
///   w_res L_res + w_bc L_bc + w_ic L_ic + beta_T/2 L_T + beta_Q/2 L_u,
/// with L_u = (T / N_int) sum_j U(x_j, t_j)^2 (|Q| = T because |Omega| = 1).
/// Terms: res_y, bc_y, ic_y, terminal_cost, control_cost. When `grads` is
/// non-null it receives {d/d state, d/d control}.
LossBreakdown direct_loss(const MlpParams& state_net, const MlpParams& control_net,
                          const CollocationSet& colloc, const ProblemSpec& spec,
                          const LossWeights& weights, std::vector<Eigen::VectorXd>* grads = nullptr,
                          const Parallelism& par = {});

/// Indirect loss with Lambda = beta_Q U (no stationarity term)
///   w_y L_res^y + w_lambda L_res^lambda + w_bc_y L_bc^y + w_bc_lambda L_bc^lambda
///   + w_ic L_ic + w_T L_T^lambda.
/// Terms: res_y, res_lambda, bc_y, bc_lambda, ic_y, terminal_lambda.
LossBreakdown indirect_loss(const MlpParams& state_net, const MlpParams& control_net,
                            const CollocationSet& colloc, const ProblemSpec& spec,
                            const LossWeights& weights,
                            std::vector<Eigen::VectorXd>* grads = nullptr,
                            const Parallelism& par = {});

/// Generic three-network indirect loss with an independent adjoint network and
/// the stationarity term w_st mean (beta_Q U - Lambda)^2. Terms: res_y,
/// res_lambda, stationarity, bc_y, bc_lambda, ic_y, terminal_lambda.
LossBreakdown indirect_loss_three_net(const MlpParams& state_net, const MlpParams& control_net,
                                      const MlpParams& adjoint_net, const CollocationSet& colloc,
                                      const ProblemSpec& spec, const LossWeights& weights,
                                      std::vector<Eigen::VectorXd>* grads = nullptr,
                                      const Parallelism& par = {});

/// A space-time field known in closed form, for manufactured-solution checks.
using FieldOracle = std::function<FieldJet(double x, double t)>;

/// Direct loss terms computed from analytic fields instead of networks (same
/// residual algebra, no gradients).
LossBreakdown direct_loss_from_fields(const FieldOracle& state, const FieldOracle& control,
                                      const CollocationSet& colloc, const ProblemSpec& spec,
                                      const LossWeights& weights);

/// Indirect loss terms from analytic state and control fields, with the
/// adjoint tied by construction.
LossBreakdown indirect_loss_from_fields(const FieldOracle& state, const FieldOracle& control,
                                        const CollocationSet& colloc, const ProblemSpec& spec,
                                        const LossWeights& weights);

/// Pointwise (Y, U, Lambda) values on the interior points of the indirect
/// formulation, as used inside indirect_loss.
struct IndirectPointValues {
  std::vector<double> state, control, adjoint;
};
IndirectPointValues indirect_point_values(const MlpParams& state_net,
                                          const MlpParams& control_net,
                                          const CollocationSet& colloc, const ProblemSpec& spec);

}  // namespace pcl
