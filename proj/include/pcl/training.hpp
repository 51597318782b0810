#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pcl/grid_field.hpp"
#include "pcl/mlp.hpp"
#include "pcl/optimizers.hpp"
#include "pcl/parallel.hpp"
#include "pcl/pinn_losses.hpp"
#include "pcl/problem.hpp"
#include "pcl/run_record.hpp"

namespace pcl {

/// Direct: {state, control}. Indirect: {state, control} with Lambda = beta_Q U.
/// IndirectThreeNet: {state, control, adjoint}.
enum class Formulation { Direct, Indirect, IndirectThreeNet };

std::string to_string(Formulation f);
std::size_t network_count(Formulation f);

/// Dispatches to direct_loss / indirect_loss / indirect_loss_three_net.
LossBreakdown pinn_loss(Formulation f, std::span<const MlpParams> nets,
                        const CollocationSet& colloc, const ProblemSpec& spec,
                        const LossWeights& weights, std::vector<Eigen::VectorXd>* grads,
                        const Parallelism& par);

/// Concatenates the flat parameter vectors (network order) and back.
Eigen::VectorXd pack(std::span<const MlpParams> nets);
void unpack(const Eigen::VectorXd& flat, std::span<MlpParams> nets);

struct PinnTrainingConfig {
  std::size_t n_int = 20000;
  std::size_t n_bc = 512;
  /// Interior size of the held-out validation set (same n_bc).
  std::size_t n_validation = 20000;
  AdamConfig adam;
  QuasiNewtonConfig qn;
  std::uint64_t colloc_seed = 0;
  Parallelism par;
  /// Optional line-oriented progress (one line per phase/epoch).
  std::ostream* progress = nullptr;
};

/// Collocation seeds: Adam phase uses the base seed, quasi-Newton epoch e
/// (1-based) uses base + e, validation uses base + kValidationSeedOffset.
inline constexpr std::uint64_t kValidationSeedOffset = 0x9e3779b9ULL;

struct PinnTrainingResult {
  std::vector<MlpParams> nets;
  RunRecord record;
  /// Loss at the final parameters on the last training collocation set.
  LossBreakdown final_training_loss;
  LossBreakdown post_adam_validation;
  LossBreakdown final_validation;
  std::vector<StopReason> epoch_reasons;
  std::size_t iterations = 0;  // Adam steps + accepted quasi-Newton iterates
};

/// Adam on one fixed collocation set, then qn.outer_epochs quasi-Newton
/// epochs over the concatenated parameters, resampling collocation at the
/// start of each epoch. A line-search failure ends only its epoch. When
/// `reference` is given every logged row carries the exported control's
/// relative L2 error.
PinnTrainingResult train_pinn(Formulation formulation, std::vector<MlpParams> initial,
                              const ProblemSpec& spec, const GridSpec& grid,
                              const LossWeights& weights, const PinnTrainingConfig& cfg,
                              const GridField* reference = nullptr);

}  // namespace pcl
