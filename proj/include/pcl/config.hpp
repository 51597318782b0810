#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "pcl/mlp.hpp"
#include "pcl/optimizers.hpp"
#include "pcl/problem.hpp"
#include "pcl/training.hpp"

namespace pcl {

/// Everything one experiment needs. Network init seeds derive from `seed`:
/// state = seed, control = seed + 1, adjoint = seed + 2 (all formulations).
/// Collocation base seed is `seed` as well.
struct ExperimentConfig {
  ProblemSpec spec;
  std::string reaction = "allen_cahn";  // allen_cahn | zeldovich | zfk:<a>
  GridSpec grid;
  LossWeights weights;
  MlpArchitecture arch;
  PinnTrainingConfig pinn;
  QuasiNewtonConfig adjoint_qn;
  std::uint64_t seed = 7;
  std::size_t threads = 1;
  bool deterministic = false;
  std::string reference_path;     // optional precomputed reference control
  std::string init_control_path;  // optional warm start for the adjoint run

  /// Copies seed/threads into the nested settings; call after edits.
  void sync();
};

ExperimentConfig default_config();

/// Test-scale preset: N = 33, N_t = 10, a few hundred collocation points and
/// short optimizer budgets.
ExperimentConfig coarse_config();

/// Reads an INI file; keys present override `base`. Unknown sections or keys
/// are rejected.
ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentConfig base = default_config());

/// Canonical INI text of every setting, in a fixed order.
std::string dump_config(const ExperimentConfig& cfg);

/// SHA-256 of `text` as lowercase hex.
std::string sha256_hex(std::string_view text);

ReactionTerm parse_reaction(const std::string& text);

}  // namespace pcl
