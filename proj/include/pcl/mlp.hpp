#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pcl/parallel.hpp"

namespace pcl {

/// Optional affine map applied to the raw inputs: x' = (x - x_shift) * x_scale,
/// t' = (t - t_shift) * t_scale. Identity by default.
struct InputScaling {
  double x_shift = 0.0;
  double x_scale = 1.0;
  double t_shift = 0.0;
  double t_scale = 1.0;
};

/// Dense network (x, t) -> scalar with tanh hidden layers and a linear output.
struct MlpArchitecture {
  std::vector<std::size_t> widths{2, 32, 32, 1};
  InputScaling scaling;

  /// sum_l (w_l w_{l+1} + w_{l+1})
  std::size_t parameter_count() const;
  std::size_t n_layers() const { return widths.size() - 1; }
  void validate() const;
};

/// Flat parameters, layer by layer: W_l (column-major, out x in), then b_l.
struct MlpParams {
  Eigen::VectorXd flat;
  MlpArchitecture arch;
  std::uint64_t seed = 0;
};

/// A field and its derivatives at one point.
struct FieldJet {
  double value = 0.0;
  double d_t = 0.0;
  double d_x = 0.0;
  double d_xx = 0.0;
};

/// Xavier-uniform weights, bound sqrt(6 / (fan_in + fan_out)); zero biases.
MlpParams init_params(const MlpArchitecture& arch, std::uint64_t seed);

/// All-zero parameters.
MlpParams zero_params(const MlpArchitecture& arch);

double forward(const MlpParams& params, double x, double t);
FieldJet jet(const MlpParams& params, double x, double t);

/// Which derivative channels to propagate.
enum class JetOrder { Value, Full };

/// Jets for a batch of points, one entry per point.
struct JetBatch {
  Eigen::ArrayXd value, d_t, d_x, d_xx;

  void resize_zero(Eigen::Index n);
  FieldJet at(Eigen::Index k) const { return {value[k], d_t[k], d_x[k], d_xx[k]}; }
};

/// Per-layer intermediate values recorded by a batched forward pass; consumed
/// by mlp_backward.
class MlpTape {
 public:
  struct Layer {
    Eigen::MatrixXd a, a_t, a_x, a_xx;  // layer inputs
    Eigen::MatrixXd h, z_t, z_x, z_xx;  // tanh output and pre-activation slopes
  };
  std::vector<Layer> layers;
  JetOrder order = JetOrder::Full;
  Eigen::Index points = 0;
};

/// Forward propagation of value and (for Full) d_t, d_x, d_xx through every
/// layer, using tanh' = 1 - tanh^2 and tanh'' = -2 tanh tanh'.
void jet_batch(const MlpParams& params, std::span<const double> xs, std::span<const double> ts,
               JetOrder order, JetBatch& out, MlpTape* tape = nullptr);

/// Reverse accumulation: given d(loss)/d(output channels) per point in
/// `seeds`, adds d(loss)/d(params) to `grad`. Channels that were not
/// propagated (Value order) must have zero seeds and are ignored.
void mlp_backward(const MlpParams& params, const MlpTape& tape, const JetBatch& seeds,
                  Eigen::Ref<Eigen::VectorXd> grad);

/// Point set for generic loss evaluation.
struct PointSet {
  std::vector<double> xs, ts;
  std::size_t size() const { return xs.size(); }
};

/// Per-chunk loss callback. `jets[k]` holds network k's jets on the chunk;
/// it must write d(loss)/d(jet) into `seeds[k]` (pre-sized, zeroed) and add
/// the chunk's partial sums into `partials` (pre-sized, zeroed).
using PointLoss = std::function<void(std::size_t first_point, std::span<const JetBatch> jets,
                                     std::span<JetBatch> seeds, std::span<double> partials)>;

inline constexpr std::size_t kChunkPoints = 256;

/// Evaluates a point-separable loss over `points` in fixed chunks and, when
/// `grads` is non-null, accumulates exact parameter gradients for every
/// network. Returns the partial sums reduced in chunk order.
std::vector<double> accumulate_point_loss(std::span<const MlpParams* const> nets,
                                          std::span<const JetOrder> orders,
                                          const PointSet& points, std::size_t n_partials,
                                          const PointLoss& loss,
                                          std::vector<Eigen::VectorXd>* grads,
                                          const Parallelism& par = {});

/// Parameter file: "PCL1", uint64 rank = 1, uint64 length, uint64 layer
/// count, uint64 widths[...], then the float64 parameters.
void write_params(const std::filesystem::path& path, const MlpParams& params);
MlpParams read_params(const std::filesystem::path& path);

}  // namespace pcl
