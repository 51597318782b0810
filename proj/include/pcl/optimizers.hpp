#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcl/run_record.hpp"

namespace pcl {

/// Objective value, its gradient, and named components for logging.
struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
  std::vector<double> terms;
};

using Objective = std::function<Evaluation(const Eigen::VectorXd&)>;

/// Optional per-iterate diagnostic, e.g. relative control error against a
/// reference. Called with the accepted iterate.
using Monitor = std::function<std::optional<double>(const Eigen::VectorXd&)>;

struct AdamConfig {
  double lr0 = 1e-3;
  double decay_factor = 0.3;
  std::size_t decay_every = 200;
  std::size_t steps = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// lr0 * decay_factor^floor(step / decay_every), step counted from 0.
  double learning_rate(std::size_t step) const;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
};

/// Bias-corrected Adam update of `params` in place; `step` is 0-based.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               std::size_t step, const AdamConfig& cfg);

struct QuasiNewtonConfig {
  std::size_t outer_epochs = 40;
  std::size_t max_iters_per_epoch = 200;
  /// Number of stored (s, y) pairs; 0 selects a dense inverse Hessian.
  std::size_t memory = 50;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  double grad_tol = 1e-12;
  bool self_scaling = true;
  /// Broyden-class parameter in inverse form: 1 = BFGS, 0 = DFP. Values other
  /// than 1 need dense storage (memory = 0).
  double broyden_phi = 1.0;
  /// Dense only: choose the Broyden parameter and the scaling of H per
  /// iteration from the measured curvature ratios instead of fixing phi.
  bool adaptive_broyden = false;
  std::size_t max_line_search_evals = 25;
  /// Keep curvature pairs across epochs instead of restarting from identity.
  bool keep_state_across_epochs = true;

  /// Human-readable method label, e.g. "ss-lbfgs(m=50)".
  std::string variant_name() const;
};

/// Throws InvalidArgument on inconsistent settings (c1/c2 ordering, phi with
/// limited memory, ...).
void validate(const QuasiNewtonConfig& cfg);
void validate(const AdamConfig& cfg);

enum class StopReason {
  GradientTolerance,
  IterationBudget,
  LineSearchFailure,
  ZeroIterations,
};

std::string to_string(StopReason reason);

/// Inverse-Hessian approximation carried between calls.
class QuasiNewtonState {
 public:
  QuasiNewtonState() = default;

  void reset();
  bool empty() const { return !dense_initialized_ && pairs_.empty(); }

  /// -H g.
  Eigen::VectorXd direction(const Eigen::VectorXd& g, const QuasiNewtonConfig& cfg) const;
  /// Applies one Broyden-class update; returns false (no change) when the
  /// curvature s^T y is not safely positive. `sbs` is s^T H^{-1} s, known
  /// from the line search as -alpha s^T g; only the adaptive update uses it.
  bool update(const Eigen::VectorXd& s, const Eigen::VectorXd& y, const QuasiNewtonConfig& cfg,
              double sbs = 0.0);

 private:
  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> pairs_;
  Eigen::MatrixXd dense_;
  bool dense_initialized_ = false;
  double gamma_ = 1.0;
};

struct QuasiNewtonResult {
  Eigen::VectorXd x;
  Evaluation final;
  StopReason reason = StopReason::IterationBudget;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
};

/// Log options for one quasi-Newton run.
struct QuasiNewtonLog {
  RunRecord* record = nullptr;
  std::string phase = "qn";
  std::size_t epoch = 0;
  std::size_t iter_offset = 0;
  Monitor monitor;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

/// Self-scaled Broyden-class quasi-Newton minimization with a strong-Wolfe
/// line search, up to cfg.max_iters_per_epoch iterations. Every accepted
/// iterate strictly decreases the objective. `state` (optional) carries the
/// curvature memory in and out.
QuasiNewtonResult quasi_newton_minimize(const Objective& f, const Eigen::VectorXd& x0,
                                        const QuasiNewtonConfig& cfg,
                                        QuasiNewtonState* state = nullptr,
                                        const QuasiNewtonLog& log = {});

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  Evaluation eval;
  double dir_deriv = 0.0;
  std::size_t evaluations = 0;
};

/// Strong-Wolfe line search along d from (x, f0) with cubic interpolation
/// inside the bracketing phase.
LineSearchResult strong_wolfe_search(const Objective& f, const Eigen::VectorXd& x,
                                     const Evaluation& f0, const Eigen::VectorXd& d,
                                     double alpha_init, const QuasiNewtonConfig& cfg);

}  // namespace pcl
