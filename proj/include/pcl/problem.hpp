#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace pcl {

/// Pluggable reaction nonlinearity f of the state equation
///   y_t - nu * y_xx + f(y) = u.
/// Closed set of known kinds plus a Custom escape hatch. The indirect loss
/// needs f' analytically and its parameter gradient needs f'', so Custom
/// carries all three.
class ReactionTerm {
 public:
  enum class Kind { AllenCahn, Zeldovich, Zfk, Custom };

  using ScalarFn = std::function<double(double)>;

  static ReactionTerm allen_cahn();
  static ReactionTerm zeldovich();
  /// f(s) = s (s - 1) (s - a), a in (0, 1).
  static ReactionTerm zfk(double a);
  static ReactionTerm custom(ScalarFn f, ScalarFn df, ScalarFn d2f, double lower_bound_cf,
                             std::string name = "custom");

  Kind kind() const noexcept { return kind_; }
  double zfk_a() const noexcept { return a_; }
  /// c_f >= 0 such that f'(s) >= -c_f for all s.
  double lower_bound_cf() const noexcept { return cf_; }
  const std::string& name() const noexcept { return name_; }

  double value(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;

 private:
  ReactionTerm(Kind kind, double a, double cf, std::string name)
      : kind_(kind), a_(a), cf_(cf), name_(std::move(name)) {}

  Kind kind_;
  double a_;
  double cf_;
  std::string name_;
  ScalarFn f_, df_, d2f_;
};

/// Initial or target profile on [0, 1]. Stored as a function so that on-grid
/// solvers and off-grid collocation sample the same source.
struct Profile {
  std::string description;
  std::function<double(double)> fn;

  double operator()(double x) const { return fn(x); }

  /// Parses "cos_pi_x", "zero", or "constant:<value>".
  static Profile parse(const std::string& text);
  static Profile cos_pi_x();
  static Profile constant(double c);
};

/// Continuous problem data. The control operator is the identity.
struct ProblemSpec {
  double epsilon = 0.01;   // interface thickness, diffusion nu = epsilon^2
  double horizon = 3.0;    // final time T
  double beta_terminal = 1.0;
  double beta_control = 1e-3;
  Profile initial_state = Profile::cos_pi_x();
  Profile target_state = Profile::constant(0.0);
  ReactionTerm reaction = ReactionTerm::allen_cahn();

  double diffusion() const noexcept { return epsilon * epsilon; }
};

/// Uniform space-time grid on [0,1] x [0,T]. Controls are piecewise constant
/// on the n_time slabs of width dt; each slab is advanced with `substeps`
/// RK4 steps of size dt / substeps.
struct GridSpec {
  std::size_t n_space = 513;
  double dx = 1.0 / 512.0;
  std::size_t n_time = 60;
  double dt = 0.05;
  std::size_t substeps = 2;

  double x(std::size_t i) const noexcept { return static_cast<double>(i) * dx; }
  double t(std::size_t n) const noexcept { return static_cast<double>(n) * dt; }
  double inner_step() const noexcept { return dt / static_cast<double>(substeps); }
  std::size_t control_size() const noexcept { return n_space * n_time; }

  /// Grid of n_space points on [0,1] and n_time slabs on [0,horizon].
  static GridSpec uniform(std::size_t n_space, std::size_t n_time, double horizon,
                          std::size_t substeps);
};

struct LossWeights {
  // direct formulation
  double w_res = 1.0;
  double w_bc = 1.0;
  double w_ic = 1.0;
  // indirect formulation (w_ic is shared)
  double w_y = 1.0;
  double w_lambda = 1.0;
  double w_bc_y = 1.0;
  double w_bc_lambda = 1.0;
  double w_T = 1.0;
  // stationarity term, used only by the three-network indirect variant
  double w_st = 1.0;
};

struct ValidationIssue {
  enum class Code {
    InvalidGrid,
    InvalidDomain,
    NonpositiveWeight,
    NonpositiveParameter,
    UnstableTimeStep,
    InvalidReaction,
  };
  Code code;
  std::string message;
};

std::string to_string(ValidationIssue::Code code);

/// Every violated invariant of the (spec, grid) pair; empty means valid.
std::vector<ValidationIssue> validate_spec(const ProblemSpec& spec, const GridSpec& grid);
std::vector<ValidationIssue> validate_weights(const LossWeights& weights);

/// Throws InvalidArgument listing all issues when the list is nonempty.
void throw_if_invalid(const std::vector<ValidationIssue>& issues);

/// Largest step size h for which explicit RK4 stays inside its real-axis
/// stability interval on the semi-discrete operator.
double rk4_stable_step(const ProblemSpec& spec, const GridSpec& grid);

struct AllenCahnSetup {
  ProblemSpec spec;
  GridSpec grid;
  LossWeights weights;
};

/// The reference configuration: epsilon = 0.01, T = 3, beta_T = 1,
/// beta_Q = 1e-3, y0 = cos(pi x), yd = 0, N = 513, dx = 1/512, dt = 0.05,
/// N_t = 60.
AllenCahnSetup default_allen_cahn();

}  // namespace pcl
