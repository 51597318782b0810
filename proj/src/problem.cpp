#include "pcl/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pcl/errors.hpp"

namespace pcl {

namespace {

// |1 + z + z^2/2 + z^3/6 + z^4/24| = 1 on the negative real axis.
constexpr double kRk4RealAxisLimit = 2.785293563405282;

}  // namespace

ReactionTerm ReactionTerm::allen_cahn() {
  // f'(s) = 3 s^2 - 1 >= -1
  return ReactionTerm(Kind::AllenCahn, 0.0, 1.0, "allen_cahn");
}

ReactionTerm ReactionTerm::zeldovich() {
  // f'(s) = 3 s^2 - 2 s >= -1/3
  return ReactionTerm(Kind::Zeldovich, 0.0, 1.0 / 3.0, "zeldovich");
}

ReactionTerm ReactionTerm::zfk(double a) {
  if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("zfk parameter a must lie in (0, 1)");
  // min of 3 s^2 - 2 (1 + a) s + a is a - (1 + a)^2 / 3
  const double cf = std::max(0.0, (1.0 + a) * (1.0 + a) / 3.0 - a);
  return ReactionTerm(Kind::Zfk, a, cf, "zfk");
}

ReactionTerm ReactionTerm::custom(ScalarFn f, ScalarFn df, ScalarFn d2f, double lower_bound_cf,
                                  std::string name) {
  if (!f || !df || !d2f) throw InvalidArgument("custom reaction needs f, f' and f''");
  ReactionTerm r(Kind::Custom, 0.0, lower_bound_cf, std::move(name));
  r.f_ = std::move(f);
  r.df_ = std::move(df);
  r.d2f_ = std::move(d2f);
  return r;
}

double ReactionTerm::value(double s) const {
  switch (kind_) {
    case Kind::AllenCahn:
      return s * s * s - s;
    case Kind::Zeldovich:
      return s * s * s - s * s;
    case Kind::Zfk:
      return s * (s - 1.0) * (s - a_);
    case Kind::Custom:
      return f_(s);
  }
  return 0.0;
}

double ReactionTerm::derivative(double s) const {
  switch (kind_) {
    case Kind::AllenCahn:
      return 3.0 * s * s - 1.0;
    case Kind::Zeldovich:
      return 3.0 * s * s - 2.0 * s;
    case Kind::Zfk:
      return 3.0 * s * s - 2.0 * (1.0 + a_) * s + a_;
    case Kind::Custom:
      return df_(s);
  }
  return 0.0;
}

double ReactionTerm::second_derivative(double s) const {
  switch (kind_) {
    case Kind::AllenCahn:
      return 6.0 * s;
    case Kind::Zeldovich:
      return 6.0 * s - 2.0;
    case Kind::Zfk:
      return 6.0 * s - 2.0 * (1.0 + a_);
    case Kind::Custom:
      return d2f_(s);
  }
  return 0.0;
}

Profile Profile::cos_pi_x() {
  return Profile{"cos_pi_x", [](double x) { return std::cos(std::numbers::pi * x); }};
}

Profile Profile::constant(double c) {
  std::ostringstream os;
  os.precision(17);
  os << "constant:" << c;
  return Profile{os.str(), [c](double) { return c; }};
}

Profile Profile::parse(const std::string& text) {
  if (text == "cos_pi_x") return cos_pi_x();
  if (text == "zero") return constant(0.0);
  const std::string prefix = "constant:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const std::string rest = text.substr(prefix.size());
      const double c = std::stod(rest, &used);
      if (used == rest.size()) return constant(c);
    } catch (const std::exception&) {
    }
  }
  throw InvalidArgument("unknown profile '" + text + "' (expected cos_pi_x, zero, constant:<c>)");
}

GridSpec GridSpec::uniform(std::size_t n_space, std::size_t n_time, double horizon,
                           std::size_t substeps) {
  if (n_space < 2 || n_time < 1) throw InvalidArgument("grid needs n_space >= 2 and n_time >= 1");
  GridSpec g;
  g.n_space = n_space;
  g.dx = 1.0 / static_cast<double>(n_space - 1);
  g.n_time = n_time;
  g.dt = horizon / static_cast<double>(n_time);
  g.substeps = substeps;
  return g;
}

std::string to_string(ValidationIssue::Code code) {
  switch (code) {
    case ValidationIssue::Code::InvalidGrid:
      return "InvalidGrid";
    case ValidationIssue::Code::InvalidDomain:
      return "InvalidDomain";
    case ValidationIssue::Code::NonpositiveWeight:
      return "NonpositiveWeight";
    case ValidationIssue::Code::NonpositiveParameter:
      return "NonpositiveParameter";
    case ValidationIssue::Code::UnstableTimeStep:
      return "UnstableTimeStep";
    case ValidationIssue::Code::InvalidReaction:
      return "InvalidReaction";
  }
  return "Unknown";
}

double rk4_stable_step(const ProblemSpec& spec, const GridSpec& grid) {
  // Neumann ghost-point Laplacian has spectrum in [-4/dx^2, 0]. The reaction
  // Jacobian -f'(y) is bounded over the physically relevant range |y| <= 1.
  double max_fprime = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double s = -1.0 + 0.01 * k;
    max_fprime = std::max(max_fprime, spec.reaction.derivative(s));
  }
  const double spectral_radius = 4.0 * spec.diffusion() / (grid.dx * grid.dx) + max_fprime;
  return kRk4RealAxisLimit / spectral_radius;
}

std::vector<ValidationIssue> validate_spec(const ProblemSpec& spec, const GridSpec& grid) {
  using Code = ValidationIssue::Code;
  std::vector<ValidationIssue> issues;
  auto add = [&](Code c, std::string msg) { issues.push_back({c, std::move(msg)}); };

  if (!(spec.epsilon > 0.0) || !std::isfinite(spec.epsilon))
    add(Code::NonpositiveParameter, "epsilon must be > 0");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon))
    add(Code::NonpositiveParameter, "horizon T must be > 0");
  if (!(spec.beta_terminal > 0.0)) add(Code::NonpositiveWeight, "beta_T must be > 0");
  if (!(spec.beta_control > 0.0)) add(Code::NonpositiveWeight, "beta_Q must be > 0");
  if (!spec.initial_state.fn) add(Code::NonpositiveParameter, "initial profile is empty");
  if (!spec.target_state.fn) add(Code::NonpositiveParameter, "target profile is empty");

  if (grid.n_space < 3) add(Code::InvalidDomain, "n_space must be >= 3");
  const double length = static_cast<double>(grid.n_space - 1) * grid.dx;
  if (!(std::abs(length - 1.0) <= 1e-12)) {
    std::ostringstream os;
    os << "(n_space - 1) * dx = " << length << " != 1";
    add(Code::InvalidDomain, os.str());
  }
  if (grid.n_time < 1 || grid.substeps < 1)
    add(Code::InvalidGrid, "n_time and substeps must be >= 1");
  const double span = static_cast<double>(grid.n_time) * grid.dt;
  if (!(std::abs(span - spec.horizon) <= 1e-12 * std::max(1.0, spec.horizon))) {
    std::ostringstream os;
    os << "n_time * dt = " << span << " != T = " << spec.horizon;
    add(Code::InvalidGrid, os.str());
  }

  // f' must be bounded below by -c_f and agree with f.
  if (spec.reaction.lower_bound_cf() < 0.0)
    add(Code::InvalidReaction, "reaction lower bound c_f must be >= 0");
  for (int k = 0; k <= 400; ++k) {
    const double s = -10.0 + 0.05 * k;
    const double d = spec.reaction.derivative(s);
    if (!std::isfinite(d) || d < -spec.reaction.lower_bound_cf() - 1e-12) {
      std::ostringstream os;
      os << "f'(" << s << ") = " << d << " < -c_f";
      add(Code::InvalidReaction, os.str());
      break;
    }
  }
  for (int k = 0; k <= 100; ++k) {
    const double s = -2.0 + 0.04 * k;
    const double h = 1e-5;
    const double fd =
        (spec.reaction.value(s + h) - spec.reaction.value(s - h)) / (2.0 * h);
    const double d = spec.reaction.derivative(s);
    if (std::abs(fd - d) > 1e-6 * std::max(1.0, std::abs(d))) {
      std::ostringstream os;
      os << "f' disagrees with finite differences of f at s = " << s;
      add(Code::InvalidReaction, os.str());
      break;
    }
  }

  if (issues.empty() && grid.inner_step() > rk4_stable_step(spec, grid)) {
    std::ostringstream os;
    os << "RK4 step dt/substeps = " << grid.inner_step()
       << " exceeds the stability limit " << rk4_stable_step(spec, grid)
       << "; increase substeps";
    add(Code::UnstableTimeStep, os.str());
  }
  return issues;
}

std::vector<ValidationIssue> validate_weights(const LossWeights& w) {
  std::vector<ValidationIssue> issues;
  const std::pair<const char*, double> all[] = {
      {"w_res", w.w_res},       {"w_bc", w.w_bc},   {"w_ic", w.w_ic},
      {"w_y", w.w_y},           {"w_lambda", w.w_lambda}, {"w_bc_y", w.w_bc_y},
      {"w_bc_lambda", w.w_bc_lambda}, {"w_T", w.w_T}, {"w_st", w.w_st}};
  for (const auto& [name, value] : all) {
    if (!(value >= 0.0) || !std::isfinite(value))
      issues.push_back({ValidationIssue::Code::NonpositiveWeight,
                        std::string(name) + " must be a finite value >= 0"});
  }
  return issues;
}

void throw_if_invalid(const std::vector<ValidationIssue>& issues) {
  if (issues.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& issue : issues) msg += "\n  " + to_string(issue.code) + ": " + issue.message;
  throw InvalidArgument(msg);
}

AllenCahnSetup default_allen_cahn() { return AllenCahnSetup{}; }

}  // namespace pcl
