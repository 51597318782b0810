#include "pcl/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcl/errors.hpp"

namespace pcl {

double AdamConfig::learning_rate(std::size_t step) const {
  const auto drops = decay_every == 0 ? 0 : step / decay_every;
  return lr0 * std::pow(decay_factor, static_cast<double>(drops));
}

void validate(const AdamConfig& cfg) {
  if (!(cfg.lr0 > 0.0)) throw InvalidArgument("adam lr0 must be > 0");
  if (!(cfg.decay_factor > 0.0 && cfg.decay_factor <= 1.0))
    throw InvalidArgument("adam decay_factor must lie in (0, 1]");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    throw InvalidArgument("adam beta1/beta2 must lie in [0, 1)");
  if (!(cfg.eps > 0.0)) throw InvalidArgument("adam eps must be > 0");
  if (cfg.decay_every == 0) throw InvalidArgument("adam decay_every must be >= 1");
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               std::size_t step, const AdamConfig& cfg) {
  if (grad.size() != params.size()) throw InvalidArgument("adam_step: shape mismatch");
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
  }
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double t = static_cast<double>(step + 1);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const double lr = cfg.learning_rate(step);
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const double m_hat = state.m[k] / bc1;
    const double v_hat = state.v[k] / bc2;
    params[k] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

std::string QuasiNewtonConfig::variant_name() const {
  std::ostringstream os;
  os << (self_scaling ? "ss-" : "");
  if (memory == 0 && adaptive_broyden) {
    os << "broyden(adaptive,dense)";
  } else if (memory == 0) {
    os << "broyden(phi=" << broyden_phi << ",dense)";
  } else {
    os << "lbfgs(m=" << memory << ")";
  }
  return os.str();
}

void validate(const QuasiNewtonConfig& cfg) {
  if (!(cfg.wolfe_c1 > 0.0 && cfg.wolfe_c1 < cfg.wolfe_c2 && cfg.wolfe_c2 < 1.0))
    throw InvalidArgument("quasi-Newton needs 0 < c1 < c2 < 1");
  if (!(cfg.grad_tol >= 0.0)) throw InvalidArgument("grad_tol must be >= 0");
  if (cfg.memory > 0 && cfg.broyden_phi != 1.0)
    throw InvalidArgument("broyden_phi != 1 requires dense storage (memory = 0)");
  if (cfg.memory > 0 && cfg.adaptive_broyden)
    throw InvalidArgument("adaptive_broyden requires dense storage (memory = 0)");
  if (!(cfg.broyden_phi >= 0.0 && cfg.broyden_phi <= 1.0))
    throw InvalidArgument("broyden_phi must lie in [0, 1]");
  if (cfg.max_line_search_evals < 2) throw InvalidArgument("max_line_search_evals must be >= 2");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::GradientTolerance:
      return "gradient_tolerance";
    case StopReason::IterationBudget:
      return "iteration_budget";
    case StopReason::LineSearchFailure:
      return "line_search_failure";
    case StopReason::ZeroIterations:
      return "zero_iterations";
  }
  return "unknown";
}

void QuasiNewtonState::reset() {
  pairs_.clear();
  dense_.resize(0, 0);
  dense_initialized_ = false;
  gamma_ = 1.0;
}

Eigen::VectorXd QuasiNewtonState::direction(const Eigen::VectorXd& g,
                                            const QuasiNewtonConfig& cfg) const {
  if (cfg.memory == 0) {
    if (!dense_initialized_) return -g;
    return -(dense_.selfadjointView<Eigen::Lower>() * g);
  }
  // two-loop recursion
  Eigen::VectorXd q = g;
  std::vector<double> alpha(pairs_.size());
  for (std::size_t k = pairs_.size(); k-- > 0;) {
    alpha[k] = pairs_[k].rho * pairs_[k].s.dot(q);
    q -= alpha[k] * pairs_[k].y;
  }
  q *= gamma_;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const double beta = pairs_[k].rho * pairs_[k].y.dot(q);
    q += (alpha[k] - beta) * pairs_[k].s;
  }
  return -q;
}

bool QuasiNewtonState::update(const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                              const QuasiNewtonConfig& cfg, double sbs) {
  const double sy = s.dot(y);
  const double yy = y.squaredNorm();
  if (!(sy > 1e-16 * std::sqrt(s.squaredNorm() * yy)) || !std::isfinite(sy)) return false;

  if (cfg.memory > 0) {
    pairs_.push_back({s, y, 1.0 / sy});
    if (pairs_.size() > cfg.memory) pairs_.pop_front();
    gamma_ = cfg.self_scaling ? sy / yy : 1.0;
    if (!cfg.self_scaling && pairs_.size() == 1) gamma_ = sy / yy;
    return true;
  }

  const auto n = s.size();
  if (!dense_initialized_) {
    // Seed H0 = (s^T y / y^T y) I before the first update.
    dense_ = Eigen::MatrixXd::Identity(n, n) * (sy / yy);
    dense_initialized_ = true;
    sbs = s.squaredNorm() * yy / sy;  // s^T H0^{-1} s for the seed
  }
  Eigen::VectorXd hy = dense_.selfadjointView<Eigen::Lower>() * y;
  double yhy = y.dot(hy);
  double phi = cfg.broyden_phi, inv_tau = 1.0;
  if (cfg.adaptive_broyden) {
    // b = s^T B s / s^T y and h = y^T H y / s^T y measure how far H is from
    // the curvature seen along s; a = bh - 1 >= 0 vanishes when they agree.
    // The Hessian-form parameter theta is pulled towards (1 - b) / b inside
    // a positive-definite bracket, phi is its inverse-form image, and H is
    // rescaled by 1 / tau before the update.
    const double b = sbs / sy, h = yhy / sy;
    const double a = std::max(0.0, b * h - 1.0);
    double theta = 0.0, tau = std::min(1.0, 1.0 / b);
    if (a > 1e-12 && b > 0.0) {
      const double c = std::sqrt(a / (1.0 + a));
      const double rho_minus = std::min(1.0, h * (1.0 - c));
      const double theta_minus = (rho_minus - 1.0) / a;
      const double theta_plus = 1.0 / rho_minus;
      theta = std::max(theta_minus, std::min(theta_plus, (1.0 - b) / b));
      const double sigma = 1.0 + a * theta;
      const double rho_plus = std::min(1.0, 1.0 / b);
      const double root = 1.0 / static_cast<double>(std::max<Eigen::Index>(2, n) - 1);
      tau = theta <= 0.0 ? std::min(rho_plus * std::pow(sigma, root), sigma)
                         : rho_plus * std::min(std::pow(sigma, -root), 1.0 / theta);
      phi = (1.0 - theta) / sigma;
    } else {
      phi = 1.0;
    }
    if (!(tau > 0.0) || !std::isfinite(tau) || !std::isfinite(phi)) {
      tau = 1.0;
      phi = 1.0;
    }
    inv_tau = 1.0 / tau;
  } else if (cfg.self_scaling) {
    // Oren-Luenberger factor keeps the seed's scale consistent with the
    // latest measured curvature.
    inv_tau = sy / yhy;
  }
  if (inv_tau != 1.0) {
    dense_ *= inv_tau;
    hy *= inv_tau;
    yhy *= inv_tau;
  }
  const Eigen::VectorXd v = s / sy - hy / yhy;
  // H <- H - Hy (Hy)^T / yHy + s s^T / sy + phi yHy v v^T   (lower triangle)
  dense_.selfadjointView<Eigen::Lower>().rankUpdate(hy, -1.0 / yhy);
  dense_.selfadjointView<Eigen::Lower>().rankUpdate(s, 1.0 / sy);
  if (phi != 0.0) dense_.selfadjointView<Eigen::Lower>().rankUpdate(v, phi * yhy);
  return true;
}

namespace {

// Minimizer of the cubic interpolating (a, fa, ga) and (b, fb, gb), or NaN.
double cubic_minimizer(double a, double fa, double ga, double b, double fb, double gb) {
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = gb - ga + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (gb + d2 - d1) / denom;
}

bool finite_eval(const Evaluation& e) {
  return std::isfinite(e.value) && e.gradient.allFinite();
}

}  // namespace

LineSearchResult strong_wolfe_search(const Objective& f, const Eigen::VectorXd& x,
                                     const Evaluation& f0, const Eigen::VectorXd& d,
                                     double alpha_init, const QuasiNewtonConfig& cfg) {
  LineSearchResult out;
  const double phi0 = f0.value;
  const double dphi0 = f0.gradient.dot(d);
  if (!(dphi0 < 0.0)) return out;
  const double c1 = cfg.wolfe_c1;
  const double c2 = cfg.wolfe_c2;

  struct Point {
    double alpha, phi, dphi;
    Evaluation eval;
  };
  auto probe = [&](double alpha) {
    Point p{alpha, 0.0, 0.0, f(x + alpha * d)};
    ++out.evaluations;
    if (finite_eval(p.eval)) {
      p.phi = p.eval.value;
      p.dphi = p.eval.gradient.dot(d);
    } else {
      p.phi = std::numeric_limits<double>::infinity();
      p.dphi = std::numeric_limits<double>::quiet_NaN();
    }
    return p;
  };
  auto accept = [&](Point& p) {
    out.ok = true;
    out.alpha = p.alpha;
    out.dir_deriv = p.dphi;
    out.eval = std::move(p.eval);
    return out;
  };
  auto armijo = [&](const Point& p) { return p.phi <= phi0 + c1 * p.alpha * dphi0; };
  auto curvature = [&](const Point& p) { return std::abs(p.dphi) <= -c2 * dphi0; };

  auto zoom = [&](Point lo, Point hi) -> LineSearchResult {
    while (out.evaluations < cfg.max_line_search_evals) {
      const double left = std::min(lo.alpha, hi.alpha);
      const double right = std::max(lo.alpha, hi.alpha);
      const double width = right - left;
      if (width <= 1e-16 * std::max(1.0, right)) break;
      double trial = std::isfinite(hi.phi)
                         ? cubic_minimizer(lo.alpha, lo.phi, lo.dphi, hi.alpha, hi.phi, hi.dphi)
                         : std::numeric_limits<double>::quiet_NaN();
      if (!std::isfinite(trial) || trial < left + 0.1 * width || trial > right - 0.1 * width)
        trial = 0.5 * (lo.alpha + hi.alpha);
      Point p = probe(trial);
      if (!armijo(p) || p.phi >= lo.phi) {
        hi = std::move(p);
      } else {
        if (curvature(p)) return accept(p);
        if (p.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = std::move(lo);
        lo = std::move(p);
      }
    }
    return out;
  };

  Point prev{0.0, phi0, dphi0, {}};
  double alpha = alpha_init;
  const double alpha_max = 1e10;
  for (std::size_t i = 0; out.evaluations < cfg.max_line_search_evals; ++i) {
    Point p = probe(alpha);
    if (!armijo(p) || (i > 0 && p.phi >= prev.phi)) return zoom(std::move(prev), std::move(p));
    if (curvature(p)) return accept(p);
    if (p.dphi >= 0.0) return zoom(std::move(p), std::move(prev));
    prev = std::move(p);
    alpha = std::min(4.0 * alpha, alpha_max);
  }
  return out;
}

QuasiNewtonResult quasi_newton_minimize(const Objective& f, const Eigen::VectorXd& x0,
                                        const QuasiNewtonConfig& cfg, QuasiNewtonState* state,
                                        const QuasiNewtonLog& log) {
  validate(cfg);
  QuasiNewtonState local;
  QuasiNewtonState& hstate = state ? *state : local;

  QuasiNewtonResult result;
  result.x = x0;
  result.final = f(x0);
  result.evaluations = 1;
  if (!finite_eval(result.final))
    throw NonFiniteObjective("quasi-Newton: objective or gradient is not finite at x0");

  if (result.final.gradient.norm() <= cfg.grad_tol) {
    result.reason = StopReason::GradientTolerance;
    return result;
  }
  if (cfg.max_iters_per_epoch == 0) {
    result.reason = StopReason::ZeroIterations;
    return result;
  }

  bool retried_after_reset = false;
  while (result.iterations < cfg.max_iters_per_epoch) {
    const Evaluation& cur = result.final;
    Eigen::VectorXd d = hstate.direction(cur.gradient, cfg);
    if (!(cur.gradient.dot(d) < 0.0) || !d.allFinite()) {
      hstate.reset();
      d = -cur.gradient;
    }
    const double alpha_init =
        hstate.empty() ? std::min(1.0, 1.0 / cur.gradient.lpNorm<Eigen::Infinity>()) : 1.0;
    LineSearchResult ls = strong_wolfe_search(f, result.x, cur, d, alpha_init, cfg);
    result.evaluations += ls.evaluations;
    if (!ls.ok) {
      if (!hstate.empty() && !retried_after_reset) {
        hstate.reset();
        retried_after_reset = true;
        continue;
      }
      result.reason = StopReason::LineSearchFailure;
      return result;
    }
    retried_after_reset = false;

    const Eigen::VectorXd s = ls.alpha * d;
    const Eigen::VectorXd y = ls.eval.gradient - cur.gradient;
    const double loss_before = cur.value;
    const double dphi0 = cur.gradient.dot(d);
    hstate.update(s, y, cfg, -ls.alpha * s.dot(cur.gradient));
    result.x += s;
    result.final = std::move(ls.eval);
    ++result.iterations;

    if (log.record) {
      RunRow row;
      row.iter = log.iter_offset + result.iterations;
      row.phase = log.phase;
      row.epoch = log.epoch;
      row.loss_total = result.final.value;
      row.terms = result.final.terms;
      row.grad_norm = result.final.gradient.norm();
      row.step_length = ls.alpha;
      row.loss_before = loss_before;
      row.dir_deriv0 = dphi0;
      row.dir_deriv = ls.dir_deriv;
      row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                       log.start)
                             .count();
      if (log.monitor) row.rel_l2_u = log.monitor(result.x);
      log.record->rows.push_back(std::move(row));
    }

    if (result.final.gradient.norm() <= cfg.grad_tol) {
      result.reason = StopReason::GradientTolerance;
      return result;
    }
  }
  result.reason = StopReason::IterationBudget;
  return result;
}

}  // namespace pcl
