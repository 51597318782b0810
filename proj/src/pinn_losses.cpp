#include "pcl/pinn_losses.hpp"

#include <algorithm>
#include <random>

#include "pcl/errors.hpp"

namespace pcl {

namespace {

// One family of collocation points with the networks it needs and its
// per-point loss algebra. The same groups drive network evaluation and the
// analytic-field checks.
struct LossGroup {
  PointSet points;
  std::vector<std::size_t> nets;  // indices into the caller's network list
  std::vector<JetOrder> orders;
  std::size_t n_partials = 0;
  PointLoss fn;
};

struct LossPlan {
  std::vector<LossGroup> groups;
  std::size_t n_nets = 0;
  // Maps the reduced partial sums (group by group) to the breakdown.
  std::function<LossBreakdown(const std::vector<std::vector<double>>&)> finish;
};

PointSet interior_points(const CollocationSet& c) { return {c.interior_x, c.interior_t}; }

PointSet boundary_points(const CollocationSet& c) {
  PointSet p;
  p.xs.reserve(2 * c.boundary_times.size());
  p.ts.reserve(2 * c.boundary_times.size());
  for (double t : c.boundary_times) {
    p.xs.push_back(0.0);
    p.ts.push_back(t);
    p.xs.push_back(1.0);
    p.ts.push_back(t);
  }
  return p;
}

PointSet line_points(const std::vector<double>& xs, double t) {
  return {xs, std::vector<double>(xs.size(), t)};
}

void require_nonempty(const CollocationSet& c) {
  if (c.interior_x.empty() || c.boundary_times.empty() || c.initial_xs.empty() ||
      c.terminal_xs.empty())
    throw InvalidArgument("collocation set has an empty point family");
  if (c.interior_x.size() != c.interior_t.size())
    throw InvalidArgument("collocation interior x/t lengths differ");
}

// Initial-condition group, shared verbatim by every formulation.
LossGroup initial_group(const CollocationSet& c, const ProblemSpec& spec, double w_ic) {
  const double n0 = static_cast<double>(c.initial_xs.size());
  const auto xs = c.initial_xs;
  return {line_points(c.initial_xs, 0.0), {0}, {JetOrder::Value}, 1,
          [&spec, xs, n0, w_ic](std::size_t first, std::span<const JetBatch> jets,
                                std::span<JetBatch> seeds, std::span<double> partials) {
            for (Eigen::Index k = 0; k < jets[0].value.size(); ++k) {
              const double d =
                  jets[0].value[k] - spec.initial_state(xs[first + static_cast<std::size_t>(k)]);
              partials[0] += d * d;
              seeds[0].value[k] = 2.0 * w_ic * d / n0;
            }
          }};
}

LossPlan direct_plan(const CollocationSet& c, const ProblemSpec& spec, const LossWeights& w) {
  require_nonempty(c);
  const double nu = spec.diffusion();
  const double n_int = static_cast<double>(c.interior_x.size());
  const double n_bc = static_cast<double>(c.boundary_times.size());
  const double n_T = static_cast<double>(c.terminal_xs.size());
  const double n_0 = static_cast<double>(c.initial_xs.size());
  const double horizon = spec.horizon;
  const double beta_q = spec.beta_control;
  const double beta_t = spec.beta_terminal;

  LossPlan plan;
  plan.n_nets = 2;
  plan.groups.push_back(
      {interior_points(c), {0, 1}, {JetOrder::Full, JetOrder::Value}, 2,
       [&spec, nu, n_int, horizon, beta_q, w_res = w.w_res](
           std::size_t, std::span<const JetBatch> jets, std::span<JetBatch> seeds,
           std::span<double> partials) {
         const auto& y = jets[0];
         const auto& u = jets[1];
         for (Eigen::Index k = 0; k < y.value.size(); ++k) {
           const double r = state_residual(y.at(k), u.value[k], spec);
           partials[0] += r * r;
           partials[1] += u.value[k] * u.value[k];
           const double a = 2.0 * w_res * r / n_int;
           seeds[0].value[k] = a * spec.reaction.derivative(y.value[k]);
           seeds[0].d_t[k] = a;
           seeds[0].d_xx[k] = -nu * a;
           // d/dU of beta_Q/2 * (T/N) sum U^2
           seeds[1].value[k] = -a + beta_q * horizon / n_int * u.value[k];
         }
       }});
  plan.groups.push_back({boundary_points(c), {0}, {JetOrder::Full}, 1,
                         [n_bc, w_bc = w.w_bc](std::size_t, std::span<const JetBatch> jets,
                                               std::span<JetBatch> seeds,
                                               std::span<double> partials) {
                           for (Eigen::Index k = 0; k < jets[0].value.size(); ++k) {
                             const double gx = jets[0].d_x[k];
                             partials[0] += gx * gx;
                             seeds[0].d_x[k] = 2.0 * w_bc * gx / n_bc;
                           }
                         }});
  plan.groups.push_back(initial_group(c, spec, w.w_ic));
  const auto terminal_xs = c.terminal_xs;
  plan.groups.push_back(
      {line_points(c.terminal_xs, spec.horizon), {0}, {JetOrder::Value}, 1,
       [&spec, terminal_xs, n_T, beta_t](std::size_t first, std::span<const JetBatch> jets,
                                         std::span<JetBatch> seeds, std::span<double> partials) {
         for (Eigen::Index k = 0; k < jets[0].value.size(); ++k) {
           const double d = jets[0].value[k] -
                            spec.target_state(terminal_xs[first + static_cast<std::size_t>(k)]);
           partials[0] += d * d;
           seeds[0].value[k] = beta_t * d / n_T;  // d/dY of beta_T/2 * mean d^2
         }
       }});

  plan.finish = [=](const std::vector<std::vector<double>>& p) {
    LossBreakdown b;
    const double res_y = p[0][0] / n_int;
    const double control_cost = horizon / n_int * p[0][1];  // |Q|/N_int with |Q| = T
    const double bc_y = p[1][0] / n_bc;
    const double ic_y = p[2][0] / n_0;
    const double terminal_cost = p[3][0] / n_T;  // |Omega| = 1
    b.terms = {{"res_y", res_y},
               {"bc_y", bc_y},
               {"ic_y", ic_y},
               {"terminal_cost", terminal_cost},
               {"control_cost", control_cost}};
    b.total = w.w_res * res_y + w.w_bc * bc_y + w.w_ic * ic_y + 0.5 * beta_t * terminal_cost +
              0.5 * beta_q * control_cost;
    return b;
  };
  return plan;
}

LossPlan indirect_plan(const CollocationSet& c, const ProblemSpec& spec, const LossWeights& w) {
  require_nonempty(c);
  const double nu = spec.diffusion();
  const double n_int = static_cast<double>(c.interior_x.size());
  const double n_bc = static_cast<double>(c.boundary_times.size());
  const double n_T = static_cast<double>(c.terminal_xs.size());
  const double n_0 = static_cast<double>(c.initial_xs.size());
  const double beta_q = spec.beta_control;
  const double beta_t = spec.beta_terminal;

  LossPlan plan;
  plan.n_nets = 2;
  plan.groups.push_back(
      {interior_points(c), {0, 1}, {JetOrder::Full, JetOrder::Full}, 2,
       [&spec, nu, n_int, beta_q, w_y = w.w_y, w_l = w.w_lambda](
           std::size_t, std::span<const JetBatch> jets, std::span<JetBatch> seeds,
           std::span<double> partials) {
         const auto& y = jets[0];
         const auto& u = jets[1];
         for (Eigen::Index k = 0; k < y.value.size(); ++k) {
           const FieldJet yk = y.at(k);
           const FieldJet lam = adjoint_by_construction(u.at(k), beta_q);
           const double r = state_residual(yk, u.value[k], spec);
           const double r_l = adjoint_residual(yk, lam, spec);
           partials[0] += r * r;
           partials[1] += r_l * r_l;
           const double a = 2.0 * w_y * r / n_int;
           const double b = 2.0 * w_l * r_l / n_int;
           const double fp = spec.reaction.derivative(yk.value);
           seeds[0].value[k] = a * fp + b * spec.reaction.second_derivative(yk.value) * lam.value;
           seeds[0].d_t[k] = a;
           seeds[0].d_xx[k] = -nu * a;
           seeds[1].value[k] = -a + b * fp * beta_q;
           seeds[1].d_t[k] = -b * beta_q;
           seeds[1].d_xx[k] = -nu * b * beta_q;
         }
       }});
  plan.groups.push_back(
      {boundary_points(c), {0, 1}, {JetOrder::Full, JetOrder::Full}, 2,
       [n_bc, beta_q, w_by = w.w_bc_y, w_bl = w.w_bc_lambda](
           std::size_t, std::span<const JetBatch> jets, std::span<JetBatch> seeds,
           std::span<double> partials) {
         for (Eigen::Index k = 0; k < jets[0].value.size(); ++k) {
           const double gx = jets[0].d_x[k];
           const double lx = beta_q * jets[1].d_x[k];
           partials[0] += gx * gx;
           partials[1] += lx * lx;
           seeds[0].d_x[k] = 2.0 * w_by * gx / n_bc;
           seeds[1].d_x[k] = 2.0 * w_bl * lx * beta_q / n_bc;
         }
       }});
  plan.groups.push_back(initial_group(c, spec, w.w_ic));
  const auto terminal_xs = c.terminal_xs;
  plan.groups.push_back(
      {line_points(c.terminal_xs, spec.horizon), {0, 1}, {JetOrder::Value, JetOrder::Value}, 1,
       [&spec, terminal_xs, n_T, beta_q, beta_t, w_T = w.w_T](
           std::size_t first, std::span<const JetBatch> jets, std::span<JetBatch> seeds,
           std::span<double> partials) {
         for (Eigen::Index k = 0; k < jets[0].value.size(); ++k) {
           const double yd = spec.target_state(terminal_xs[first + static_cast<std::size_t>(k)]);
           const double e = beta_q * jets[1].value[k] + beta_t * (jets[0].value[k] - yd);
           partials[0] += e * e;
           seeds[0].value[k] = 2.0 * w_T * e * beta_t / n_T;
           seeds[1].value[k] = 2.0 * w_T * e * beta_q / n_T;
         }
       }});

  plan.finish = [=](const std::vector<std::vector<double>>& p) {
    LossBreakdown b;
    const double res_y = p[0][0] / n_int;
    const double res_lambda = p[0][1] / n_int;
    const double bc_y = p[1][0] / n_bc;
    const double bc_lambda = p[1][1] / n_bc;
    const double ic_y = p[2][0] / n_0;
    const double terminal_lambda = p[3][0] / n_T;
    b.terms = {{"res_y", res_y},         {"res_lambda", res_lambda}, {"bc_y", bc_y},
               {"bc_lambda", bc_lambda}, {"ic_y", ic_y},             {"terminal_lambda", terminal_lambda}};
    b.total = w.w_y * res_y + w.w_lambda * res_lambda + w.w_bc_y * bc_y +
              w.w_bc_lambda * bc_lambda + w.w_ic * ic_y + w.w_T * terminal_lambda;
    return b;
  };
  return plan;
}

LossPlan three_net_plan(const CollocationSet& c, const ProblemSpec& spec, const LossWeights& w) {
  require_nonempty(c);
  const double nu = spec.diffusion();
  const double n_int = static_cast<double>(c.interior_x.size());
  const double n_bc = static_cast<double>(c.boundary_times.size());
  const double n_T = static_cast<double>(c.terminal_xs.size());
  const double n_0 = static_cast<double>(c.initial_xs.size());
  const double beta_q = spec.beta_control;
  const double beta_t = spec.beta_terminal;

  LossPlan plan;
  plan.n_nets = 3;
  plan.groups.push_back(
      {interior_points(c), {0, 1, 2}, {JetOrder::Full, JetOrder::Value, JetOrder::Full}, 3,
       [&spec, nu, n_int, beta_q, w_y = w.w_y, w_l = w.w_lambda, w_st = w.w_st](
           std::size_t, std::span<const JetBatch> jets, std::span<JetBatch> seeds,
           std::span<double> partials) {
         for (Eigen::Index k = 0; k < jets[0].value.size(); ++k) {
           const FieldJet yk = jets[0].at(k);
           const double uk = jets[1].value[k];
           const FieldJet lam = jets[2].at(k);
           const double r = state_residual(yk, uk, spec);
           const double r_l = adjoint_residual(yk, lam, spec);
           const double r_st = beta_q * uk - lam.value;
           partials[0] += r * r;
           partials[1] += r_l * r_l;
           partials[2] += r_st * r_st;
           const double a = 2.0 * w_y * r / n_int;
           const double b = 2.0 * w_l * r_l / n_int;
           const double cst = 2.0 * w_st * r_st / n_int;
           const double fp = spec.reaction.derivative(yk.value);
           seeds[0].value[k] = a * fp + b * spec.reaction.second_derivative(yk.value) * lam.value;
           seeds[0].d_t[k] = a;
           seeds[0].d_xx[k] = -nu * a;
           seeds[1].value[k] = -a + beta_q * cst;
           seeds[2].value[k] = b * fp - cst;
           seeds[2].d_t[k] = -b;
           seeds[2].d_xx[k] = -nu * b;
         }
       }});
  plan.groups.push_back(
      {boundary_points(c), {0, 2}, {JetOrder::Full, JetOrder::Full}, 2,
       [n_bc, w_by = w.w_bc_y, w_bl = w.w_bc_lambda](std::size_t, std::span<const JetBatch> jets,
                                                     std::span<JetBatch> seeds,
                                                     std::span<double> partials) {
         for (Eigen::Index k = 0; k < jets[0].value.size(); ++k) {
           const double gx = jets[0].d_x[k];
           const double lx = jets[1].d_x[k];
           partials[0] += gx * gx;
           partials[1] += lx * lx;
           seeds[0].d_x[k] = 2.0 * w_by * gx / n_bc;
           seeds[1].d_x[k] = 2.0 * w_bl * lx / n_bc;
         }
       }});
  plan.groups.push_back(initial_group(c, spec, w.w_ic));
  const auto terminal_xs = c.terminal_xs;
  plan.groups.push_back(
      {line_points(c.terminal_xs, spec.horizon), {0, 2}, {JetOrder::Value, JetOrder::Value}, 1,
       [&spec, terminal_xs, n_T, beta_t, w_T = w.w_T](
           std::size_t first, std::span<const JetBatch> jets, std::span<JetBatch> seeds,
           std::span<double> partials) {
         for (Eigen::Index k = 0; k < jets[0].value.size(); ++k) {
           const double yd = spec.target_state(terminal_xs[first + static_cast<std::size_t>(k)]);
           const double e = jets[1].value[k] + beta_t * (jets[0].value[k] - yd);
           partials[0] += e * e;
           seeds[0].value[k] = 2.0 * w_T * e * beta_t / n_T;
           seeds[1].value[k] = 2.0 * w_T * e / n_T;
         }
       }});

  plan.finish = [=](const std::vector<std::vector<double>>& p) {
    LossBreakdown b;
    const double res_y = p[0][0] / n_int;
    const double res_lambda = p[0][1] / n_int;
    const double stationarity = p[0][2] / n_int;
    const double bc_y = p[1][0] / n_bc;
    const double bc_lambda = p[1][1] / n_bc;
    const double ic_y = p[2][0] / n_0;
    const double terminal_lambda = p[3][0] / n_T;
    b.terms = {{"res_y", res_y},   {"res_lambda", res_lambda}, {"stationarity", stationarity},
               {"bc_y", bc_y},     {"bc_lambda", bc_lambda},   {"ic_y", ic_y},
               {"terminal_lambda", terminal_lambda}};
    b.total = w.w_y * res_y + w.w_lambda * res_lambda + w.w_st * stationarity +
              w.w_bc_y * bc_y + w.w_bc_lambda * bc_lambda + w.w_ic * ic_y +
              w.w_T * terminal_lambda;
    return b;
  };
  return plan;
}

LossBreakdown run_plan(const LossPlan& plan, std::span<const MlpParams* const> nets,
                       std::vector<Eigen::VectorXd>* grads, const Parallelism& par) {
  if (nets.size() != plan.n_nets) throw InvalidArgument("loss plan: wrong number of networks");
  if (grads) {
    grads->assign(plan.n_nets, {});
    for (std::size_t k = 0; k < plan.n_nets; ++k)
      (*grads)[k] = Eigen::VectorXd::Zero(nets[k]->flat.size());
  }
  std::vector<std::vector<double>> partials;
  for (const auto& group : plan.groups) {
    std::vector<const MlpParams*> used;
    for (auto idx : group.nets) used.push_back(nets[idx]);
    std::vector<Eigen::VectorXd> local;
    partials.push_back(accumulate_point_loss(used, group.orders, group.points, group.n_partials,
                                             group.fn, grads ? &local : nullptr, par));
    if (grads)
      for (std::size_t j = 0; j < group.nets.size(); ++j) (*grads)[group.nets[j]] += local[j];
  }
  return plan.finish(partials);
}

LossBreakdown run_plan_on_fields(const LossPlan& plan, std::span<const FieldOracle> fields) {
  std::vector<std::vector<double>> partials;
  for (const auto& group : plan.groups) {
    std::vector<double> totals(group.n_partials, 0.0);
    const std::size_t n = group.points.size();
    for (std::size_t first = 0; first < n; first += kChunkPoints) {
      const std::size_t count = std::min(kChunkPoints, n - first);
      std::vector<JetBatch> jets(group.nets.size()), seeds(group.nets.size());
      for (std::size_t j = 0; j < group.nets.size(); ++j) {
        jets[j].resize_zero(static_cast<Eigen::Index>(count));
        seeds[j].resize_zero(static_cast<Eigen::Index>(count));
        for (std::size_t k = 0; k < count; ++k) {
          const FieldJet v = fields[group.nets[j]](group.points.xs[first + k],
                                                   group.points.ts[first + k]);
          const auto kk = static_cast<Eigen::Index>(k);
          jets[j].value[kk] = v.value;
          jets[j].d_t[kk] = v.d_t;
          jets[j].d_x[kk] = v.d_x;
          jets[j].d_xx[kk] = v.d_xx;
        }
      }
      std::vector<double> chunk(group.n_partials, 0.0);
      group.fn(first, jets, seeds, chunk);
      for (std::size_t j = 0; j < group.n_partials; ++j) totals[j] += chunk[j];
    }
    partials.push_back(std::move(totals));
  }
  return plan.finish(partials);
}

}  // namespace

CollocationSet sample_collocation(const GridSpec& grid, const ProblemSpec& spec,
                                  std::size_t n_int, std::size_t n_bc, std::uint64_t seed) {
  if (n_int < 1 || n_bc < 1) throw InvalidArgument("collocation counts must be >= 1");
  CollocationSet c;
  c.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Rejects the closed endpoints so every sample lies strictly inside.
  auto open_unit = [&] {
    double v = 0.0;
    do {
      v = unit(rng);
    } while (v <= 0.0 || v >= 1.0);
    return v;
  };
  c.interior_x.resize(n_int);
  c.interior_t.resize(n_int);
  for (std::size_t j = 0; j < n_int; ++j) {
    c.interior_x[j] = open_unit();
    c.interior_t[j] = spec.horizon * open_unit();
  }
  c.boundary_times.resize(n_bc);
  for (auto& t : c.boundary_times) t = spec.horizon * open_unit();
  c.initial_xs.resize(grid.n_space);
  for (std::size_t i = 0; i < grid.n_space; ++i) c.initial_xs[i] = grid.x(i);
  c.terminal_xs = c.initial_xs;
  return c;
}

double LossBreakdown::term(const std::string& name) const {
  for (const auto& [key, value] : terms)
    if (key == name) return value;
  throw InvalidArgument("loss breakdown has no term '" + name + "'");
}

std::vector<std::string> LossBreakdown::names() const {
  std::vector<std::string> out;
  for (const auto& t : terms) out.push_back(t.first);
  return out;
}

std::vector<double> LossBreakdown::values() const {
  std::vector<double> out;
  for (const auto& t : terms) out.push_back(t.second);
  return out;
}

double state_residual(const FieldJet& state, double control_value, const ProblemSpec& spec) {
  return state.d_t - spec.diffusion() * state.d_xx + spec.reaction.value(state.value) -
         control_value;
}

double adjoint_residual(const FieldJet& state, const FieldJet& adjoint, const ProblemSpec& spec) {
  return -adjoint.d_t - spec.diffusion() * adjoint.d_xx +
         spec.reaction.derivative(state.value) * adjoint.value;
}

FieldJet adjoint_by_construction(const FieldJet& control, double beta_control) {
  return {beta_control * control.value, beta_control * control.d_t, beta_control * control.d_x,
          beta_control * control.d_xx};
}

LossBreakdown direct_loss(const MlpParams& state_net, const MlpParams& control_net,
                          const CollocationSet& colloc, const ProblemSpec& spec,
                          const LossWeights& weights, std::vector<Eigen::VectorXd>* grads,
                          const Parallelism& par) {
  const MlpParams* nets[] = {&state_net, &control_net};
  return run_plan(direct_plan(colloc, spec, weights), nets, grads, par);
}

LossBreakdown indirect_loss(const MlpParams& state_net, const MlpParams& control_net,
                            const CollocationSet& colloc, const ProblemSpec& spec,
                            const LossWeights& weights, std::vector<Eigen::VectorXd>* grads,
                            const Parallelism& par) {
  const MlpParams* nets[] = {&state_net, &control_net};
  return run_plan(indirect_plan(colloc, spec, weights), nets, grads, par);
}

LossBreakdown indirect_loss_three_net(const MlpParams& state_net, const MlpParams& control_net,
                                      const MlpParams& adjoint_net, const CollocationSet& colloc,
                                      const ProblemSpec& spec, const LossWeights& weights,
                                      std::vector<Eigen::VectorXd>* grads,
                                      const Parallelism& par) {
  const MlpParams* nets[] = {&state_net, &control_net, &adjoint_net};
  return run_plan(three_net_plan(colloc, spec, weights), nets, grads, par);
}

LossBreakdown direct_loss_from_fields(const FieldOracle& state, const FieldOracle& control,
                                      const CollocationSet& colloc, const ProblemSpec& spec,
                                      const LossWeights& weights) {
  const FieldOracle fields[] = {state, control};
  return run_plan_on_fields(direct_plan(colloc, spec, weights), fields);
}

LossBreakdown indirect_loss_from_fields(const FieldOracle& state, const FieldOracle& control,
                                        const CollocationSet& colloc, const ProblemSpec& spec,
                                        const LossWeights& weights) {
  const FieldOracle fields[] = {state, control};
  return run_plan_on_fields(indirect_plan(colloc, spec, weights), fields);
}

IndirectPointValues indirect_point_values(const MlpParams& state_net,
                                          const MlpParams& control_net,
                                          const CollocationSet& colloc, const ProblemSpec& spec) {
  IndirectPointValues out;
  const std::size_t n = colloc.interior_x.size();
  out.state.resize(n);
  out.control.resize(n);
  out.adjoint.resize(n);
  const MlpParams* nets[] = {&state_net, &control_net};
  const JetOrder orders[] = {JetOrder::Full, JetOrder::Full};
  accumulate_point_loss(nets, orders, interior_points(colloc), 0,
                        [&](std::size_t first, std::span<const JetBatch> jets,
                            std::span<JetBatch>, std::span<double>) {
                          for (Eigen::Index k = 0; k < jets[0].value.size(); ++k) {
                            const auto j = first + static_cast<std::size_t>(k);
                            out.state[j] = jets[0].value[k];
                            out.control[j] = jets[1].value[k];
                            out.adjoint[j] =
                                adjoint_by_construction(jets[1].at(k), spec.beta_control).value;
                          }
                        },
                        nullptr);
  return out;
}

}  // namespace pcl
