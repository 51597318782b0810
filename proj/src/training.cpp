#include "pcl/training.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "pcl/errors.hpp"
#include "pcl/evaluation.hpp"

namespace pcl {

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::Direct: return "direct";
    case Formulation::Indirect: return "indirect";
    case Formulation::IndirectThreeNet: return "indirect3";
  }
  return "unknown";
}

std::size_t network_count(Formulation f) { return f == Formulation::IndirectThreeNet ? 3 : 2; }

LossBreakdown pinn_loss(Formulation f, std::span<const MlpParams> nets,
                        const CollocationSet& colloc, const ProblemSpec& spec,
                        const LossWeights& weights, std::vector<Eigen::VectorXd>* grads,
                        const Parallelism& par) {
  if (nets.size() != network_count(f)) throw InvalidArgument("pinn_loss: wrong network count");
  switch (f) {
    case Formulation::Direct:
      return direct_loss(nets[0], nets[1], colloc, spec, weights, grads, par);
    case Formulation::Indirect:
      return indirect_loss(nets[0], nets[1], colloc, spec, weights, grads, par);
    case Formulation::IndirectThreeNet:
      return indirect_loss_three_net(nets[0], nets[1], nets[2], colloc, spec, weights, grads,
                                     par);
  }
  throw InvalidArgument("pinn_loss: unknown formulation");
}

Eigen::VectorXd pack(std::span<const MlpParams> nets) {
  Eigen::Index total = 0;
  for (const auto& n : nets) total += n.flat.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& n : nets) {
    out.segment(at, n.flat.size()) = n.flat;
    at += n.flat.size();
  }
  return out;
}

void unpack(const Eigen::VectorXd& flat, std::span<MlpParams> nets) {
  Eigen::Index at = 0;
  for (auto& n : nets) {
    if (at + n.flat.size() > flat.size()) throw InvalidArgument("unpack: vector too short");
    n.flat = flat.segment(at, n.flat.size());
    at += n.flat.size();
  }
  if (at != flat.size()) throw InvalidArgument("unpack: vector too long");
}

namespace {

Eigen::VectorXd concat(const std::vector<Eigen::VectorXd>& parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.size()) = p;
    at += p.size();
  }
  return out;
}

}  // namespace

PinnTrainingResult train_pinn(Formulation formulation, std::vector<MlpParams> initial,
                              const ProblemSpec& spec, const GridSpec& grid,
                              const LossWeights& weights, const PinnTrainingConfig& cfg,
                              const GridField* reference) {
  validate(cfg.adam);
  validate(cfg.qn);
  if (initial.size() != network_count(formulation))
    throw InvalidArgument("train_pinn: wrong number of networks");
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  PinnTrainingResult out;
  out.nets = std::move(initial);
  std::vector<MlpParams> scratch = out.nets;
  out.record.method = to_string(formulation) + "_pinn/adam+" + cfg.qn.variant_name();
  out.record.term_names = pinn_loss(formulation, out.nets,
                                    sample_collocation(grid, spec, 1, 1, cfg.colloc_seed), spec,
                                    weights, nullptr, cfg.par)
                              .names();

  const auto validation =
      sample_collocation(grid, spec, cfg.n_validation, cfg.n_bc,
                         cfg.colloc_seed + kValidationSeedOffset);
  const auto validate_now = [&](const std::vector<MlpParams>& nets) {
    return pinn_loss(formulation, nets, validation, spec, weights, nullptr, cfg.par);
  };

  // The control network is always index 1.
  Monitor monitor;
  if (reference) {
    monitor = [&](const Eigen::VectorXd& x) -> std::optional<double> {
      unpack(x, scratch);
      return rel_l2(export_control(scratch[1], grid), *reference, grid);
    };
  }

  const auto make_objective = [&](const CollocationSet& colloc) -> Objective {
    return [&, colloc_ptr = &colloc](const Eigen::VectorXd& x) {
      unpack(x, scratch);
      std::vector<Eigen::VectorXd> grads;
      const auto loss = pinn_loss(formulation, scratch, *colloc_ptr, spec, weights, &grads,
                                  cfg.par);
      Evaluation e;
      e.value = loss.total;
      e.terms = loss.values();
      e.gradient = concat(grads);
      return e;
    };
  };

  // Phase 1: Adam on one fixed collocation set.
  auto colloc = sample_collocation(grid, spec, cfg.n_int, cfg.n_bc, cfg.colloc_seed);
  Eigen::VectorXd x = pack(out.nets);
  {
    const auto f = make_objective(colloc);
    AdamState adam;
    for (std::size_t k = 0; k < cfg.adam.steps; ++k) {
      const Evaluation e = f(x);
      if (!std::isfinite(e.value) || !e.gradient.allFinite())
        throw NonFiniteObjective("train_pinn: non-finite loss during Adam at step " +
                                 std::to_string(k));
      RunRow row;
      if (monitor) row.rel_l2_u = monitor(x);
      row.iter = ++out.iterations;
      row.phase = "adam";
      row.loss_total = e.value;
      row.terms = e.terms;
      row.grad_norm = e.gradient.norm();
      row.lr = cfg.adam.learning_rate(k);
      row.wall_seconds = elapsed();
      out.record.rows.push_back(std::move(row));
      adam_step(x, e.gradient, adam, k, cfg.adam);
    }
  }
  unpack(x, out.nets);
  out.post_adam_validation = validate_now(out.nets);
  if (!out.record.rows.empty()) out.record.rows.back().validation_total = out.post_adam_validation.total;
  if (cfg.progress)
    *cfg.progress << to_string(formulation) << " adam steps=" << cfg.adam.steps
                  << " validation=" << out.post_adam_validation.total << std::endl;

  // Phase 2: quasi-Newton epochs with fresh collocation each epoch.
  QuasiNewtonState state;
  for (std::size_t epoch = 1; epoch <= cfg.qn.outer_epochs; ++epoch) {
    colloc = sample_collocation(grid, spec, cfg.n_int, cfg.n_bc, cfg.colloc_seed + epoch);
    if (!cfg.qn.keep_state_across_epochs) state.reset();
    QuasiNewtonLog log;
    log.record = &out.record;
    log.phase = "qn";
    log.epoch = epoch;
    log.iter_offset = out.iterations;
    log.monitor = monitor;
    log.start = start;
    const auto result = quasi_newton_minimize(make_objective(colloc), x, cfg.qn, &state, log);
    x = result.x;
    out.iterations += result.iterations;
    out.epoch_reasons.push_back(result.reason);
    // A dead-end line search keeps its best iterate; the next epoch starts
    // from it with fresh points and a clean curvature memory.
    if (result.reason == StopReason::LineSearchFailure) state.reset();
    if (!out.record.rows.empty() && out.record.rows.back().epoch == epoch) {
      unpack(x, out.nets);
      out.record.rows.back().validation_total = validate_now(out.nets).total;
    }
    if (cfg.progress)
      *cfg.progress << to_string(formulation) << " epoch " << epoch << "/" << cfg.qn.outer_epochs
                    << " iters=" << result.iterations << " loss=" << result.final.value
                    << " stop=" << to_string(result.reason) << std::endl;
  }
  unpack(x, out.nets);
  out.final_training_loss =
      pinn_loss(formulation, out.nets, colloc, spec, weights, nullptr, cfg.par);
  out.final_validation = validate_now(out.nets);
  return out;
}

}  // namespace pcl
