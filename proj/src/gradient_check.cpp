#include "pcl/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pcl/discrete_adjoint.hpp"
#include "pcl/fd_solver.hpp"

namespace pcl {

namespace {

double rel_err(double g, double fd) {
  const double den = std::max(std::abs(g), std::abs(fd));
  return den == 0.0 ? 0.0 : std::abs(g - fd) / den;
}

std::vector<std::size_t> pick(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (k == 0 || k >= n) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Fourth-order central difference of phi at 0.
template <class Phi>
double central_difference(const Phi& phi, double h) {
  return (phi(-2.0 * h) - 8.0 * phi(-h) + 8.0 * phi(h) - phi(2.0 * h)) / (12.0 * h);
}

// The default objective recomputed in extended precision: ghost-point
// Laplacian, one RK4 step per slab, rectangle-rule J. Finite differences of
// the double solver are round-off bound on entries far below J itself.
long double extended_objective(const GridField& u, const ProblemSpec& spec, const GridSpec& grid) {
  const std::size_t n = grid.n_space;
  const long double dx = grid.dx, dt = grid.dt, nu = spec.diffusion();
  const long double pi = 3.141592653589793238462643383279502884L;
  std::vector<long double> y(n), k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = std::cos(pi * static_cast<long double>(i) * dx);
  const auto rhs = [&](const std::vector<long double>& v, std::size_t slab, std::vector<long double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      const long double left = i == 0 ? v[1] : v[i - 1];
      const long double right = i + 1 == n ? v[n - 2] : v[i + 1];
      out[i] = nu * (left - 2 * v[i] + right) / (dx * dx) - (v[i] * v[i] * v[i] - v[i]) + u(i, slab);
    }
  };
  for (std::size_t m = 0; m < grid.n_time; ++m) {
    rhs(y, m, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt / 2 * k1[i];
    rhs(tmp, m, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt / 2 * k2[i];
    rhs(tmp, m, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    rhs(tmp, m, k4);
    for (std::size_t i = 0; i < n; ++i) y[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  long double jt = 0, jq = 0;
  for (std::size_t i = 0; i < n; ++i) jt += y[i] * y[i];
  for (double v : u.flat()) jq += static_cast<long double>(v) * v;
  return spec.beta_terminal / 2.0L * dx * jt + spec.beta_control / 2.0L * dx * dt * jq;
}

}  // namespace

GradientCheckReport check_adjoint_gradient(std::size_t n_space, std::size_t n_time,
                                           std::uint64_t seed, std::size_t components,
                                           double h) {
  const auto spec = default_allen_cahn().spec;
  const auto grid = GridSpec::uniform(n_space, n_time, spec.horizon, 1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto u = GridField::zeros(FieldKind::Control, grid);
  for (auto& v : u.flat()) v = unif(rng);

  const auto j_of = [&](const GridField& c) { return extended_objective(c, spec, grid); };
  const auto g = gradient(u, spec, grid).gradient;
  const auto gflat = g.flat();

  GradientCheckReport rep;
  // Directional check along a random unit direction.
  std::vector<double> d(u.size());
  double norm = 0.0;
  for (auto& v : d) {
    v = unif(rng);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (auto& v : d) v /= norm;
  const double fd_dir = central_difference(
      [&](double s) {
        auto v = u;
        for (std::size_t k = 0; k < d.size(); ++k) v.flat()[k] += s * d[k];
        return j_of(v);
      },
      h);
  double g_dir = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) g_dir += gflat[k] * d[k];
  rep.max_directional = rel_err(g_dir, fd_dir);
  ++rep.checks;

  for (std::size_t k : pick(u.size(), components, rng)) {
    const double fd = central_difference(
        [&](double s) {
          auto v = u;
          v.flat()[k] += s;
          return j_of(v);
        },
        h);
    rep.max_component = std::max(rep.max_component, rel_err(gflat[k], fd));
    ++rep.checks;
  }
  return rep;
}

GradientCheckReport check_pinn_gradient(Formulation formulation, std::size_t n_points,
                                        std::uint64_t seed, std::size_t components, double h) {
  const auto setup = default_allen_cahn();
  auto colloc = sample_collocation(setup.grid, setup.spec, n_points, n_points, seed);
  // Initial and terminal samples: n_points grid nodes instead of all N.
  std::mt19937_64 pick_rng(seed + 1);
  const auto nodes = pick(colloc.initial_xs.size(), n_points, pick_rng);
  std::vector<double> xs;
  for (auto i : nodes) xs.push_back(colloc.initial_xs[i]);
  colloc.initial_xs = colloc.terminal_xs = xs;
  std::vector<MlpParams> nets;
  for (std::size_t k = 0; k < network_count(formulation); ++k)
    nets.push_back(init_params(MlpArchitecture{}, seed * 7 + k + 1));
  // A nonzero output bias keeps the control cost and terminal terms active.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  for (auto& n : nets) n.flat[n.flat.size() - 1] = unif(rng);

  const auto loss_at = [&](const Eigen::VectorXd& x, std::vector<Eigen::VectorXd>* grads) {
    auto copy = nets;
    unpack(x, copy);
    return pinn_loss(formulation, copy, colloc, setup.spec, setup.weights, grads, {}).total;
  };
  const Eigen::VectorXd x0 = pack(nets);
  std::vector<Eigen::VectorXd> parts;
  loss_at(x0, &parts);
  Eigen::VectorXd g(x0.size());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    g.segment(at, p.size()) = p;
    at += p.size();
  }

  GradientCheckReport rep;
  Eigen::VectorXd d(x0.size());
  for (auto& v : d) v = unif(rng);
  d.normalize();
  const double fd_dir =
      central_difference([&](double s) { return loss_at(x0 + s * d, nullptr); }, h);
  rep.max_directional = rel_err(g.dot(d), fd_dir);
  ++rep.checks;
  for (std::size_t k : pick(static_cast<std::size_t>(x0.size()), components, rng)) {
    const double fd = central_difference(
        [&](double s) {
          Eigen::VectorXd v = x0;
          v[static_cast<Eigen::Index>(k)] += s;
          return loss_at(v, nullptr);
        },
        h);
    rep.max_component =
        std::max(rep.max_component, rel_err(g[static_cast<Eigen::Index>(k)], fd));
    ++rep.checks;
  }
  return rep;
}

}  // namespace pcl
