#include <doctest.h>

#include <cmath>

#include "pcl/discrete_adjoint.hpp"
#include "pcl/errors.hpp"
#include "test_support.hpp"

using namespace pcl;
using testing_support::central_difference;
using testing_support::fill_random;
using testing_support::rel_err;

namespace {

double j_of(const GridField& u, const ProblemSpec& spec, const GridSpec& grid) {
  return objective(solve_state(u, spec, grid), u, spec, grid).j_total;
}

}  // namespace

TEST_CASE("one-step VJP satisfies the dot-product identity") {
  const auto spec = default_allen_cahn().spec;
  const auto grid = GridSpec::uniform(17, 5, 3.0, 1);
  GridField data(FieldKind::State, 17, 5);
  fill_random(data, 21);
  const auto y = data.column(0), u = data.column(1), w = data.column(2), dy = data.column(3),
             du = data.column(4);
  const double h = 0.1;
  const auto adj = rk4_step_adjoint(y, u, w, spec, grid, h);
  // d/ds <w, step(y + s dy, u + s du)>
  const double fd = central_difference(
      [&](double s) {
        std::vector<double> ys(17), us(17);
        for (std::size_t i = 0; i < 17; ++i) {
          ys[i] = y[i] + s * dy[i];
          us[i] = u[i] + s * du[i];
        }
        const auto out = rk4_step(ys, us, spec, grid, h);
        double dot = 0.0;
        for (std::size_t i = 0; i < 17; ++i) dot += w[i] * out[i];
        return dot;
      },
      1e-3);
  double vjp = 0.0;
  for (std::size_t i = 0; i < 17; ++i)
    vjp += adj.costate[i] * dy[i] + adj.control_sensitivity[i] * du[i];
  CHECK(rel_err(vjp, fd) <= 1e-9);
}

TEST_CASE("gradient objective equals the forward objective bitwise") {
  const auto s = default_allen_cahn();
  GridField u = GridField::zeros(FieldKind::Control, s.grid);
  fill_random(u, 4, -0.5, 0.5);
  const auto g = gradient(u, s.spec, s.grid);
  const auto direct = objective(solve_state(u, s.spec, s.grid), u, s.spec, s.grid);
  CHECK(g.objective.j_total == direct.j_total);
  CHECK(g.gradient.matches(s.grid));
  CHECK(g.gradient.kind() == FieldKind::Control);
  CHECK(g.costates.n_cols() == s.grid.n_time + 1);
  CHECK(g.gradient.all_finite());
}

TEST_CASE("terminal costate is beta_T dx (Y - yd)") {
  const auto s = default_allen_cahn();
  const auto u = GridField::zeros(FieldKind::Control, s.grid);
  const auto g = gradient(u, s.spec, s.grid);
  for (std::size_t i = 0; i < s.grid.n_space; i += 37)
    CHECK(g.costates(i, s.grid.n_time) ==
          doctest::Approx(s.grid.dx * g.trajectory.snapshots(i, s.grid.n_time)).epsilon(1e-14));
}

TEST_CASE("adjoint gradient matches finite differences on coarse grids") {
  const auto spec = default_allen_cahn().spec;
  for (auto [n, m] : {std::pair<std::size_t, std::size_t>{9, 3}, {17, 5}, {33, 10}}) {
    const auto grid = GridSpec::uniform(n, m, spec.horizon, 1);
    REQUIRE(validate_spec(spec, grid).empty());
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
      auto u = GridField::zeros(FieldKind::Control, grid);
      fill_random(u, 100 + seed);
      const auto g = gradient(u, spec, grid).gradient;
      for (std::size_t k = 0; k < u.size(); k += std::max<std::size_t>(1, u.size() / 15)) {
        const double fd = central_difference(
            [&](double s) {
              auto v = u;
              v.flat()[k] += s;
              return j_of(v, spec, grid);
            },
            3e-4);
        CHECK(rel_err(g.flat()[k], fd) <= 1e-6);
      }
    }
  }
}

TEST_CASE("adjoint gradient with substeps matches finite differences") {
  const auto spec = default_allen_cahn().spec;
  const auto grid = GridSpec::uniform(17, 4, spec.horizon, 3);
  auto u = GridField::zeros(FieldKind::Control, grid);
  fill_random(u, 8);
  const auto g = gradient(u, spec, grid).gradient;
  for (std::size_t k = 0; k < u.size(); k += 7) {
    const double fd = central_difference(
        [&](double s) {
          auto v = u;
          v.flat()[k] += s;
          return j_of(v, spec, grid);
        },
        3e-4);
    CHECK(rel_err(g.flat()[k], fd) <= 1e-6);
  }
}

TEST_CASE("adjoint optimization decreases the objective and logs every iterate") {
  const auto spec = default_allen_cahn().spec;
  const auto grid = GridSpec::uniform(33, 10, spec.horizon, 1);
  QuasiNewtonConfig cfg;
  cfg.outer_epochs = 1;
  cfg.max_iters_per_epoch = 40;
  const auto u0 = GridField::zeros(FieldKind::Control, grid);
  const auto run = optimize_adjoint(u0, spec, grid, cfg);
  REQUIRE(run.iterations > 0);
  CHECK(run.record.rows.size() == run.iterations);
  CHECK(run.record.term_names == std::vector<std::string>{"j_terminal", "j_control"});
  CHECK(j_of(run.control, spec, grid) < 0.01 * j_of(u0, spec, grid));
  for (const auto& r : run.record.rows) CHECK(r.loss_total < r.loss_before);
}

TEST_CASE("linear-quadratic case: optimizer reaches a stationary point") {
  auto spec = default_allen_cahn().spec;
  spec.reaction = ReactionTerm::custom([](double) { return 0.0; }, [](double) { return 0.0; },
                                       [](double) { return 0.0; }, 0.0, "none");
  const auto grid = GridSpec::uniform(9, 3, spec.horizon, 1);
  QuasiNewtonConfig cfg;
  cfg.outer_epochs = 1;
  cfg.max_iters_per_epoch = 500;
  cfg.grad_tol = 1e-13;
  const auto run = optimize_adjoint(GridField::zeros(FieldKind::Control, grid), spec, grid, cfg);
  const auto g = gradient(run.control, spec, grid).gradient;
  double gmax = 0.0;
  for (double v : g.flat()) gmax = std::max(gmax, std::abs(v));
  CHECK(gmax <= 1e-11);
}

TEST_CASE("zero iteration budget returns the initial control") {
  const auto spec = default_allen_cahn().spec;
  const auto grid = GridSpec::uniform(9, 3, spec.horizon, 1);
  QuasiNewtonConfig cfg;
  cfg.max_iters_per_epoch = 0;
  auto u = GridField::zeros(FieldKind::Control, grid);
  fill_random(u, 2);
  const auto run = optimize_adjoint(u, spec, grid, cfg);
  CHECK(run.control == u);
  CHECK(run.iterations == 0);
  CHECK(run.reason == StopReason::ZeroIterations);
}

TEST_CASE("reference monitor fills rel_l2_u") {
  const auto spec = default_allen_cahn().spec;
  const auto grid = GridSpec::uniform(9, 3, spec.horizon, 1);
  QuasiNewtonConfig cfg;
  cfg.outer_epochs = 1;
  cfg.max_iters_per_epoch = 3;
  GridField ref(FieldKind::Control, 9, 3, 1.0);
  const auto run = optimize_adjoint(GridField::zeros(FieldKind::Control, grid), spec, grid, cfg, &ref);
  REQUIRE_FALSE(run.record.rows.empty());
  for (const auto& r : run.record.rows) CHECK(r.rel_l2_u.has_value());
}
