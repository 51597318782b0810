#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pcl/errors.hpp"
#include "pcl/pinn_losses.hpp"
#include "test_support.hpp"

using namespace pcl;
using testing_support::central_difference;
using testing_support::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

MlpParams bias_only(double c) {
  auto p = zero_params(MlpArchitecture{});
  p.flat[p.flat.size() - 1] = c;
  return p;
}

MlpParams random_net(std::uint64_t seed) {
  auto p = init_params(MlpArchitecture{}, seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  for (auto& v : p.flat) v += d(rng);
  return p;
}

// y = cos(pi x) e^{-t} and the forcing that makes it an exact solution.
FieldJet manufactured_state(double x, double t) {
  const double e = std::exp(-t), c = std::cos(kPi * x);
  return {c * e, -c * e, -kPi * std::sin(kPi * x) * e, -kPi * kPi * c * e};
}

FieldOracle manufactured_control(const ProblemSpec& spec) {
  return [spec](double x, double t) {
    const auto y = manufactured_state(x, t);
    return FieldJet{y.d_t - spec.diffusion() * y.d_xx + spec.reaction.value(y.value), 0, 0, 0};
  };
}

CollocationSet small_set(std::size_t n, std::uint64_t seed) {
  const auto s = default_allen_cahn();
  auto c = sample_collocation(s.grid, s.spec, n, n, seed);
  c.initial_xs.resize(n);
  c.terminal_xs.resize(n);
  for (std::size_t k = 0; k < n; ++k) c.initial_xs[k] = c.terminal_xs[k] = s.grid.x(k * 50 + 3);
  return c;
}

}  // namespace

TEST_CASE("collocation sampling") {
  const auto s = default_allen_cahn();
  const auto a = sample_collocation(s.grid, s.spec, 20000, 512, 7);
  const auto b = sample_collocation(s.grid, s.spec, 20000, 512, 7);
  CHECK(a == b);
  CHECK_FALSE(a == sample_collocation(s.grid, s.spec, 20000, 512, 8));
  CHECK(a.interior_x.size() == 20000);
  CHECK(a.interior_t.size() == 20000);
  CHECK(a.boundary_times.size() == 512);
  for (std::size_t k = 0; k < a.interior_x.size(); ++k) {
    CHECK((a.interior_x[k] > 0.0 && a.interior_x[k] < 1.0));
    CHECK((a.interior_t[k] > 0.0 && a.interior_t[k] < 3.0));
  }
  for (double t : a.boundary_times) CHECK((t > 0.0 && t < 3.0));
  REQUIRE(a.initial_xs.size() == 513);
  CHECK(a.initial_xs[256] == 0.5);
  CHECK(a.terminal_xs == a.initial_xs);
  // roughly uniform
  double mean = 0.0;
  for (double x : a.interior_x) mean += x;
  CHECK(mean / 20000 == doctest::Approx(0.5).epsilon(0.02));
  CHECK_THROWS_AS(sample_collocation(s.grid, s.spec, 0, 512, 1), InvalidArgument);
}

TEST_CASE("state residual examples") {
  const auto spec = default_allen_cahn().spec;
  CHECK(state_residual(FieldJet{}, 0.0, spec) == 0.0);
  for (double t : {0.0, 0.4, 2.0}) {
    const double e = std::exp(-t);
    const FieldJet y{e, -e, 0, 0};
    CHECK(state_residual(y, 0.0, spec) == doctest::Approx(-e + (e * e * e - e)).epsilon(1e-14));
  }
  CHECK(state_residual(FieldJet{1.0, -1.0, 0, 0}, 0.0, spec) == -1.0);
  const auto u = manufactured_control(spec);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0, 1);
  for (int k = 0; k < 20; ++k) {
    const double x = d(rng), t = 3 * d(rng);
    CHECK(std::abs(state_residual(manufactured_state(x, t), u(x, t).value, spec)) <= 1e-12);
  }
}

TEST_CASE("adjoint residual examples") {
  const auto spec = default_allen_cahn().spec;
  CHECK(adjoint_residual(FieldJet{0.7, 1, 2, 3}, FieldJet{}, spec) == 0.0);
  // state 0 (f'(0) = -1), lambda = e^t: -e^t - e^t
  const FieldJet lam0{1.0, 1.0, 0, 0};
  CHECK(adjoint_residual(FieldJet{}, lam0, spec) == -2.0);
  // state 1 (f'(1) = 2), lambda = e^{-2t}: 2 e^{-2t} + 2 e^{-2t}
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0, 3);
  for (int k = 0; k < 10; ++k) {
    const double t = d(rng), e = std::exp(-2 * t);
    CHECK(std::abs(adjoint_residual(FieldJet{1.0, 0, 0, 0}, FieldJet{e, -2 * e, 0, 0}, spec) -
                   4 * e) <= 1e-12);
  }
}

TEST_CASE("adjoint by construction scales every channel") {
  const auto lam = adjoint_by_construction(FieldJet{1, 2, 3, 4}, 0.5);
  CHECK(lam.value == 0.5);
  CHECK(lam.d_t == 1.0);
  CHECK(lam.d_x == 1.5);
  CHECK(lam.d_xx == 2.0);
}

TEST_CASE("direct loss with zero networks: only the initial mismatch survives") {
  const auto s = default_allen_cahn();
  const auto c = sample_collocation(s.grid, s.spec, 500, 64, 1);
  const auto z = zero_params(MlpArchitecture{});
  const auto l = direct_loss(z, z, c, s.spec, s.weights);
  CHECK(l.term("res_y") == 0.0);
  CHECK(l.term("bc_y") == 0.0);
  CHECK(l.term("terminal_cost") == 0.0);
  CHECK(l.term("control_cost") == 0.0);
  // sum_{k=0}^{512} cos^2(pi k / 512) = 257
  CHECK(l.term("ic_y") == doctest::Approx(257.0 / 513.0).epsilon(1e-14));
  CHECK(l.total == l.term("ic_y"));
  CHECK(l.names() == std::vector<std::string>{"res_y", "bc_y", "ic_y", "terminal_cost", "control_cost"});
}

TEST_CASE("indirect loss with zero networks: only the initial mismatch survives") {
  const auto s = default_allen_cahn();
  const auto c = sample_collocation(s.grid, s.spec, 500, 64, 1);
  const auto z = zero_params(MlpArchitecture{});
  const auto l = indirect_loss(z, z, c, s.spec, s.weights);
  for (const auto& [name, v] : l.terms)
    if (name != "ic_y") CHECK(v == 0.0);
  CHECK(l.term("ic_y") == doctest::Approx(0.500975).epsilon(1e-6));
  CHECK(l.total == l.term("ic_y"));
  CHECK_THROWS_AS(l.term("control_cost"), InvalidArgument);
}

TEST_CASE("weighted-sum contract") {
  const auto s = default_allen_cahn();
  const auto c = small_set(40, 2);
  const auto y = random_net(1), u = random_net(2);
  LossWeights w{0, 0, 1, 0, 0, 0, 0, 0, 0};
  const auto only_ic = direct_loss(y, u, c, s.spec, w);
  // the cost terms carry beta_T / 2 and beta_Q / 2, not penalty weights
  CHECK(only_ic.total == doctest::Approx(only_ic.term("ic_y") + 0.5 * only_ic.term("terminal_cost") +
                                         0.5e-3 * only_ic.term("control_cost"))
                             .epsilon(1e-15));
  LossWeights w2{0.5, 2.0, 3.0, 1.5, 0.25, 4.0, 0.125, 2.5, 1.0};
  const auto d = direct_loss(y, u, c, s.spec, w2);
  CHECK(d.total == doctest::Approx(0.5 * d.term("res_y") + 2.0 * d.term("bc_y") + 3.0 * d.term("ic_y") +
                                   0.5 * d.term("terminal_cost") + 0.5e-3 * d.term("control_cost"))
                       .epsilon(1e-15));
  const auto i = indirect_loss(y, u, c, s.spec, w2);
  CHECK(i.total == doctest::Approx(1.5 * i.term("res_y") + 0.25 * i.term("res_lambda") +
                                   4.0 * i.term("bc_y") + 0.125 * i.term("bc_lambda") +
                                   3.0 * i.term("ic_y") + 2.5 * i.term("terminal_lambda"))
                       .epsilon(1e-15));
  for (const auto& [name, v] : i.terms) CHECK(v >= 0.0);
}

TEST_CASE("control cost is (T / N_int) sum U^2") {
  const auto s = default_allen_cahn();
  const auto c = sample_collocation(s.grid, s.spec, 1000, 8, 3);
  const auto l = direct_loss(zero_params(MlpArchitecture{}), bias_only(0.5), c, s.spec, s.weights);
  // constant U = 0.5 over a domain of measure |Q| = |Omega| T = 3
  CHECK(l.term("control_cost") == doctest::Approx(0.75).epsilon(1e-14));
  // with Y = 0 the residual is -U
  CHECK(l.term("res_y") == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("terminal condition identity zeroes terminal_lambda") {
  const auto s = default_allen_cahn();
  const auto c = small_set(20, 5);
  // Y(T) = 1e-3 and U(T) = -1: beta_Q U + beta_T Y = 0 exactly
  const auto l = indirect_loss(bias_only(1e-3), bias_only(-1.0), c, s.spec, s.weights);
  CHECK(l.term("terminal_lambda") == 0.0);
}

TEST_CASE("stationarity residual vanishes bitwise at every point") {
  const auto s = default_allen_cahn();
  const auto c = sample_collocation(s.grid, s.spec, 3000, 16, 9);
  const auto v = indirect_point_values(random_net(3), random_net(4), c, s.spec);
  REQUIRE(v.control.size() == 3000);
  std::size_t nonzero = 0;
  for (std::size_t k = 0; k < v.control.size(); ++k)
    if (s.spec.beta_control * v.control[k] - v.adjoint[k] != 0.0) ++nonzero;
  CHECK(nonzero == 0);
}

TEST_CASE("direct and indirect losses share res_y, bc_y and ic_y bitwise") {
  const auto s = default_allen_cahn();
  const auto c = sample_collocation(s.grid, s.spec, 2000, 128, 4);
  const auto y = random_net(5), u = random_net(6);
  const auto d = direct_loss(y, u, c, s.spec, s.weights);
  const auto i = indirect_loss(y, u, c, s.spec, s.weights);
  CHECK(d.term("res_y") == i.term("res_y"));
  CHECK(d.term("bc_y") == i.term("bc_y"));
  CHECK(d.term("ic_y") == i.term("ic_y"));
}

TEST_CASE("manufactured solution gives a vanishing state residual loss") {
  const auto s = default_allen_cahn();
  const auto c = sample_collocation(s.grid, s.spec, 2000, 64, 2);
  const auto l = direct_loss_from_fields(manufactured_state, manufactured_control(s.spec), c,
                                         s.spec, s.weights);
  CHECK(l.term("res_y") <= 1e-24);
  // y_x = 0 at both ends, y(., 0) = y0
  CHECK(l.term("bc_y") <= 1e-28);
  CHECK(l.term("ic_y") <= 1e-28);
  // terminal mean of cos^2(pi x) e^{-6} over the grid
  CHECK(l.term("terminal_cost") == doctest::Approx(257.0 / 513.0 * std::exp(-6.0)).epsilon(1e-12));
}

TEST_CASE("boundary term sums both endpoints per sampled time") {
  const auto s = default_allen_cahn();
  const auto c = sample_collocation(s.grid, s.spec, 10, 33, 2);
  const FieldOracle half_square = [](double x, double) { return FieldJet{0.5 * x * x, 0, x, 1}; };
  const FieldOracle zero = [](double, double) { return FieldJet{}; };
  CHECK(direct_loss_from_fields(half_square, zero, c, s.spec, s.weights).term("bc_y") == 1.0);
  const auto i = indirect_loss_from_fields(zero, half_square, c, s.spec, s.weights);
  CHECK(i.term("bc_lambda") == doctest::Approx(1e-6).epsilon(1e-14));
}

TEST_CASE("indirect field-oracle residual for a known adjoint") {
  // state 0, control e^t / beta_Q: Lambda = e^t and r_lambda = -2 e^t
  const auto s = default_allen_cahn();
  auto c = sample_collocation(s.grid, s.spec, 50, 4, 6);
  const FieldOracle zero = [](double, double) { return FieldJet{}; };
  const double bq = s.spec.beta_control;
  const FieldOracle u = [bq](double, double t) {
    const double e = std::exp(t) / bq;
    return FieldJet{e, e, 0, 0};
  };
  const auto l = indirect_loss_from_fields(zero, u, c, s.spec, s.weights);
  double expect = 0.0;
  for (double t : c.interior_t) expect += 4 * std::exp(2 * t);
  CHECK(l.term("res_lambda") == doctest::Approx(expect / 50).epsilon(1e-12));
}

TEST_CASE("loss gradients match finite differences on a 10-point set") {
  const auto s = default_allen_cahn();
  const auto c = small_set(10, 8);
  const auto y = random_net(11), u = random_net(12), lam = random_net(13);
  struct Case {
    const char* name;
    std::function<LossBreakdown(const MlpParams&, const MlpParams&, const MlpParams&,
                                std::vector<Eigen::VectorXd>*)> f;
    std::size_t nets;
  };
  const Case cases[] = {
      {"direct",
       [&](const MlpParams& a, const MlpParams& b, const MlpParams&, std::vector<Eigen::VectorXd>* g) {
         return direct_loss(a, b, c, s.spec, s.weights, g);
       },
       2},
      {"indirect",
       [&](const MlpParams& a, const MlpParams& b, const MlpParams&, std::vector<Eigen::VectorXd>* g) {
         return indirect_loss(a, b, c, s.spec, s.weights, g);
       },
       2},
      {"three-net",
       [&](const MlpParams& a, const MlpParams& b, const MlpParams& l, std::vector<Eigen::VectorXd>* g) {
         return indirect_loss_three_net(a, b, l, c, s.spec, s.weights, g);
       },
       3},
  };
  for (const auto& tc : cases) {
    CAPTURE(tc.name);
    std::vector<Eigen::VectorXd> grads;
    tc.f(y, u, lam, &grads);
    REQUIRE(grads.size() == tc.nets);
    double worst = 0.0;
    for (std::size_t n = 0; n < tc.nets; ++n) {
      for (Eigen::Index k = 0; k < y.flat.size(); ++k) {
        const double fd = central_difference(
            [&](double h) {
              MlpParams a = y, b = u, l = lam;
              MlpParams& target = n == 0 ? a : (n == 1 ? b : l);
              target.flat[k] += h;
              return tc.f(a, b, l, nullptr).total;
            },
            1e-3);
        worst = std::max(worst, rel_err(grads[n][k], fd));
      }
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("thread count does not change losses or gradients") {
  const auto s = default_allen_cahn();
  const auto c = sample_collocation(s.grid, s.spec, 3000, 300, 12);
  const auto y = random_net(1), u = random_net(2);
  std::vector<Eigen::VectorXd> g1, g4;
  const auto a = indirect_loss(y, u, c, s.spec, s.weights, &g1, {1});
  const auto b = indirect_loss(y, u, c, s.spec, s.weights, &g4, {4});
  CHECK(a.values() == b.values());
  CHECK(a.total == b.total);
  CHECK(g1 == g4);
}

TEST_CASE("empty point families are rejected") {
  const auto s = default_allen_cahn();
  auto c = sample_collocation(s.grid, s.spec, 10, 10, 1);
  c.terminal_xs.clear();
  const auto z = zero_params(MlpArchitecture{});
  CHECK_THROWS_AS(direct_loss(z, z, c, s.spec, s.weights), InvalidArgument);
}
