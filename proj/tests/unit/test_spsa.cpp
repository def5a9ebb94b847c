#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "chainopt/derivatives.hpp"
#include "chainopt/errors.hpp"
#include "chainopt/oracles.hpp"
#include "chainopt/projections.hpp"
#include "chainopt/spsa.hpp"
#include "helpers.hpp"

using namespace chainopt;
using namespace chainopt::testing;

namespace {

std::vector<Vector> scalar_iterates(int n) {
  std::vector<Vector> out;
  for (int i = 0; i <= n; ++i) out.push_back(Vector::Constant(1, double(i)));
  return out;
}

SpsaConfig quiet_config() {
  SpsaConfig cfg;
  cfg.tolerance = 1e-300;  // never stop early; exercise the full schedule
  return cfg;
}

}  // namespace

TEST_SUITE("spsa") {

TEST_CASE("direction estimate is exact on a quadratic") {
  Vector x(2);
  x << 0.7, 0.3;
  Vector b(2);
  b << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  auto J = [](const Vector& v) { return v.squaredNorm(); };

  for (double sign : {1.0, -1.0}) {
    Vector bdelta = sign * b;
    double eta = 1e-3;
    Vector d = spsa_direction(bdelta, J(x + eta * bdelta), J(x - eta * bdelta), eta);
    CHECK(d[0] == doctest::Approx(-0.4).epsilon(1e-9));
    CHECK(d[1] == doctest::Approx(0.4).epsilon(1e-9));
  }
}

TEST_CASE("sign draws are balanced") {
  auto rng = make_rng(7, 0);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double v = rademacher(rng);
    CHECK((v == 1.0 || v == -1.0));
    sum += v;
  }
  CHECK(std::abs(sum) < 300.0);  // ~3 sigma
}

TEST_CASE("config validation rejects bad gain schedules") {
  SpsaConfig ok;
  validate_config(ok, 4);  // defaults pass

  auto expect_reject = [](SpsaConfig bad, int dim = 4) {
    CHECK_THROWS_AS(validate_config(bad, dim), std::invalid_argument);
  };

  SpsaConfig c = ok;
  c.alpha = 0.0;
  expect_reject(c);
  c = ok;
  c.gamma_alpha = 0.5;  // boundary excluded
  expect_reject(c);
  c = ok;
  c.gamma_alpha = 1.01;
  expect_reject(c);
  c = ok;
  c.gamma_alpha = 0.602;
  c.gamma_eta = 0.199;  // exactly (1 - gamma_alpha) / 2 is too slow
  expect_reject(c);
  c = ok;
  c.eta = 0.0;
  expect_reject(c);
  c = ok;
  c.epsilon = 0.0;
  expect_reject(c);
  c = ok;
  c.epsilon_decay = 0.25;  // faster than gamma_eta = 0.2
  expect_reject(c);
  c = ok;
  c.iterations = 0;
  expect_reject(c);
  c = ok;
  c.checkpoint_every = 0;
  expect_reject(c);
  c = ok;
  c.restarts = 0;
  expect_reject(c);
  c = ok;
  c.batch_size = 0;
  expect_reject(c);

  // Perturbed points must stay inside the floor: eta sqrt(dim) < epsilon.
  c = ok;
  c.eta = 1e-2;
  c.epsilon = 1e-4;
  expect_reject(c, 4);
  validate_config(c, 0);  // no feasible directions, nothing to perturb
}

TEST_CASE("estimate bias shrinks quadratically in the step size") {
  Graph g = two_node_graph();
  ConstraintSystem sys = equality_system(g);
  ConnectivityWeights C = ConnectivityWeights::unit();
  Vector x = Vector::Constant(4, 0.5);
  auto J = [&](const Vector& v) {
    return connectivity_objective(transition_matrix(g, v), C);
  };

  DescentDirection exact = steepest_feasible_descent(g, x, C, sys);
  auto bias = [&](double eta) {
    return (exhaustive_spsa_expectation(J, x, sys.basis, eta) - exact.raw).norm();
  };
  double ratio = bias(1e-2) / bias(5e-3);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("window average matches the direct formula") {
  auto iters = scalar_iterates(10);  // values 0..10
  CHECK(polyak_average(iters, 1, 10)[0] == doctest::Approx(7.5));   // mean of 5..10
  CHECK(polyak_average(iters, 2, 4)[0] == doctest::Approx(6.0));    // mean of 4..8
  CHECK(polyak_average(iters, 10, 1)[0] == doctest::Approx(7.5));
  CHECK_THROWS_AS(polyak_average(iters, 2, 6), std::invalid_argument);
}

TEST_CASE("engine averaging matches the reference implementation") {
  Graph g = two_node_graph();
  Problem prob;
  prob.graph = &g;
  prob.objective = ConnectivityWeights::unit();

  SpsaConfig cfg = quiet_config();
  cfg.iterations = 200;
  cfg.checkpoint_every = 50;
  cfg.sample_stride = 1;
  cfg.seed = 99;

  OptimizeResult res = run_optimization(prob, cfg);
  const auto& samples = res.restarts[0].samples;
  REQUIRE(static_cast<long>(samples.size()) == cfg.iterations + 1);

  Vector want = polyak_average(samples, 4, 50);  // window [100, 200]
  CHECK((res.variables - want).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("runs are deterministic and thread-count independent") {
  Graph g = two_node_graph();
  Problem prob;
  prob.graph = &g;
  prob.objective = ConnectivityWeights::unit();

  SpsaConfig cfg = quiet_config();
  cfg.iterations = 120;
  cfg.checkpoint_every = 40;
  cfg.restarts = 3;
  cfg.seed = 5;

  OptimizeResult a = run_optimization(prob, cfg);
  OptimizeResult b = run_optimization(prob, cfg);
  cfg.threads = 3;
  OptimizeResult c = run_optimization(prob, cfg);

  REQUIRE(a.restart_objectives.size() == 3);
  for (int r = 0; r < 3; ++r) {
    CHECK(a.restart_objectives[r] == b.restart_objectives[r]);
    CHECK(a.restart_objectives[r] == c.restart_objectives[r]);
    CHECK((a.restarts[r].variables - c.restarts[r].variables).cwiseAbs().maxCoeff() ==
          0.0);
  }
  CHECK(a.best_restart == c.best_restart);
  CHECK(a.objective == c.objective);
  double best = *std::min_element(a.restart_objectives.begin(),
                                  a.restart_objectives.end());
  CHECK(a.objective == best);
}

TEST_CASE("iterates and results stay feasible") {
  Graph g = two_node_graph();
  Problem prob;
  prob.graph = &g;
  prob.objective = ConnectivityWeights::unit();

  SpsaConfig cfg = quiet_config();
  cfg.iterations = 300;
  cfg.checkpoint_every = 100;
  cfg.epsilon = 1e-3;
  cfg.seed = 3;

  OptimizeResult res = run_optimization(prob, cfg);
  CHECK(in_weight_set(g, res.edge_weights, cfg.epsilon));
  for (const auto& row : res.checkpoints) CHECK(row.feasibility < 1e-10);
}

TEST_CASE("symmetric mode refuses a floor-infeasible pair set") {
  // Diamond (K4 minus one edge): summing the node equations of the two
  // degree-3 nodes against the degree-2 ones forces the chord pair to zero,
  // so no symmetric policy keeps every pair above the floor.
  Graph g = make_graph(4, {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 3}, {3, 2},
                           {3, 0}, {0, 3}, {0, 2}, {2, 0}});
  Problem prob;
  prob.graph = &g;
  prob.objective = ConnectivityWeights::unit();
  prob.constraint = ConstraintMode::Symmetric;

  SpsaConfig cfg = quiet_config();
  cfg.iterations = 50;
  cfg.checkpoint_every = 25;
  CHECK_THROWS_AS(run_optimization(prob, cfg), InfeasibleError);
}

TEST_CASE("two-state optimum pushes the loops to the floor") {
  // S = 1/w(0,1) + 1/w(1,0): the minimum sits at the largest feasible
  // off-diagonal weights, S* = 2 / (1 - epsilon).
  Graph g = two_node_graph();
  Problem prob;
  prob.graph = &g;
  prob.objective = ConnectivityWeights::unit();

  SpsaConfig cfg;
  cfg.alpha = 1.0;
  cfg.alpha0 = 100.0;
  cfg.eta = 1e-4;
  cfg.epsilon = 1e-3;
  cfg.iterations = 3000;
  cfg.checkpoint_every = 500;
  cfg.tolerance = 1e-5;
  cfg.max_step_norm = 0.1;
  cfg.seed = 11;

  OptimizeResult res = run_optimization(prob, cfg);
  CHECK(res.objective > 1.9);
  CHECK(res.objective < 2.3);
  CHECK(res.edge_weights[1] > 0.8);
  CHECK(res.edge_weights[2] > 0.8);
}

TEST_CASE("rigid constraint set returns the single point") {
  Graph c3 = cycle_graph(3);
  Problem prob;
  prob.graph = &c3;
  prob.objective = ConnectivityWeights::unit();
  prob.constraint = ConstraintMode::Stationary;
  prob.target = Vector::Constant(3, 1.0 / 3.0);

  OptimizeResult res = run_optimization(prob, SpsaConfig{});
  CHECK(res.stop == StopReason::EmptyBasis);
  CHECK(res.dimension == 0);
  CHECK(res.objective == doctest::Approx(9.0).epsilon(1e-10));
  CHECK((res.edge_weights - Vector::Ones(3)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(res.checkpoints.size() == 1);

  // Same situation without the stationary pin: two nodes, no self-loops.
  Graph rigid = make_graph(2, {{0, 1}, {1, 0}});
  Problem p2;
  p2.graph = &rigid;
  p2.objective = ConnectivityWeights::unit();
  OptimizeResult r2 = run_optimization(p2, SpsaConfig{});
  CHECK(r2.stop == StopReason::EmptyBasis);
  CHECK(r2.objective == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("checkpoint schedule covers trailing partial windows") {
  Graph g = two_node_graph();
  Problem prob;
  prob.graph = &g;
  prob.objective = ConnectivityWeights::unit();

  SpsaConfig cfg = quiet_config();
  cfg.iterations = 7;
  cfg.checkpoint_every = 100;
  OptimizeResult res = run_optimization(prob, cfg);
  REQUIRE(res.checkpoints.size() == 1);
  CHECK(res.checkpoints[0].iteration == 7);
  CHECK(res.stop == StopReason::IterationLimit);

  cfg.iterations = 200;
  cfg.checkpoint_every = 50;
  res = run_optimization(prob, cfg);
  REQUIRE(res.checkpoints.size() == 4);
  CHECK(res.checkpoints.back().iteration == 200);

  cfg.iterations = 130;
  res = run_optimization(prob, cfg);
  REQUIRE(res.checkpoints.size() == 3);  // 50, 100, and the partial 130
  CHECK(res.checkpoints.back().iteration == 130);
}

TEST_CASE("convergence is only declared from the second checkpoint") {
  Graph g = two_node_graph();
  Problem prob;
  prob.graph = &g;
  prob.objective = ConnectivityWeights::unit();

  SpsaConfig cfg;
  cfg.iterations = 1000;
  cfg.checkpoint_every = 100;
  cfg.tolerance = 1e9;  // any pair of consecutive checkpoints qualifies
  OptimizeResult res = run_optimization(prob, cfg);
  CHECK(res.stop == StopReason::Converged);
  CHECK(res.iterations == 200);
  CHECK(res.checkpoints.size() == 2);
}

TEST_CASE("plain perturbations leave the stochastic set") {
  PerturbationDemo demo = standard_perturbation_example();
  Vector plus_want(3), minus_want(3);
  plus_want << 1.02, 1.00, 1.02;
  minus_want << 0.98, 1.00, 0.98;
  CHECK((demo.row_sums_plus - plus_want).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((demo.row_sums_minus - minus_want).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(demo.min_entry_plus == doctest::Approx(0.49).epsilon(1e-12));
  CHECK(demo.min_entry_minus == doctest::Approx(0.49).epsilon(1e-12));
  CHECK_FALSE(demo.plus_stochastic);
  CHECK_FALSE(demo.minus_stochastic);
  CHECK(demo.constrained_feasible);
  CHECK((demo.constrained_sums_plus - Vector::Ones(3)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("subspace perturbations keep the rows stochastic") {
  Graph g = complete_graph(3);
  ConstraintSystem sys = equality_system(g);
  Vector x = Vector::Constant(6, 0.5);
  auto rng = make_rng(21, 0);
  for (int t = 0; t < 100; ++t) {
    Vector u(sys.dim());
    for (int i = 0; i < u.size(); ++i) u[i] = rademacher(rng);
    PerturbationDemo d = standard_perturbation_demo(g, x, Vector(sys.basis * u), 0.01);
    CHECK(d.plus_stochastic);
    CHECK(d.minus_stochastic);
    CHECK(d.constrained_feasible);
  }
}

TEST_CASE("online support logs one realization per iteration") {
  Graph g = make_graph(3,
                       {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}},
                       {0});
  Problem prob;
  prob.graph = &g;
  prob.objective = ConnectivityWeights::unit();
  prob.support = SupportMode::Online;
  prob.failures.fail_prob = {0.3};

  SpsaConfig cfg = quiet_config();
  cfg.iterations = 60;
  cfg.checkpoint_every = 30;
  cfg.log_realizations = true;
  cfg.seed = 13;

  OptimizeResult a = run_optimization(prob, cfg);
  const auto& log = a.restarts[0].realization_log;
  REQUIRE(static_cast<long>(log.size()) == cfg.iterations);
  CHECK(log.front().first == 0);
  CHECK(log.back().first == 59);
  for (const auto& entry : log) REQUIRE(entry.second.size() == 1);

  int failures = 0;
  for (const auto& entry : log) failures += entry.second[0] ? 0 : 1;
  CHECK(failures > 5);   // q = 0.3 over 60 draws
  CHECK(failures < 40);

  OptimizeResult b = run_optimization(prob, cfg);
  CHECK(a.objective == b.objective);
  CHECK(b.restarts[0].realization_log == log);
}

TEST_CASE("random support demands risky edges") {
  Graph g = two_node_graph();
  Problem prob;
  prob.graph = &g;
  prob.objective = ConnectivityWeights::unit();
  prob.support = SupportMode::Random;
  CHECK_THROWS_AS(run_optimization(prob, SpsaConfig{}), std::invalid_argument);
}

}  // TEST_SUITE
