#include "doctest.h"

#include <cmath>
#include <functional>

#include "chainopt/analysis.hpp"
#include "chainopt/errors.hpp"
#include "chainopt/oracles.hpp"
#include "chainopt/random_support.hpp"
#include "helpers.hpp"

using namespace chainopt;
using namespace chainopt::testing;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Simpson quadrature of f against the standard normal density over [-8, 8].
double gauss_expect(const std::function<double(double)>& f) {
  const int n = 1600;
  const double lo = -8.0, hi = 8.0;
  const double h = (hi - lo) / n;
  double acc = 0.0;
  auto phi = [](double g) {
    return std::exp(-0.5 * g * g) / std::sqrt(2.0 * M_PI);
  };
  for (int i = 0; i <= n; ++i) {
    double g = lo + i * h;
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * f(g) * phi(g);
  }
  return acc * h / 3.0;
}

Graph k3_risky() {
  return make_graph(3, {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}, {0});
}

}  // namespace

TEST_SUITE("random_support") {

TEST_CASE("failed edges lose their mass to the survivors") {
  Graph g = k3_risky();
  Matrix P = transition_matrix(g, Vector::Constant(6, 0.5));
  FailureModel fm;
  fm.fail_prob = {0.5};
  Realization dead{{0}};
  Matrix Q = redistribute(P, g, fm, dead);
  CHECK(Q(0, 1) == 0.0);
  CHECK(Q(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((Q.bottomRows(2) - P.bottomRows(2)).cwiseAbs().maxCoeff() == 0.0);

  Realization alive{{1}};
  CHECK((redistribute(P, g, fm, alive) - P).cwiseAbs().maxCoeff() == 0.0);

  // A row holding all its mass on the failed edge cannot be renormalized.
  Matrix bad = P;
  bad.row(0) << 0.0, 1.0, 0.0;
  CHECK_THROWS_AS(redistribute(bad, g, fm, dead), NumericalError);

  Realization wrong{{1, 0}};
  CHECK_THROWS_AS(redistribute(P, g, fm, wrong), std::invalid_argument);
}

TEST_CASE("unit grouping and validation") {
  Graph g = undirected_cycle_graph(4);
  int e01 = *g.find_edge(0, 1);
  int e10 = *g.find_edge(1, 0);
  Graph risky = make_graph(4, g.edges, {e01, e10});

  FailureModel fm;
  fm.fail_prob = {0.5, 0.5};
  CHECK(failure_units(risky, fm).size() == 2);

  fm.couple_reciprocal = true;
  auto units = failure_units(risky, fm);
  REQUIRE(units.size() == 1);
  CHECK(units[0].size() == 2);

  fm.fail_prob = {0.5, 0.4};
  CHECK_THROWS_AS(failure_units(risky, fm), std::invalid_argument);

  fm.fail_prob = {0.5};
  CHECK_THROWS_AS(failure_units(risky, fm), std::invalid_argument);
  fm.fail_prob = {0.5, 1.5};
  CHECK_THROWS_AS(failure_units(risky, fm), std::invalid_argument);
}

TEST_CASE("pattern probabilities form a distribution") {
  Graph g = k3_risky();
  FailureModel fm;
  fm.fail_prob = {0.3};
  CHECK(realization_probability(g, fm, Realization{{1}}) == doctest::Approx(0.7));
  CHECK(realization_probability(g, fm, Realization{{0}}) == doctest::Approx(0.3));

  Graph pair = make_graph(4, undirected_cycle_graph(4).edges,
                          {*undirected_cycle_graph(4).find_edge(0, 1),
                           *undirected_cycle_graph(4).find_edge(1, 0)});
  FailureModel coupled;
  coupled.fail_prob = {0.25, 0.25};
  coupled.couple_reciprocal = true;
  CHECK(realization_probability(pair, coupled, Realization{{0, 0}}) ==
        doctest::Approx(0.25));
  CHECK(realization_probability(pair, coupled, Realization{{1, 1}}) ==
        doctest::Approx(0.75));
  CHECK_THROWS_AS(realization_probability(pair, coupled, Realization{{1, 0}}),
                  std::invalid_argument);
}

TEST_CASE("exact expectation agrees with a first-principles enumeration") {
  // Risky slots: edge (0,1) and edge (1,2); the rest keeps the graph strong.
  Graph g = make_graph(3, {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}, {0, 3});
  Vector x(6);
  x << 0.6, 0.4, 0.3, 0.7, 0.5, 0.5;
  FailureModel fm;
  fm.fail_prob = {0.2, 0.4};
  ConnectivityWeights C = ConnectivityWeights::unit();

  double got = expected_objective(g, x, C, fm);

  // Re-derive through the first-step oracle, pattern by pattern.
  Matrix P = transition_matrix(g, x);
  double want = 0.0;
  for (int mask = 0; mask < 4; ++mask) {
    Realization r{{static_cast<std::uint8_t>(!(mask & 1)),
                   static_cast<std::uint8_t>(!(mask & 2))}};
    double prob = ((mask & 1) ? 0.2 : 0.8) * ((mask & 2) ? 0.4 : 0.6);
    Matrix M = mfpt_first_step(redistribute(P, g, fm, r));
    want += prob * (M.sum() - M.trace());
  }
  CHECK(got == doctest::Approx(want).epsilon(1e-10));

  FailureModel corr = fm;
  corr.correlated = true;
  corr.rho = 0.5;
  CHECK_THROWS_AS(expected_objective(g, x, C, corr), std::invalid_argument);
  CHECK_THROWS_AS(expected_objective(g, x, C, fm, 1), std::invalid_argument);
  CHECK_THROWS_AS(realization_probability(g, corr, Realization{{1, 1}}),
                  std::invalid_argument);
}

TEST_CASE("coupled symmetric failures keep the chain reversible") {
  Graph g = undirected_cycle_graph(4);
  Graph risky = make_graph(4, g.edges, {*g.find_edge(0, 1), *g.find_edge(1, 0)});
  FailureModel fm;
  fm.fail_prob = {0.5, 0.5};
  fm.couple_reciprocal = true;

  Matrix P = transition_matrix(risky, Vector::Constant(8, 0.5));
  Realization both_dead{{0, 0}};
  Matrix Q = redistribute(P, risky, fm, both_dead);
  Vector pi = stationary_distribution(Q);
  CHECK(check_reversible(Q, pi, 1e-12));
}

TEST_CASE("sampled frequencies match the model") {
  Graph g = k3_risky();
  FailureModel fm;
  fm.fail_prob = {0.25};
  auto rng = make_rng(314, 0);
  const int n = 20000;
  auto draws = sample_realizations(g, fm, n, rng);
  int fails = 0;
  for (const auto& r : draws) fails += r.survives[0] ? 0 : 1;
  double freq = double(fails) / n;
  double sigma = std::sqrt(0.25 * 0.75 / n);
  CHECK(std::abs(freq - 0.25) < 4.0 * sigma);
}

TEST_CASE("correlated sampling matches quadrature") {
  Graph g = undirected_cycle_graph(4);
  Graph risky = make_graph(4, g.edges, {*g.find_edge(0, 1), *g.find_edge(2, 3)});
  FailureModel fm;
  fm.fail_prob = {0.3, 0.3};
  fm.correlated = true;
  fm.rho = 0.5;

  const double t = inverse_normal_cdf(0.3);
  double joint_want = gauss_expect([&](double gcommon) {
    double c = normal_cdf((t - std::sqrt(fm.rho) * gcommon) / std::sqrt(1.0 - fm.rho));
    return c * c;
  });
  CHECK(joint_want > 0.3 * 0.3 + 0.02);  // positive correlation lifts the joint rate

  auto rng = make_rng(2718, 0);
  const int n = 20000;
  auto draws = sample_realizations(risky, fm, n, rng);
  int f0 = 0, f1 = 0, both = 0;
  for (const auto& r : draws) {
    f0 += r.survives[0] ? 0 : 1;
    f1 += r.survives[1] ? 0 : 1;
    both += (!r.survives[0] && !r.survives[1]) ? 1 : 0;
  }
  double sig_marg = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::abs(f0 / double(n) - 0.3) < 4.0 * sig_marg);
  CHECK(std::abs(f1 / double(n) - 0.3) < 4.0 * sig_marg);
  double sig_joint = std::sqrt(joint_want * (1.0 - joint_want) / n);
  CHECK(std::abs(both / double(n) - joint_want) < 4.0 * sig_joint);

  fm.rho = 1.0;
  CHECK_THROWS_AS(sample_realizations(risky, fm, 1, rng), std::invalid_argument);
}

TEST_CASE("normal quantile function") {
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
  for (double p : {1e-9, 0.02, 0.3, 0.6, 0.999, 1.0 - 1e-9}) {
    double x = inverse_normal_cdf(p);
    CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-11));
  }
  CHECK(std::isinf(inverse_normal_cdf(0.0)));
  CHECK(std::isinf(inverse_normal_cdf(1.0)));
  CHECK_THROWS_AS(inverse_normal_cdf(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(inverse_normal_cdf(1.1), std::invalid_argument);
}

TEST_CASE("common random numbers shrink difference noise") {
  Graph g = k3_risky();
  FailureModel fm;
  fm.fail_prob = {0.5};
  ConnectivityWeights C = ConnectivityWeights::unit();
  ConstraintSystem sys = equality_system(g);

  Vector x1 = Vector::Constant(6, 0.5);
  Vector x2 = x1 + 0.05 * sys.basis.col(0);
  Matrix P1 = transition_matrix(g, x1);
  Matrix P2 = transition_matrix(g, x2);

  auto rng = make_rng(99, 0);
  const int reps = 200;
  std::vector<double> crn(reps), indep(reps);
  for (int t = 0; t < reps; ++t) {
    auto shared = sample_realizations(g, fm, 8, rng);
    auto other = sample_realizations(g, fm, 8, rng);
    crn[t] = sample_average_objective(P2, g, C, fm, shared) -
             sample_average_objective(P1, g, C, fm, shared);
    indep[t] = sample_average_objective(P2, g, C, fm, other) -
               sample_average_objective(P1, g, C, fm, shared);
  }
  auto variance = [&](const std::vector<double>& v) {
    double mean = 0.0;
    for (double d : v) mean += d;
    mean /= v.size();
    double acc = 0.0;
    for (double d : v) acc += (d - mean) * (d - mean);
    return acc / (v.size() - 1);
  };
  CHECK(variance(crn) < 0.25 * variance(indep));
}

TEST_CASE("expected stationary mass drifts away from the design point") {
  // Uniform two-state chain with a risky self-loop at node 0, q = 1/2. The
  // surviving-support chain has pi = (1/3, 2/3), so on average the agent
  // sits at (5/12, 7/12) although the design pins (1/2, 1/2).
  Graph g = make_graph(2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0});
  Vector x = Vector::Constant(4, 0.5);
  FailureModel fm;
  fm.fail_prob = {0.5};

  Matrix P = transition_matrix(g, x);
  CHECK((stationary_distribution(P) - Vector::Constant(2, 0.5)).cwiseAbs().maxCoeff() <
        1e-12);

  Vector epi = Vector::Zero(2);
  for (int fail = 0; fail < 2; ++fail) {
    Realization r{{static_cast<std::uint8_t>(1 - fail)}};
    epi += 0.5 * stationary_distribution(redistribute(P, g, fm, r));
  }
  CHECK(epi[0] == doctest::Approx(5.0 / 12.0).epsilon(1e-12));
  CHECK(epi[1] == doctest::Approx(7.0 / 12.0).epsilon(1e-12));
  CHECK((epi - Vector::Constant(2, 0.5)).cwiseAbs().maxCoeff() ==
        doctest::Approx(1.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("zero failure probability reproduces the fixed support") {
  Graph g = k3_risky();
  Vector x = Vector::Constant(6, 0.5);
  FailureModel fm;
  fm.fail_prob = {0.0};
  ConnectivityWeights C = ConnectivityWeights::unit();

  double exact = connectivity_objective(transition_matrix(g, x), C);
  CHECK(expected_objective(g, x, C, fm) == doctest::Approx(exact).epsilon(1e-12));

  auto rng = make_rng(1, 0);
  auto batch = sample_realizations(g, fm, 32, rng);
  for (const auto& r : batch) CHECK(r.survives[0] == 1);
  CHECK(sample_average_objective(transition_matrix(g, x), g, C, fm, batch) ==
        doctest::Approx(exact).epsilon(1e-12));
}

}  // TEST_SUITE
