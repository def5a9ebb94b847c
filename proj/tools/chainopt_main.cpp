// Command-line front end: analyze chains, run the constrained optimizer,
// project weight vectors, simulate patrols, and cross-check the numerics.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "chainopt/analysis.hpp"
#include "chainopt/derivatives.hpp"
#include "chainopt/errors.hpp"
#include "chainopt/io.hpp"
#include "chainopt/oracles.hpp"
#include "chainopt/projections.hpp"
#include "chainopt/rng.hpp"
#include "chainopt/spsa.hpp"
#include "chainopt/surveillance.hpp"

namespace {

using namespace chainopt;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;       // bad flags or malformed input
constexpr int kExitInfeasible = 3;  // constraint system admits no solution
constexpr int kExitNumerical = 4;   // numerical failure or broken check

Vector parse_target(const std::string& text, int nodes) {
  if (text == "uniform") return Vector::Constant(nodes, 1.0 / nodes);
  std::stringstream ss(text);
  std::vector<double> vals;
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
  if (static_cast<int>(vals.size()) != nodes)
    throw std::invalid_argument("target distribution needs one entry per node");
  Vector t(nodes);
  for (int i = 0; i < nodes; ++i) t[i] = vals[i];
  return t;
}

ConnectivityWeights build_objective(const RunSettings& s, int nodes) {
  switch (s.objective) {
    case ConnectivityMode::Unit:
      return ConnectivityWeights::unit();
    case ConnectivityMode::Kemeny:
      return ConnectivityWeights::kemeny();
    case ConnectivityMode::TargetPi:
      return ConnectivityWeights::target_pi(
          s.target_uniform ? Vector(Vector::Constant(nodes, 1.0 / nodes)) : s.target);
    case ConnectivityMode::Custom:
      if (s.custom.rows() == 0)
        throw std::invalid_argument("custom objective selected but no matrix given");
      return ConnectivityWeights::custom_matrix(s.custom);
  }
  throw std::invalid_argument("unknown objective");
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

struct CommonOpts {
  std::string graph_path;
  std::string weights_path;
  std::string weights_value;  // "uniform" or "random" instead of a file
};

Vector resolve_weights(const CommonOpts& opts, const GraphFile& gf) {
  if (!opts.weights_path.empty())
    return read_weights(opts.weights_path, gf.graph, gf.hash);
  if (opts.weights_value == "uniform" || opts.weights_value.empty())
    return uniform_weights(gf.graph);
  if (opts.weights_value == "random") {
    auto rng = make_rng(7, 7);
    Vector x(gf.graph.edge_count());
    for (int e = 0; e < x.size(); ++e) x[e] = 0.05 + u01(rng);
    return x;
  }
  throw std::invalid_argument("weights-value must be uniform or random");
}

int cmd_analyze(const CommonOpts& common, const std::string& objective,
                const std::string& target, int precision) {
  GraphFile gf = load_graph(common.graph_path);
  Vector x = resolve_weights(common, gf);
  ChainAnalytics a = analyze_chain(transition_matrix(gf.graph, x));

  RunSettings s;
  s.objective = parse_connectivity_mode(objective);
  if (s.objective == ConnectivityMode::TargetPi) {
    s.target_uniform = false;
    s.target = parse_target(target, gf.graph.nodes);
  }
  ConnectivityWeights C = build_objective(s, gf.graph.nodes);

  std::cout.precision(precision);
  std::cout << "graph " << gf.name << ": " << gf.graph.nodes << " nodes, "
            << gf.graph.edge_count() << " edges, " << gf.graph.risky.size()
            << " risky (hash " << gf.hash << ")\n";
  std::cout << "stationary distribution:\n";
  for (int i = 0; i < gf.graph.nodes; ++i)
    std::cout << "  node " << i + 1 << ": " << a.pi[i] << "\n";
  std::cout << "kemeny constant: " << kemeny_constant(a.P) << "\n";
  std::cout << "objective (" << objective << "): " << connectivity_objective(a, C) << "\n";
  bool reversible = check_reversible(a.P, a.pi, 1e-9);
  std::cout << "reversible: " << (reversible ? "yes" : "no") << "\n";
  if (is_symmetric_weights(gf.graph, x))
    std::cout << "total effective resistance: " << effective_resistance_total(gf.graph, x)
              << "\n";
  return kExitOk;
}

int cmd_optimize(const CommonOpts& common, const std::string& config_path,
                 const std::string& out_dir, std::optional<std::uint64_t> seed,
                 std::optional<int> restarts, std::optional<int> threads,
                 std::optional<long> iterations, const std::string& constraint,
                 const std::string& support, bool log_realizations) {
  GraphFile gf = load_graph(common.graph_path);
  RunSettings settings = load_run_settings(config_path);
  if (seed) settings.spsa.seed = *seed;
  if (restarts) settings.spsa.restarts = *restarts;
  if (threads) settings.spsa.threads = *threads;
  if (iterations) settings.spsa.iterations = *iterations;
  if (!constraint.empty()) settings.constraint = parse_constraint_mode(constraint);
  if (!support.empty()) settings.support = parse_support_mode(support);
  if (log_realizations) settings.spsa.log_realizations = true;

  Problem prob;
  prob.graph = &gf.graph;
  prob.objective = build_objective(settings, gf.graph.nodes);
  prob.constraint = settings.constraint;
  if (settings.constraint == ConstraintMode::Stationary)
    prob.target =
        settings.target_uniform ? Vector(Vector::Constant(gf.graph.nodes, 1.0 / gf.graph.nodes))
                                : settings.target;
  prob.support = settings.support;
  prob.failures = gf.failures;

  OptimizeResult res = run_optimization(prob, settings.spsa);

  std::filesystem::create_directories(out_dir);
  std::vector<std::string> outputs;
  auto emit = [&](const std::string& name, const std::string& text) {
    std::string path = join_path(out_dir, name);
    write_text(path, text);
    outputs.push_back(path);
  };
  emit("trace.csv", format_trace(res.checkpoints));
  emit("timings.csv", format_timings(res.checkpoints));
  emit("weights.txt", format_weights(gf.graph, gf.hash, res.edge_weights));
  if (settings.spsa.log_realizations) {
    std::ostringstream log;
    log << "iteration,survives\n";
    for (const auto& [iter, bits] : res.restarts[res.best_restart].realization_log) {
      log << iter << ",";
      for (auto b : bits) log << (b ? '1' : '0');
      log << "\n";
    }
    emit("realizations.csv", log.str());
  }
  emit("manifest.json",
       format_manifest("optimize", common.graph_path, gf.hash, settings, outputs));

  std::cout << "graph " << gf.name << ": " << gf.graph.nodes << " nodes, "
            << gf.graph.edge_count() << " edges\n";
  std::cout << "constraint " << to_string(settings.constraint) << ", support "
            << to_string(settings.support) << ", objective " << to_string(settings.objective)
            << "\n";
  std::cout << "feasible directions: " << res.dimension << "\n";
  std::cout << "restart objectives:";
  for (double v : res.restart_objectives) std::cout << " " << v;
  std::cout << "\n";
  std::cout << "best restart: " << res.best_restart << " (" << to_string(res.stop) << " after "
            << res.iterations << " iterations)\n";
  std::cout << "final objective: " << res.objective << "\n";
  if (res.dykstra_warnings > 0)
    std::cout << "warning: " << res.dykstra_warnings
              << " projections hit the iteration cap; results use the best iterate\n";
  std::cout << "outputs:";
  for (const auto& p : outputs) std::cout << " " << p;
  std::cout << "\n";
  return kExitOk;
}

int cmd_project(const CommonOpts& common, const std::string& constraint,
                const std::string& target, double epsilon, const std::string& out_file) {
  GraphFile gf = load_graph(common.graph_path);
  Vector x = resolve_weights(common, gf);
  ConstraintMode mode = parse_constraint_mode(constraint);

  Vector projected;
  if (mode == ConstraintMode::Simplex) {
    projected = project_blockwise_simplex(gf.graph, x, epsilon);
    std::cout << "projection: blockwise scaled simplex\n";
  } else if (mode == ConstraintMode::Stationary) {
    ConstraintSystem sys = stationary_system(gf.graph, parse_target(target, gf.graph.nodes));
    DykstraResult r = dykstra_project(x, sys, epsilon, 1.0);
    std::cout << "projection: alternating (box/affine), " << r.iterations << " sweeps"
              << (r.converged ? "" : " [hit iteration cap]") << "\n";
    projected = r.point;
  } else {
    PairSpace ps = pair_space(gf.graph);
    ConstraintSystem sys = pair_equality_system(gf.graph, ps);
    DykstraResult r = dykstra_project(ps.restrict_to(x), sys, epsilon, 1.0);
    std::cout << "projection: reciprocal-pair alternating (box/affine), " << r.iterations
              << " sweeps" << (r.converged ? "" : " [hit iteration cap]") << "\n";
    projected = ps.expand(r.point);
  }
  double moved = (projected - x).norm();
  std::cout << "distance moved: " << moved << "\n";
  std::cout << "feasible (floor " << epsilon
            << "): " << (in_weight_set(gf.graph, projected, epsilon, 1e-8) ? "yes" : "no")
            << "\n";
  if (!out_file.empty()) {
    write_weights(out_file, gf.graph, gf.hash, projected);
    std::cout << "wrote " << out_file << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const CommonOpts& common, SimulationSpec spec, const std::string& support,
                 const std::string& out_dir) {
  GraphFile gf = load_graph(common.graph_path);
  Vector x = resolve_weights(common, gf);
  spec.random_support = parse_support_mode(support) != SupportMode::Fixed;
  if (spec.random_support && gf.failures.empty())
    throw std::invalid_argument("graph has no risky edges; use --support fixed");

  SimulationStats stats =
      simulate_surveillance(gf.graph, x, spec, gf.failures.empty() ? nullptr : &gf.failures);

  std::cout << "replications: " << spec.replications << ", intruders: " << spec.intruders
            << ", residence: " << spec.residence << "\n";
  std::cout << "capture % mean: " << stats.mean << "\n";
  std::cout << "capture % min/max: " << stats.min << " / " << stats.max << "\n";
  std::cout << "capture % stddev: " << stats.stddev << "\n";
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ostringstream csv;
    csv << "replication,capture_pct\n";
    for (std::size_t i = 0; i < stats.per_replication.size(); ++i)
      csv << i << "," << stats.per_replication[i] << "\n";
    std::string path = join_path(out_dir, "captures.csv");
    write_text(path, csv.str());
    std::cout << "wrote " << path << "\n";
  }
  return kExitOk;
}

int cmd_expected(const CommonOpts& common, const std::string& objective,
                 const std::string& target, int max_units) {
  GraphFile gf = load_graph(common.graph_path);
  if (gf.failures.empty())
    throw std::invalid_argument("graph has no risky edges; nothing to average over");
  Vector x = resolve_weights(common, gf);

  RunSettings s;
  s.objective = parse_connectivity_mode(objective);
  if (s.objective == ConnectivityMode::TargetPi) {
    s.target_uniform = false;
    s.target = parse_target(target, gf.graph.nodes);
  }
  ConnectivityWeights C = build_objective(s, gf.graph.nodes);

  double expected = expected_objective(gf.graph, x, C, gf.failures, max_units);
  std::cout << "exact expected objective: " << expected << "\n";

  auto units = failure_units(gf.graph, gf.failures);
  if (units.size() <= 6) {
    Matrix P = transition_matrix(gf.graph, x);
    std::cout << "survival pattern -> probability, objective\n";
    for (std::uint64_t mask = 0; mask < (1ULL << units.size()); ++mask) {
      Realization r;
      r.survives.assign(gf.graph.risky.size(), 1);
      for (std::size_t u = 0; u < units.size(); ++u)
        if ((mask >> u) & 1ULL)
          for (int slot : units[u]) r.survives[slot] = 0;
      double p = realization_probability(gf.graph, gf.failures, r);
      std::cout << "  ";
      for (auto b : r.survives) std::cout << (b ? '1' : '0');
      std::cout << " -> " << p << ", "
                << connectivity_objective(redistribute(P, gf.graph, gf.failures, r), C) << "\n";
    }
  }
  return kExitOk;
}

int cmd_verify() {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << detail << ")\n";
    if (!ok) ++failures;
  };
  auto rng = make_rng(12345, 0);

  auto random_chain = [&](int n) {
    Matrix P(n, n);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        P(i, j) = 0.05 + u01(rng);
        s += P(i, j);
      }
      P.row(i) /= s;
    }
    return P;
  };

  {
    double worst = 0.0;
    for (int t = 0; t < 25; ++t) {
      int n = 3 + static_cast<int>(u01(rng) * 6);
      Matrix P = random_chain(n);
      Matrix M = analyze_chain(P).mfpt;
      Matrix M0 = mfpt_first_step(P);
      worst = std::max(worst, ((M - M0).cwiseAbs().cwiseQuotient(M0.cwiseAbs())).maxCoeff());
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "25 chains, max rel err %.2e", worst);
    report("passage-times-vs-first-step", worst < 1e-8, buf);
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 25; ++t) {
      Matrix P = random_chain(4 + static_cast<int>(u01(rng) * 4));
      ChainAnalytics a = analyze_chain(P);
      worst = std::max(worst,
                       std::abs(kemeny_constant(P) - (a.deviation.trace() + 1.0)));
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "25 chains, max abs err %.2e", worst);
    report("kemeny-vs-deviation-trace", worst < 1e-9, buf);
  }
  {
    // Directional derivative against central finite differences.
    std::vector<Edge> edges;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) edges.push_back({i, j});
    Graph g = make_graph(4, edges);
    ConstraintSystem sys = equality_system(g);
    ConnectivityWeights C = ConnectivityWeights::unit();
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      Vector x(g.edge_count());
      for (int e = 0; e < x.size(); ++e) x[e] = 0.1 + u01(rng);
      x = project_blockwise_simplex(g, x, 1e-3);
      Vector u(sys.dim());
      for (int i = 0; i < u.size(); ++i) u[i] = rademacher(rng);
      Vector d = sys.basis * u;
      d /= d.norm();
      ChainAnalytics a = analyze_chain(transition_matrix(g, x));
      double analytic = objective_directional_derivative(
          a, directional_derivatives(a, transition_direction(g, x, d)), C);
      auto f = [&](const Vector& v) {
        return connectivity_objective(transition_matrix(g, v), C);
      };
      double fd = finite_difference_directional(f, x, d, 1e-6);
      worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "10 directions, max rel err %.2e", worst);
    report("objective-derivative-vs-finite-difference", worst < 1e-5, buf);
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      int n = 2 + static_cast<int>(u01(rng) * 5);
      Vector v(n);
      for (int i = 0; i < n; ++i) v[i] = -0.5 + 2.0 * u01(rng);
      Vector a = project_scaled_simplex(v, 0.01);
      Vector b = simplex_projection_active_set(v, 0.01);
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "20 cases, max abs err %.2e", worst);
    report("simplex-projection-vs-active-set", worst < 1e-8, buf);
  }
  {
    Matrix A(1, 2);
    A << 1.0, 1.0;
    Vector b(1);
    b << 1.0;
    ConstraintSystem sys;
    sys.A = A;
    sys.b = b;
    sys.basis = nullspace_basis(A);
    sys.least_norm = Vector::Constant(2, 0.5);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      Vector v(2);
      v << -1.0 + 3.0 * u01(rng), -1.0 + 3.0 * u01(rng);
      Vector got = dykstra_project(v, sys, 0.1, 0.9).point;
      Vector want = box_affine_projection_active_set(v, A, b, 0.1, 0.9);
      worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "10 cases, max abs err %.2e", worst);
    report("alternating-projection-vs-active-set", worst < 1e-6, buf);
  }
  {
    bool ok = true;
    for (int n = 3; n <= 10; ++n) {
      std::vector<Edge> edges;
      for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
      Graph cyc = make_graph(n, edges);
      double s = connectivity_objective(transition_matrix(cyc, uniform_weights(cyc)),
                                        ConnectivityWeights::unit());
      if (std::abs(s - hamiltonian_tour_objective(n)) > 1e-9 * s) ok = false;
      if (!(hamiltonian_tour_objective(n) < reversible_objective_lower_bound(n))) ok = false;
    }
    report("tour-closed-forms", ok, "cycles n=3..10");
  }
  {
    PerturbationDemo demo = standard_perturbation_example();
    bool ok = std::abs(demo.row_sums_plus[0] - 1.02) < 1e-12 &&
              std::abs(demo.row_sums_plus[1] - 1.00) < 1e-12 &&
              std::abs(demo.row_sums_plus[2] - 1.02) < 1e-12 && !demo.plus_stochastic &&
              demo.constrained_feasible;
    report("perturbation-feasibility-demo", ok, "complete 3-graph");
  }

  std::cout << (failures == 0 ? "all checks passed\n" : "checks failed\n");
  return failures == 0 ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chainopt: connectivity analysis and optimization of Markov chains on graphs"};
  app.set_version_flag("--version", "chainopt 0.1.0");
  app.require_subcommand(1);

  CommonOpts common;
  std::string objective = "unit";
  std::string target = "uniform";
  std::string constraint = "simplex";
  std::string support = "fixed";
  std::string config_path;
  std::string out_dir = ".";
  std::string out_file;
  double epsilon = 1e-4;
  int precision = 10;
  int max_units = 20;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> restarts_override;
  std::optional<int> threads_override;
  std::optional<long> iterations_override;
  bool log_realizations = false;
  SimulationSpec sim;
  bool no_capture_on_appearance = false;

  auto add_graph = [&](CLI::App* cmd) {
    cmd->add_option("--graph", common.graph_path, "graph JSON file")
        ->envname("CHAINOPT_GRAPH")
        ->required();
  };
  auto add_weights = [&](CLI::App* cmd, bool required) {
    auto* o = cmd->add_option("--weights", common.weights_path, "weight vector file");
    cmd->add_option("--weights-value", common.weights_value,
                    "uniform or random instead of a file");
    if (required) o->excludes("--weights-value");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "stationary distribution, passage times");
  add_graph(analyze);
  add_weights(analyze, false);
  analyze->add_option("--objective", objective, "unit | kemeny | target_pi");
  analyze->add_option("--target-pi", target, "uniform or comma-separated distribution");
  analyze->add_option("--precision", precision, "output digits");

  CLI::App* optimize = app.add_subcommand("optimize", "constrained stochastic optimization");
  add_graph(optimize);
  optimize->add_option("--config", config_path, "run configuration JSON")
      ->envname("CHAINOPT_CONFIG")
      ->required();
  optimize->add_option("--out", out_dir, "output directory")->envname("CHAINOPT_OUT");
  optimize->add_option("--seed", seed_override, "override config seed")
      ->envname("CHAINOPT_SEED");
  optimize->add_option("--restarts", restarts_override, "override restart count");
  optimize->add_option("--threads", threads_override, "worker cap")
      ->envname("CHAINOPT_THREADS");
  optimize->add_option("--iterations", iterations_override, "override iteration cap");
  std::string constraint_override, support_override;
  optimize->add_option("--constraint", constraint_override,
                       "override: simplex | stationary | symmetric");
  optimize->add_option("--support", support_override, "override: fixed | random | online");
  optimize->add_flag("--log-realizations", log_realizations,
                     "record per-iteration survival bits (online support)");

  CLI::App* project = app.add_subcommand("project", "project weights onto a feasible set");
  add_graph(project);
  add_weights(project, false);
  project->add_option("--constraint", constraint, "simplex | stationary | symmetric");
  project->add_option("--target-pi", target, "uniform or comma-separated distribution");
  project->add_option("--epsilon", epsilon, "weight floor");
  project->add_option("--out-file", out_file, "write the projected weights here");

  CLI::App* simulate = app.add_subcommand("simulate", "patrol capture simulation");
  add_graph(simulate);
  add_weights(simulate, false);
  simulate->add_option("--intruders", sim.intruders, "intruders per replication");
  simulate->add_option("--residence", sim.residence, "instants each intruder stays");
  simulate->add_option("--replications", sim.replications, "independent replications");
  simulate->add_option("--seed", sim.seed, "simulation seed")->envname("CHAINOPT_SEED");
  simulate->add_option("--threads", sim.threads, "worker cap")->envname("CHAINOPT_THREADS");
  simulate->add_option("--support", support, "fixed | random");
  simulate->add_flag("--no-capture-on-appearance", no_capture_on_appearance,
                     "ignore co-location at the arrival instant");
  simulate->add_flag("--reset-agent", sim.reset_agent_per_intruder,
                     "redraw the agent position per intruder");
  simulate->add_option("--out", out_dir, "write per-replication captures here");

  CLI::App* expected = app.add_subcommand("expected", "exact failure-averaged objective");
  add_graph(expected);
  add_weights(expected, false);
  expected->add_option("--objective", objective, "unit | kemeny | target_pi");
  expected->add_option("--target-pi", target, "uniform or comma-separated distribution");
  expected->add_option("--max-units", max_units, "enumeration guard");

  CLI::App* verify = app.add_subcommand("verify", "cross-check numerics against oracles");

  try {
    app.parse(argc, argv);
    if (analyze->parsed())
      return cmd_analyze(common, objective, target, precision);
    if (optimize->parsed())
      return cmd_optimize(common, config_path, out_dir, seed_override, restarts_override,
                          threads_override, iterations_override, constraint_override,
                          support_override, log_realizations);
    if (project->parsed()) return cmd_project(common, constraint, target, epsilon, out_file);
    if (simulate->parsed()) {
      sim.capture_on_appearance = !no_capture_on_appearance;
      return cmd_simulate(common, sim, support, simulate->count("--out") ? out_dir : "");
    }
    if (expected->parsed()) return cmd_expected(common, objective, target, max_units);
    if (verify->parsed()) return cmd_verify();
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
