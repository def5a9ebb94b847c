// Python bindings for the core operations: chain analytics, constraint
// systems, projections, the optimizer, failure averaging and the patrol
// simulation. Objective weightings are passed as (mode, target, custom)
// triples instead of the C++ weight struct.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <utility>

#include "chainopt/analysis.hpp"
#include "chainopt/constraints.hpp"
#include "chainopt/derivatives.hpp"
#include "chainopt/errors.hpp"
#include "chainopt/graph.hpp"
#include "chainopt/io.hpp"
#include "chainopt/oracles.hpp"
#include "chainopt/projections.hpp"
#include "chainopt/random_support.hpp"
#include "chainopt/spsa.hpp"
#include "chainopt/surveillance.hpp"

namespace py = pybind11;
using namespace chainopt;

namespace {

ConnectivityWeights build_weights(ConnectivityMode mode, const std::optional<Vector>& target,
                                  const std::optional<Matrix>& custom) {
  switch (mode) {
    case ConnectivityMode::Unit:
      return ConnectivityWeights::unit();
    case ConnectivityMode::Kemeny:
      return ConnectivityWeights::kemeny();
    case ConnectivityMode::TargetPi:
      if (!target)
        throw std::invalid_argument("target_pi objective needs a target distribution");
      return ConnectivityWeights::target_pi(*target);
    case ConnectivityMode::Custom:
      if (!custom) throw std::invalid_argument("custom objective needs a weight matrix");
      return ConnectivityWeights::custom_matrix(*custom);
  }
  throw std::invalid_argument("unknown connectivity mode");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Connectivity analysis and constrained stochastic optimization for Markov chains";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::enum_<ConnectivityMode>(m, "ConnectivityMode")
      .value("Unit", ConnectivityMode::Unit)
      .value("Kemeny", ConnectivityMode::Kemeny)
      .value("TargetPi", ConnectivityMode::TargetPi)
      .value("Custom", ConnectivityMode::Custom);

  py::enum_<ConstraintMode>(m, "ConstraintMode")
      .value("Simplex", ConstraintMode::Simplex)
      .value("Stationary", ConstraintMode::Stationary)
      .value("Symmetric", ConstraintMode::Symmetric);

  py::enum_<SupportMode>(m, "SupportMode")
      .value("Fixed", SupportMode::Fixed)
      .value("Random", SupportMode::Random)
      .value("Online", SupportMode::Online);

  py::enum_<StopReason>(m, "StopReason")
      .value("Converged", StopReason::Converged)
      .value("IterationLimit", StopReason::IterationLimit)
      .value("EmptyBasis", StopReason::EmptyBasis);

  py::class_<Graph>(m, "Graph")
      .def_readonly("nodes", &Graph::nodes)
      .def_readonly("risky", &Graph::risky)
      .def_property_readonly("edges",
                             [](const Graph& g) {
                               std::vector<std::pair<int, int>> out;
                               out.reserve(g.edges.size());
                               for (const Edge& e : g.edges) out.emplace_back(e.from, e.to);
                               return out;
                             })
      .def("edge_count", &Graph::edge_count)
      .def("find_edge", &Graph::find_edge, py::arg("from_node"), py::arg("to_node"));

  py::class_<ChainAnalytics>(m, "ChainAnalytics")
      .def_readonly("P", &ChainAnalytics::P)
      .def_readonly("pi", &ChainAnalytics::pi)
      .def_readonly("projector", &ChainAnalytics::projector)
      .def_readonly("deviation", &ChainAnalytics::deviation)
      .def_readonly("mfpt", &ChainAnalytics::mfpt);

  py::class_<ConstraintSystem>(m, "ConstraintSystem")
      .def_readonly("A", &ConstraintSystem::A)
      .def_readonly("b", &ConstraintSystem::b)
      .def_readonly("basis", &ConstraintSystem::basis)
      .def_readonly("least_norm", &ConstraintSystem::least_norm)
      .def_readonly("rank", &ConstraintSystem::rank)
      .def("dim", &ConstraintSystem::dim);

  py::class_<DescentDirection>(m, "DescentDirection")
      .def_readonly("raw", &DescentDirection::raw)
      .def_readonly("unit", &DescentDirection::unit)
      .def_readonly("coefficients", &DescentDirection::coefficients);

  py::class_<FailureModel>(m, "FailureModel")
      .def(py::init<>())
      .def_readwrite("fail_prob", &FailureModel::fail_prob)
      .def_readwrite("couple_reciprocal", &FailureModel::couple_reciprocal)
      .def_readwrite("correlated", &FailureModel::correlated)
      .def_readwrite("rho", &FailureModel::rho)
      .def("empty", &FailureModel::empty);

  py::class_<SpsaConfig>(m, "SpsaConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &SpsaConfig::alpha)
      .def_readwrite("alpha0", &SpsaConfig::alpha0)
      .def_readwrite("gamma_alpha", &SpsaConfig::gamma_alpha)
      .def_readwrite("eta", &SpsaConfig::eta)
      .def_readwrite("gamma_eta", &SpsaConfig::gamma_eta)
      .def_readwrite("epsilon", &SpsaConfig::epsilon)
      .def_readwrite("epsilon_decay", &SpsaConfig::epsilon_decay)
      .def_readwrite("iterations", &SpsaConfig::iterations)
      .def_readwrite("checkpoint_every", &SpsaConfig::checkpoint_every)
      .def_readwrite("tolerance", &SpsaConfig::tolerance)
      .def_readwrite("max_step_norm", &SpsaConfig::max_step_norm)
      .def_readwrite("restarts", &SpsaConfig::restarts)
      .def_readwrite("seed", &SpsaConfig::seed)
      .def_readwrite("threads", &SpsaConfig::threads)
      .def_readwrite("batch_size", &SpsaConfig::batch_size)
      .def_readwrite("eval_batch", &SpsaConfig::eval_batch)
      .def_readwrite("sample_stride", &SpsaConfig::sample_stride)
      .def_readwrite("log_realizations", &SpsaConfig::log_realizations);

  py::class_<OptimizeResult>(m, "OptimizeResult")
      .def_readonly("variables", &OptimizeResult::variables)
      .def_readonly("edge_weights", &OptimizeResult::edge_weights)
      .def_readonly("objective", &OptimizeResult::objective)
      .def_readonly("stop", &OptimizeResult::stop)
      .def_readonly("best_restart", &OptimizeResult::best_restart)
      .def_readonly("iterations", &OptimizeResult::iterations)
      .def_readonly("restart_objectives", &OptimizeResult::restart_objectives)
      .def_readonly("dykstra_warnings", &OptimizeResult::dykstra_warnings)
      .def_readonly("dimension", &OptimizeResult::dimension)
      .def_property_readonly("checkpoints", [](const OptimizeResult& r) {
        std::vector<std::tuple<long, double, double, double>> rows;
        rows.reserve(r.checkpoints.size());
        for (const Checkpoint& c : r.checkpoints)
          rows.emplace_back(c.iteration, c.objective, c.gradient_norm, c.feasibility);
        return rows;
      });

  py::class_<SimulationSpec>(m, "SimulationSpec")
      .def(py::init<>())
      .def_readwrite("intruders", &SimulationSpec::intruders)
      .def_readwrite("residence", &SimulationSpec::residence)
      .def_readwrite("replications", &SimulationSpec::replications)
      .def_readwrite("seed", &SimulationSpec::seed)
      .def_readwrite("threads", &SimulationSpec::threads)
      .def_readwrite("capture_on_appearance", &SimulationSpec::capture_on_appearance)
      .def_readwrite("reset_agent_per_intruder", &SimulationSpec::reset_agent_per_intruder)
      .def_readwrite("random_support", &SimulationSpec::random_support);

  py::class_<SimulationStats>(m, "SimulationStats")
      .def_readonly("mean", &SimulationStats::mean)
      .def_readonly("min", &SimulationStats::min)
      .def_readonly("max", &SimulationStats::max)
      .def_readonly("stddev", &SimulationStats::stddev)
      .def_readonly("per_replication", &SimulationStats::per_replication);

  m.def(
      "make_graph",
      [](int nodes, const std::vector<std::pair<int, int>>& edges, std::vector<int> risky) {
        std::vector<Edge> es;
        es.reserve(edges.size());
        for (auto [a, b] : edges) es.push_back({a, b});
        return make_graph(nodes, std::move(es), std::move(risky));
      },
      py::arg("nodes"), py::arg("edges"), py::arg("risky") = std::vector<int>{},
      "Validate and index a graph from (from, to) edge pairs.");

  m.def(
      "load_graph",
      [](const std::string& path) {
        GraphFile gf = load_graph(path);
        return py::make_tuple(gf.graph, gf.failures, gf.hash, gf.name);
      },
      py::arg("path"), "Load a graph JSON file; returns (graph, failures, hash, name).");

  m.def("transition_matrix", &transition_matrix, py::arg("graph"), py::arg("weights"));
  m.def("uniform_weights", &uniform_weights, py::arg("graph"));
  m.def("stationary_distribution", &stationary_distribution, py::arg("P"));
  m.def("mfpt_first_step", &mfpt_first_step, py::arg("P"));
  m.def("analyze_chain", &analyze_chain, py::arg("P"));
  m.def("kemeny_constant", &kemeny_constant, py::arg("P"));
  m.def("effective_resistance_total", &effective_resistance_total, py::arg("graph"),
        py::arg("weights"));

  m.def(
      "connectivity_objective",
      [](const Matrix& P, ConnectivityMode objective, const std::optional<Vector>& target,
         const std::optional<Matrix>& custom) {
        return connectivity_objective(P, build_weights(objective, target, custom));
      },
      py::arg("P"), py::arg("objective") = ConnectivityMode::Unit,
      py::arg("target") = std::nullopt, py::arg("custom") = std::nullopt);

  m.def("equality_system", &equality_system, py::arg("graph"));
  m.def("stationary_system", &stationary_system, py::arg("graph"), py::arg("target"));

  m.def("project_scaled_simplex", &project_scaled_simplex, py::arg("v"), py::arg("epsilon"));
  m.def("project_blockwise_simplex", &project_blockwise_simplex, py::arg("graph"),
        py::arg("v"), py::arg("epsilon"));

  m.def(
      "dykstra_project",
      [](const Vector& v, const ConstraintSystem& sys, double lo, double hi, double tol,
         int max_iter) {
        DykstraOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        DykstraResult r = dykstra_project(v, sys, lo, hi, opts);
        return py::make_tuple(r.point, r.iterations, r.converged, r.residual);
      },
      py::arg("v"), py::arg("system"), py::arg("lo"), py::arg("hi"), py::arg("tol") = 1e-10,
      py::arg("max_iter") = 10000,
      "Project onto box-and-affine intersection; returns (point, iterations, converged, "
      "residual).");

  m.def(
      "steepest_feasible_descent",
      [](const Graph& g, const Vector& x, const ConstraintSystem& sys,
         ConnectivityMode objective, const std::optional<Vector>& target,
         const std::optional<Matrix>& custom) {
        return steepest_feasible_descent(g, x, build_weights(objective, target, custom), sys);
      },
      py::arg("graph"), py::arg("weights"), py::arg("system"),
      py::arg("objective") = ConnectivityMode::Unit, py::arg("target") = std::nullopt,
      py::arg("custom") = std::nullopt);

  m.def("hamiltonian_cycle_search", &hamiltonian_cycle_search, py::arg("graph"));

  m.def(
      "expected_objective",
      [](const Graph& g, const Vector& x, const FailureModel& fm, ConnectivityMode objective,
         const std::optional<Vector>& target, const std::optional<Matrix>& custom,
         int max_units) {
        return expected_objective(g, x, build_weights(objective, target, custom), fm,
                                  max_units);
      },
      py::arg("graph"), py::arg("weights"), py::arg("failures"),
      py::arg("objective") = ConnectivityMode::Unit, py::arg("target") = std::nullopt,
      py::arg("custom") = std::nullopt, py::arg("max_units") = 20,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "run_optimization",
      [](const Graph& g, const SpsaConfig& cfg, ConnectivityMode objective,
         const std::optional<Vector>& objective_target, const std::optional<Matrix>& custom,
         ConstraintMode constraint, const std::optional<Vector>& target, SupportMode support,
         const std::optional<FailureModel>& failures) {
        Problem p;
        p.graph = &g;
        p.objective = build_weights(objective, objective_target, custom);
        p.constraint = constraint;
        if (target) p.target = *target;
        p.support = support;
        if (failures) p.failures = *failures;
        return run_optimization(p, cfg);
      },
      py::arg("graph"), py::arg("config"), py::arg("objective") = ConnectivityMode::Unit,
      py::arg("objective_target") = std::nullopt, py::arg("custom") = std::nullopt,
      py::arg("constraint") = ConstraintMode::Simplex, py::arg("target") = std::nullopt,
      py::arg("support") = SupportMode::Fixed, py::arg("failures") = std::nullopt,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "simulate_surveillance",
      [](const Graph& g, const Vector& x, const SimulationSpec& spec,
         const std::optional<FailureModel>& failures) {
        return simulate_surveillance(g, x, spec, failures ? &*failures : nullptr);
      },
      py::arg("graph"), py::arg("weights"), py::arg("spec"),
      py::arg("failures") = std::nullopt, py::call_guard<py::gil_scoped_release>());
}
