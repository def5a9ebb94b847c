"""Connectivity analysis and constrained stochastic optimization for Markov chains."""

from ._core import (
    ChainAnalytics,
    ConnectivityMode,
    ConstraintMode,
    ConstraintSystem,
    DescentDirection,
    FailureModel,
    Graph,
    OptimizeResult,
    SimulationSpec,
    SimulationStats,
    SpsaConfig,
    StopReason,
    SupportMode,
    analyze_chain,
    connectivity_objective,
    dykstra_project,
    effective_resistance_total,
    equality_system,
    expected_objective,
    hamiltonian_cycle_search,
    kemeny_constant,
    load_graph,
    make_graph,
    mfpt_first_step,
    project_blockwise_simplex,
    project_scaled_simplex,
    run_optimization,
    simulate_surveillance,
    stationary_distribution,
    stationary_system,
    steepest_feasible_descent,
    transition_matrix,
    uniform_weights,
)

__version__ = "0.1.0"

__all__ = [
    "ChainAnalytics",
    "ConnectivityMode",
    "ConstraintMode",
    "ConstraintSystem",
    "DescentDirection",
    "FailureModel",
    "Graph",
    "OptimizeResult",
    "SimulationSpec",
    "SimulationStats",
    "SpsaConfig",
    "StopReason",
    "SupportMode",
    "analyze_chain",
    "connectivity_objective",
    "dykstra_project",
    "effective_resistance_total",
    "equality_system",
    "expected_objective",
    "hamiltonian_cycle_search",
    "kemeny_constant",
    "load_graph",
    "make_graph",
    "mfpt_first_step",
    "project_blockwise_simplex",
    "project_scaled_simplex",
    "run_optimization",
    "simulate_surveillance",
    "stationary_distribution",
    "stationary_system",
    "steepest_feasible_descent",
    "transition_matrix",
    "uniform_weights",
    "__version__",
]
