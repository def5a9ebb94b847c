"""Smoke tests for the python bindings and the installed CLI."""

import os
import subprocess

import numpy as np
import pytest

chainopt = pytest.importorskip("chainopt")


def two_node():
    return chainopt.make_graph(2, [(0, 0), (0, 1), (1, 0), (1, 1)])


def complete3():
    return chainopt.make_graph(3, [(i, j) for i in range(3) for j in range(3) if i != j])


def test_exports_complete():
    for name in chainopt.__all__:
        assert getattr(chainopt, name, None) is not None, name


def test_analysis_roundtrip():
    g = complete3()
    assert g.nodes == 3
    assert g.edge_count() == 6
    assert g.find_edge(0, 1) == 0
    assert g.find_edge(1, 1) is None

    x = chainopt.uniform_weights(g)
    P = chainopt.transition_matrix(g, x)
    assert np.allclose(P.sum(axis=1), 1.0)

    a = chainopt.analyze_chain(P)
    assert a.pi.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(a.pi @ P, a.pi, atol=1e-12)
    assert np.allclose(a.mfpt, chainopt.mfpt_first_step(P), atol=1e-9)
    assert chainopt.kemeny_constant(P) == pytest.approx(a.deviation.trace() + 1.0, abs=1e-10)
    # Uniform complete graph: off-diagonal passage times n-1, objective n(n-1)^2.
    assert chainopt.connectivity_objective(P) == pytest.approx(12.0, abs=1e-9)


def test_constraints_and_projections():
    g = two_node()
    sys = chainopt.equality_system(g)
    assert sys.rank == 2
    assert sys.dim() == 2
    assert np.allclose(sys.A @ sys.basis, 0.0, atol=1e-12)

    p = chainopt.project_scaled_simplex(np.array([0.5, 0.6]), 0.1)
    assert np.allclose(p, [0.45, 0.55], atol=1e-12)

    point, iterations, converged, residual = chainopt.dykstra_project(
        np.array([1.2, -0.2, 0.5, 0.5]), sys, 0.0, 1.0
    )
    assert converged
    assert iterations >= 1
    assert residual <= 1e-9
    assert np.allclose(sys.A @ point, sys.b, atol=1e-9)

    d = chainopt.steepest_feasible_descent(g, np.full(4, 0.5), sys)
    assert np.allclose(sys.A @ d.raw, 0.0, atol=1e-10)
    assert abs(np.linalg.norm(d.unit) - 1.0) < 1e-12


def test_tour_search():
    g = chainopt.make_graph(4, [(i, (i + 1) % 4) for i in range(4)])
    assert chainopt.hamiltonian_cycle_search(g) == [0, 1, 2, 3]


def test_optimizer_deterministic():
    g = complete3()
    cfg = chainopt.SpsaConfig()
    cfg.iterations = 300
    cfg.checkpoint_every = 100
    cfg.restarts = 2
    cfg.seed = 9
    a = chainopt.run_optimization(g, cfg)
    b = chainopt.run_optimization(g, cfg)
    assert a.objective == b.objective
    assert np.array_equal(a.edge_weights, b.edge_weights)
    assert a.checkpoints == b.checkpoints
    assert a.stop in (
        chainopt.StopReason.Converged,
        chainopt.StopReason.IterationLimit,
    )
    assert a.dimension == 3
    assert len(a.restart_objectives) == 2


def test_expected_objective_enumeration():
    g = chainopt.make_graph(2, [(0, 0), (0, 1), (1, 0), (1, 1)], [0])
    fm = chainopt.FailureModel()
    fm.fail_prob = [0.5]
    got = chainopt.expected_objective(g, chainopt.uniform_weights(g), fm)
    # Survival keeps the uniform chain (objective 4); failure of the first
    # self-loop forces row 0 onto the other node (objective 3).
    assert got == pytest.approx(3.5, abs=1e-12)


def test_infeasible_target_raises():
    g = chainopt.make_graph(3, [(0, 1), (1, 2), (2, 0)])
    from chainopt import _core

    with pytest.raises(_core.InfeasibleError):
        chainopt.stationary_system(g, np.array([0.5, 0.25, 0.25]))


def test_surveillance_deterministic():
    g = complete3()
    spec = chainopt.SimulationSpec()
    spec.intruders = 50
    spec.residence = 3
    spec.replications = 10
    spec.seed = 4
    s1 = chainopt.simulate_surveillance(g, chainopt.uniform_weights(g), spec)
    s2 = chainopt.simulate_surveillance(g, chainopt.uniform_weights(g), spec)
    assert s1.per_replication == s2.per_replication
    assert len(s1.per_replication) == 10
    assert 0.0 <= s1.min <= s1.mean <= s1.max <= 100.0


@pytest.mark.skipif(
    not os.environ.get("CHAINOPT_CLI") or not os.environ.get("CHAINOPT_DATA_DIR"),
    reason="CLI or data directory not provided",
)
def test_cli_exit_codes():
    cli = os.environ["CHAINOPT_CLI"]
    graph = os.path.join(os.environ["CHAINOPT_DATA_DIR"], "double_pentagon.json")
    done = subprocess.run([cli, "analyze", "--graph", graph], capture_output=True, text=True)
    assert done.returncode == 0
    assert "kemeny constant" in done.stdout

    bad = subprocess.run([cli, "analyze", "--no-such-flag"], capture_output=True, text=True)
    assert bad.returncode == 2
