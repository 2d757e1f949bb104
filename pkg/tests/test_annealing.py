import itertools
import math

import numpy as np
import pytest

from sagrover.annealing import SaConfig, classical_sa, hybrid_sa, hybrid_step, select_free_bits
from sagrover.errors import CapacityError, DimensionError
from sagrover.grover import SemanticBackend
from sagrover.qubo import QuboModel, brute_force_min, evaluate, five_variable_example, parse_bits, random_instance

REDUCED_MODEL = QuboModel(3, {}, {(0, 1): 1, (1, 2): 2, (0, 2): 3}, 0)


def test_config_validation():
    for bad in (
        dict(initial_temperature=0),
        dict(cooling_factor=1.0),
        dict(cooling_factor=0),
        dict(outer_iterations=0),
        dict(q=-1),
        dict(backend="quantum"),
    ):
        with pytest.raises(ValueError):
            SaConfig(**bad)


def test_single_variable_descent():
    res = classical_sa(QuboModel(1, {0: 1}), SaConfig(outer_iterations=100))
    assert res.best_cost == 0 and res.best_assignment == (0,)


def test_classical_reduced_model():
    res = classical_sa(REDUCED_MODEL, SaConfig(outer_iterations=500, seed=1))
    assert res.best_cost == 0
    assert res.classical_evaluations == 500


def test_classical_determinism_and_trace():
    cfg = SaConfig(outer_iterations=300, seed=42)
    m = random_instance(20, 0.4, 5, 3)
    a, b = classical_sa(m, cfg), classical_sa(m, cfg)
    assert a.cost_trace == b.cost_trace
    assert all(x >= y for x, y in zip(a.cost_trace, a.cost_trace[1:]))
    assert a.best_cost == evaluate(m, a.best_assignment)


def test_classical_local_field_matches_full_evaluation():
    # best_cost is re-evaluated from scratch; the running delta bookkeeping must agree
    m = random_instance(30, 0.5, 9, 8)
    res = classical_sa(m, SaConfig(outer_iterations=2000, seed=5, initial_temperature=50))
    assert res.cost_trace[-1] == res.best_cost


def test_select_free_bits():
    rng = np.random.default_rng(0)
    assert select_free_bits(5, 5, rng) == (0, 1, 2, 3, 4)
    assert select_free_bits(5, 0, rng) == ()
    a = select_free_bits(625, 10, np.random.default_rng(9))
    assert a == select_free_bits(625, 10, np.random.default_rng(9))
    assert len(set(a)) == 10 and list(a) == sorted(a)
    with pytest.raises(DimensionError):
        select_free_bits(3, 4, rng)


def test_select_free_bits_uniform():
    rng = np.random.default_rng(1)
    counts = np.zeros(8)
    for _ in range(4000):
        counts[list(select_free_bits(8, 2, rng))] += 1
    # each index is free with probability 1/4
    assert np.all(np.abs(counts - 1000) < 5 * math.sqrt(4000 * 0.25 * 0.75))


def test_hybrid_step_subspace_minimum():
    m = five_variable_example()
    current = parse_bits("11111")
    free = (1, 2, 4)
    sub_min = min(
        evaluate(m, [1, a, b, 1, c]) for a, b, c in itertools.product((0, 1), repeat=3)
    )
    nxt, cost, acct = hybrid_step(m, current, free, "classical-exhaustive", 1.0, np.random.default_rng(0))
    assert sub_min == 5
    assert cost == sub_min == evaluate(m, nxt)
    assert acct.accepted and acct.oracle_calls == 0


def test_hybrid_step_q_zero():
    m = five_variable_example()
    cur = parse_bits("01010")
    nxt, cost, acct = hybrid_step(m, cur, (), "classical-exhaustive", 1.0, np.random.default_rng(0))
    assert nxt == list(cur) and cost == evaluate(m, cur)
    assert acct.oracle_calls == 0


def test_hybrid_step_never_worsens_with_exact_backend():
    m = random_instance(12, 0.5, 6, 2)
    rng = np.random.default_rng(4)
    for _ in range(50):
        cur = rng.integers(0, 2, 12).tolist()
        free = select_free_bits(12, 4, rng)
        _, cost, _ = hybrid_step(m, cur, free, "classical-exhaustive", 100.0, rng)
        assert cost <= evaluate(m, cur)


def test_hybrid_step_at_optimum_keeps_cost():
    m = five_variable_example()
    best = brute_force_min(m).assignment
    for free in itertools.combinations(range(5), 3):
        for backend in ("classical-exhaustive", SemanticBackend()):
            _, cost, _ = hybrid_step(m, best, free, backend, 1.0, np.random.default_rng(1))
            assert cost == -5


def test_hybrid_step_grover_never_worsens():
    m = random_instance(10, 0.6, 5, 7)
    rng = np.random.default_rng(3)
    for _ in range(30):
        cur = rng.integers(0, 2, 10).tolist()
        free = select_free_bits(10, 5, rng)
        _, cost, acct = hybrid_step(m, cur, free, SemanticBackend(), 1e-9, rng)
        assert cost <= evaluate(m, cur)
        assert acct.oracle_calls == acct.grover_iterations
        assert acct.oracle_calls <= 20 * 2 ** 2.5


def test_hybrid_capacity_error():
    m = random_instance(30, 0.3, 5, 0)
    cfg = SaConfig(q=21, backend="grover-semantic", outer_iterations=1)
    with pytest.raises(CapacityError):
        hybrid_sa(m, cfg)


def test_hybrid_exhaustive_five_variable():
    res = hybrid_sa(five_variable_example(), SaConfig(q=3, outer_iterations=20, seed=0))
    assert res.best_cost == -5


def test_configuration_bookkeeping():
    m = random_instance(40, 0.2, 5, 0)
    res = hybrid_sa(m, SaConfig(q=10, outer_iterations=4, seed=0))
    assert res.configurations_explored == 4096 == 4 * 2**10
    ref = classical_sa(m, SaConfig(outer_iterations=4096, seed=0))
    assert ref.configurations_explored == res.configurations_explored


def test_grover_iteration_bound():
    m = random_instance(20, 0.3, 5, 1)
    k = 20
    cfg = SaConfig(q=6, outer_iterations=15, seed=2, backend="grover-semantic", grover_k=k)
    res = hybrid_sa(m, cfg)
    assert res.grover_iterations <= k * 2 ** (6 / 2) * 15
    assert res.oracle_calls == res.grover_iterations > 0


def test_hybrid_determinism_and_trace():
    m = random_instance(15, 0.5, 5, 3)
    cfg = SaConfig(q=4, outer_iterations=25, seed=11, backend="grover-semantic")
    a, b = hybrid_sa(m, cfg), hybrid_sa(m, cfg)
    assert a == b
    assert all(x >= y for x, y in zip(a.cost_trace, a.cost_trace[1:]))
    assert a.best_cost == evaluate(m, a.best_assignment)
