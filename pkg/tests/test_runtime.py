import math

import pytest

from sagrover.qubo import random_instance
from sagrover.runtime import (
    RuntimeParams,
    advantage_threshold,
    calibrate_tq,
    evaluation_ops,
    figure_rows,
    grover_gain,
    hybrid_runtime,
    local_tq_constant,
    saturation_q,
    speedup_row,
    speedup_table,
)

REFERENCE = RuntimeParams.from_totals(22800, 13, 100)


def test_params_from_totals():
    assert REFERENCE.T_Q == pytest.approx(22800, rel=1e-12)
    assert REFERENCE.T_det == pytest.approx(13, rel=1e-12)
    assert REFERENCE.t_q == pytest.approx(0.228)
    assert REFERENCE.t_det == pytest.approx(1.3e-4)
    assert RuntimeParams().T_SA == pytest.approx(22813)
    with pytest.raises(ValueError):
        RuntimeParams(q_oh=0.5)
    with pytest.raises(ValueError):
        RuntimeParams(t_q=0)


def test_hybrid_runtime_q10():
    b = hybrid_runtime(REFERENCE, 10)
    assert b.T_G == pytest.approx(71250, abs=1e-6)
    assert b.T_hy == pytest.approx(71263, abs=1e-6)
    assert not b.odd_q and hybrid_runtime(REFERENCE, 11).odd_q


def test_q20_row():
    row = speedup_row(REFERENCE, 20)
    assert row.T_G == pytest.approx(2226.5625, abs=1e-9)
    assert row.X_QUBO == pytest.approx(10.24, abs=1e-12)


def test_no_quantum_component():
    p = RuntimeParams.from_totals(22800, 13, 1)
    b = hybrid_runtime(p, 0)
    assert b.T_hy == pytest.approx(b.T_SA)
    assert speedup_row(p, 0).X_SA == pytest.approx(1)
    assert speedup_row(p, 2).X_QUBO == pytest.approx(2.0)


def test_speedup_table_small_q():
    rows = speedup_table(REFERENCE, range(2, 21, 2))
    assert [r.q for r in rows] == list(range(2, 21, 2))
    assert rows[0].X_QUBO == pytest.approx(0.02)


def test_headline_values():
    # closed form 22813 / (22800 * 100 / 2**(q/2) + 13)
    for q, expected in ((32, 477.36), (34, 750.55), (36, 1051.41)):
        ref = 22813 / (22800 * 100 / 2 ** (q / 2) + 13)
        assert speedup_row(REFERENCE, q).X_SA == pytest.approx(ref, rel=1e-12)
        assert ref == pytest.approx(expected, abs=0.01)


def test_exact_halving_and_ceilings():
    prev = None
    for q in range(0, 61, 2):
        row = speedup_row(REFERENCE, q)
        if prev is not None:
            assert row.T_G == pytest.approx(prev.T_G / 2, rel=1e-12)
            assert row.X_SA > prev.X_SA
        x_qubo = 2 ** (q / 2) / 100
        assert row.X_SA < 22813 / 13
        if x_qubo > 1:
            assert row.X_SA < x_qubo
        else:
            # below break-even the untouched residual softens the slowdown
            assert x_qubo <= row.X_SA <= 1
        prev = row


def test_advantage_threshold():
    assert advantage_threshold(100) == 14
    assert advantage_threshold(1) == 2
    assert advantage_threshold(1000) == 20
    with pytest.raises(ValueError):
        advantage_threshold(0.5)


def test_advantage_threshold_shift_with_k():
    for k in (1.5, 2, 5, 20):
        shift = advantage_threshold(100, k) - advantage_threshold(100)
        assert 0 <= shift <= 2 * math.ceil(math.log2(k))


def test_measured_calls_change_tg_by_k():
    q = 10
    k = 3.0
    calls = k * 2 ** (q / 2)
    ideal = hybrid_runtime(REFERENCE, q).T_G
    measured = hybrid_runtime(REFERENCE, q, calls).T_G
    assert measured == pytest.approx(ideal * k)
    assert grover_gain(q) == 32
    with pytest.raises(ValueError):
        grover_gain(q, 0)


def test_saturation():
    assert saturation_q(REFERENCE) == (34, True)
    # the next step's relative gain, for the record: 36 -> 38 is 0.2507
    gain36 = speedup_row(REFERENCE, 38).X_SA / speedup_row(REFERENCE, 36).X_SA - 1
    assert gain36 == pytest.approx(0.25067, abs=1e-5)
    assert saturation_q(REFERENCE, epsilon=0.25).q == 38
    huge = RuntimeParams.from_totals(22800, 13, 1e30)
    assert saturation_q(huge, q_max=40) == (40, False)
    no_residual = RuntimeParams.from_totals(22800, 0, 100)
    assert saturation_q(no_residual, q_max=50) == (50, False)


def test_calibrate_tq():
    assert calibrate_tq(625) == pytest.approx(0.22734375, rel=1e-12)
    assert abs(calibrate_tq(625) - 0.228) / 0.228 < 0.003
    assert calibrate_tq(5, 1.22e-6) == pytest.approx(3.05e-5)
    assert calibrate_tq(1) == 5.82e-7
    with pytest.raises(ValueError):
        calibrate_tq(0)


def test_operation_counts_quadratic():
    ratios = []
    for n in (5, 10, 15, 20, 25, 625):
        ops = evaluation_ops(random_instance(n, 1.0, 5, n))
        assert ops == 1 + n + n * (n - 1) // 2
        ratios.append(ops / n**2)
    assert max(ratios) / min(ratios) < 3


def test_local_constant():
    m = random_instance(10, 1.0, 5, 0)
    assert local_tq_constant(m, 1e-8) == pytest.approx(1e-8 * evaluation_ops(m) / 100)


def test_figure_rows_logs():
    rows = figure_rows(REFERENCE, [2, 10])
    assert rows[1]["log10_Grover"] == pytest.approx(math.log10(71250))
    assert set(rows[0]) >= {"q", "QUBO", "Grover", "SA", "SA+Grover", "X_SA", "X_QUBO"}
