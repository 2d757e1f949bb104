import numpy as np
import pytest

from sagrover.errors import CapacityError, GateError
from sagrover.statevector import (
    CCNOT,
    CNOT,
    CPHASE,
    MCZ,
    Circuit,
    Gate,
    H,
    StateVector,
    X,
    Z,
    apply_gate,
    basis_state,
    fuse_circuit,
    measure_all,
    new_state,
    probability_of,
    run_circuit,
)


def dense_gate(m, gate):
    """Reference unitary built column by column from the gate definition."""
    dim = 1 << m
    U = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bit = lambda k: (col >> k) & 1  # noqa: E731
        if gate.kind == "h":
            t = gate.qubits[0]
            U[col & ~(1 << t), col] += 1 / np.sqrt(2)
            U[col | (1 << t), col] += (-1 if bit(t) else 1) / np.sqrt(2)
            continue
        controls, t = gate.qubits[:-1], gate.qubits[-1]
        active = all(bit(c) for c in controls)
        if gate.kind in ("x", "cnot", "ccnot"):
            U[col ^ (1 << t) if active else col, col] = 1
        elif gate.kind in ("z", "mcz"):
            U[col, col] = -1 if active and bit(t) else 1
        elif gate.kind == "cphase":
            U[col, col] = np.exp(1j * gate.angle) if active and bit(t) else 1
    return U


def random_state(m, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
    return StateVector(m, v / np.linalg.norm(v))


def random_gate(m, rng):
    arities = {"x": 1, "h": 1, "z": 1, "cnot": 2, "ccnot": 3, "cphase": 2, "mcz": int(rng.integers(1, m + 1))}
    kind = str(rng.choice([k for k, a in arities.items() if a <= m]))
    qs = tuple(int(q) for q in rng.choice(m, size=arities[kind], replace=False))
    angle = float(rng.uniform(0, 2 * np.pi)) if kind == "cphase" else None
    return Gate(kind, qs, angle)


def test_new_state():
    assert np.array_equal(new_state(1).amplitudes, [1, 0])
    s = new_state(3)
    assert s.amplitudes[0] == 1 and np.count_nonzero(s.amplitudes) == 1
    with pytest.raises(CapacityError):
        new_state(27)
    with pytest.raises(CapacityError):
        new_state(0)


def test_hadamard_and_probability():
    s = apply_gate(new_state(1), H(0))
    assert np.allclose(s.amplitudes, [2**-0.5, 2**-0.5])
    assert abs(probability_of(s, "1") - 0.5) < 1e-12
    assert probability_of(new_state(4), "0000") == 1.0
    with pytest.raises(ValueError):
        probability_of(s, "01")


def test_toffoli_truth_table():
    # string positions are qubits 0,1,2; controls 0 and 1, target 2
    s = apply_gate(basis_state(3, 0b011), CCNOT(0, 1, 2))
    assert probability_of(s, "111") == 1.0
    s = apply_gate(basis_state(3, 0b001), CCNOT(0, 1, 2))
    assert probability_of(s, "100") == 1.0


def test_x_involution_exact():
    s = random_state(4, 1)
    before = s.amplitudes.copy()
    apply_gate(apply_gate(s, X(2)), X(2))
    assert np.array_equal(s.amplitudes, before)


def test_gate_errors():
    with pytest.raises(GateError):
        apply_gate(new_state(2), CNOT(0, 2))
    with pytest.raises(GateError):
        CNOT(1, 1)
    with pytest.raises(GateError):
        Circuit(2).append(X(5))


@pytest.mark.parametrize("m", [1, 3, 5, 16])
def test_gates_match_dense_reference(m):
    rng = np.random.default_rng(m)
    for trial in range(12 if m <= 5 else 4):
        g = random_gate(m, rng)
        s = random_state(m, trial)
        before = s.amplitudes.copy()
        apply_gate(s, g)
        if m <= 5:
            assert np.allclose(s.amplitudes, dense_gate(m, g) @ before, atol=1e-12)
        assert abs(s.norm() - 1) < 1e-12
        apply_gate(s, g.inverse())
        assert np.max(np.abs(s.amplitudes - before)) < 1e-12


def test_worker_count_is_bit_identical():
    rng = np.random.default_rng(9)
    gates = [random_gate(16, rng) for _ in range(25)]
    a, b = random_state(16, 3), random_state(16, 3)
    b.workers = 4
    for g in gates:
        apply_gate(a, g)
        apply_gate(b, g)
    assert np.array_equal(a.amplitudes, b.amplitudes)


def test_fused_matches_gate_by_gate():
    rng = np.random.default_rng(4)
    c = Circuit(7)
    for _ in range(60):
        g = random_gate(7, rng)
        if g.kind != "h":
            c.append(g)
    s1, s2 = random_state(7, 8), random_state(7, 8)
    run_circuit(s1, c)
    fuse_circuit(c).apply(s2)
    assert np.max(np.abs(s1.amplitudes - s2.amplitudes)) < 1e-12
    c.append(H(0))
    with pytest.raises(GateError):
        fuse_circuit(c)


def test_circuit_text_round_trip():
    c = Circuit(4, registers={"input": (0, 1), "cost": (2, 3)})
    c.extend([H(0), CNOT(0, 1), CCNOT(0, 1, 2), CPHASE(1, 3, 0.25), MCZ(0, 1, 3), Z(2), X(3)])
    text = c.to_text()
    assert "ccnot 0 1 2" in text.splitlines()
    back = Circuit.from_text(text)
    assert back.gates == c.gates and back.num_qubits == 4 and back.registers == c.registers


def test_circuit_inverse_restores_state():
    rng = np.random.default_rng(2)
    c = Circuit(5)
    c.extend(random_gate(5, rng) for _ in range(40))
    s = random_state(5, 0)
    before = s.amplitudes.copy()
    run_circuit(run_circuit(s, c), c.inverse())
    assert np.max(np.abs(s.amplitudes - before)) < 1e-12


def test_measure_basis_and_uniform():
    rng = np.random.default_rng(0)
    s = basis_state(3, 0b101)
    assert {measure_all(s, rng) for _ in range(50)} == {"101"}
    u = apply_gate(apply_gate(new_state(2), H(0)), H(1))
    draws = [measure_all(u, rng) for _ in range(10_000)]
    sigma = (10_000 * 0.25 * 0.75) ** 0.5
    for outcome in ("00", "01", "10", "11"):
        assert abs(draws.count(outcome) - 2500) < 5 * sigma
    # measurement does not collapse the stored state
    assert abs(probability_of(u, "11") - 0.25) < 1e-12


def test_measure_seeded():
    u = apply_gate(apply_gate(new_state(2), H(0)), H(1))
    r1, r2 = np.random.default_rng(5), np.random.default_rng(5)
    assert [measure_all(u, r1) for _ in range(30)] == [measure_all(u, r2) for _ in range(30)]
