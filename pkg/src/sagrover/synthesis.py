"""Reversible cost-evaluation circuits for integer QUBO models.

Each monomial is computed into a product ancilla with a Toffoli, its
coefficient is added into a two's-complement cost register with a Cuccaro
ripple-carry adder, and the ancilla is uncomputed. Linear terms drive the
constant load directly from their input qubit, and the offset is loaded with
plain X gates.

Wire layout, lowest index first: input (q), cost (w), operand (w), carry (1),
product (1). The operand/carry/product wires only exist when the model has
a term that needs them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, SynthesisError
from .qubo import QuboModel, ReducedQubo, evaluate, int_to_bits
from .statevector import (
    CCNOT,
    CNOT,
    MAX_QUBITS,
    Circuit,
    Gate,
    StateVector,
    X,
    Z,
    run_circuit,
)

GATE_KINDS = ("x", "h", "z", "cnot", "ccnot", "cphase", "mcz")


def signed_width(lo: int, hi: int) -> int:
    """Smallest width >= 2 whose two's-complement range covers [lo, hi]."""
    w = 2
    while lo < -(1 << (w - 1)) or hi > (1 << (w - 1)) - 1:
        w += 1
    return w


def register_width(lo: int, hi: int) -> int:
    if lo >= 0:
        return max(2, int(hi).bit_length())
    return signed_width(lo, hi)


def maj(x: int, y: int, z: int) -> list[Gate]:
    return [CNOT(z, y), CNOT(z, x), CCNOT(x, y, z)]


def uma(x: int, y: int, z: int) -> list[Gate]:
    return [CCNOT(x, y, z), CNOT(z, x), CNOT(x, y)]


def ripple_carry_adder(a: list[int], b: list[int], carry: int) -> list[Gate]:
    """In-place ``b += a mod 2**len(b)``; ``a`` and the zeroed ``carry`` are restored."""
    if len(a) != len(b) or not a:
        raise SynthesisError("adder operands must have equal, nonzero width")
    gates = maj(carry, b[0], a[0])
    for i in range(1, len(a)):
        gates += maj(a[i - 1], b[i], a[i])
    for i in range(len(a) - 1, 0, -1):
        gates += uma(a[i - 1], b[i], a[i])
    gates += uma(carry, b[0], a[0])
    return gates


def adder_circuit(width: int) -> Circuit:
    """Standalone adder over registers a (low wires), b, carry."""
    a = list(range(width))
    b = list(range(width, 2 * width))
    carry = 2 * width
    circ = Circuit(2 * width + 1, registers={"a": tuple(a), "b": tuple(b), "carry": (carry,)})
    circ.extend(ripple_carry_adder(a, b, carry))
    return circ


def _constant_add(control: int | None, value: int, width: int, operand, cost, carry) -> list[Gate]:
    k = value % (1 << width)
    if k == 0:
        return []
    bits = [i for i in range(width) if (k >> i) & 1]
    if control is None:
        load = [X(operand[i]) for i in bits]
    else:
        load = [CNOT(control, operand[i]) for i in bits]
    return load + ripple_carry_adder(list(operand), list(cost), carry) + load


@dataclass
class CostCircuit:
    circuit: Circuit
    layout: dict[str, tuple[int, ...]]
    width: int
    signed: bool
    monomial_terms: int

    @property
    def q(self) -> int:
        return len(self.layout["input"])

    def decode(self, raw: int) -> int:
        """Register contents as an integer under the circuit's encoding."""
        raw %= 1 << self.width
        if self.signed and raw >= 1 << (self.width - 1):
            return raw - (1 << self.width)
        return raw


def _as_model(reduced: ReducedQubo | QuboModel) -> QuboModel:
    return reduced.model if isinstance(reduced, ReducedQubo) else reduced


def _check_integral(model: QuboModel) -> None:
    if not model.is_integral:
        raise SynthesisError("circuit synthesis needs integer coefficients")


def _build(model: QuboModel, width: int, signed: bool, shift: int, max_qubits: int) -> CostCircuit:
    q = model.n
    if q < 1:
        raise SynthesisError("circuit synthesis needs at least one free variable")
    offset = int(model.offset) - shift
    needs_adder = model.num_terms > 0 or offset % (1 << width) != 0
    needs_product = bool(model.quadratic)
    total = q + width + ((width + 1) if needs_adder else 0) + (1 if needs_product else 0)
    if total > max_qubits:
        raise CapacityError(f"cost circuit needs {total} qubits, cap is {max_qubits}")

    layout = {
        "input": tuple(range(q)),
        "cost": tuple(range(q, q + width)),
        "operand": (),
        "carry": (),
        "product": (),
    }
    nxt = q + width
    if needs_adder:
        layout["operand"] = tuple(range(nxt, nxt + width))
        layout["carry"] = (nxt + width,)
        nxt += width + 1
    if needs_product:
        layout["product"] = (nxt,)
        nxt += 1
    circ = Circuit(total, registers={k: v for k, v in layout.items() if v})
    operand, cost = layout["operand"], layout["cost"]
    carry = layout["carry"][0] if layout["carry"] else None

    for (i, j), c in model.quadratic.items():
        p = layout["product"][0]
        circ.append(CCNOT(i, j, p))
        circ.extend(_constant_add(p, int(c), width, operand, cost, carry))
        circ.append(CCNOT(i, j, p))
    for i, c in model.linear.items():
        circ.extend(_constant_add(i, int(c), width, operand, cost, carry))
    circ.extend(_constant_add(None, offset, width, operand, cost, carry))
    return CostCircuit(circ, layout, width, signed, model.num_terms)


def synthesize_cost_circuit(reduced: ReducedQubo | QuboModel, max_qubits: int = MAX_QUBITS) -> CostCircuit:
    model = _as_model(reduced)
    _check_integral(model)
    lo, hi = (int(v) for v in model.bounds())
    return _build(model, register_width(lo, hi), lo < 0, 0, max_qubits)


def oracle_width(model: QuboModel, threshold: int) -> int:
    lo, hi = (int(v) for v in model.bounds())
    return signed_width(lo - threshold, hi - threshold)


def synthesize_threshold_oracle(
    reduced: ReducedQubo | QuboModel, threshold: int, max_qubits: int = MAX_QUBITS
) -> Circuit:
    """Phase oracle flipping exactly the inputs with ``cost < threshold``.

    Computes ``cost - threshold`` in two's complement, applies Z to the sign
    bit and uncomputes, so every work wire returns to zero.
    """
    model = _as_model(reduced)
    _check_integral(model)
    if not float(threshold).is_integer():
        raise SynthesisError("threshold must be an integer")
    threshold = int(threshold)
    width = oracle_width(model, threshold)
    compute = _build(model, width, True, threshold, max_qubits)
    circ = Circuit(compute.circuit.num_qubits, list(compute.circuit.gates), dict(compute.circuit.registers))
    circ.append(Z(compute.layout["cost"][-1]))
    circ.extend(compute.circuit.inverse().gates)
    return circ


@dataclass(frozen=True)
class ResourceReport:
    qubits: int
    gate_counts: dict[str, int]
    monomial_terms: int

    def to_dict(self) -> dict:
        return {
            "qubits": self.qubits,
            "gate_counts": {k: self.gate_counts.get(k, 0) for k in GATE_KINDS},
            "monomial_terms": self.monomial_terms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def resource_report(c: CostCircuit) -> ResourceReport:
    return ResourceReport(c.circuit.num_qubits, c.circuit.gate_counts(), c.monomial_terms)


@dataclass(frozen=True)
class BasisCheck:
    input_bits: tuple[int, ...]
    expected: int
    observed: int
    ancilla_deviation: float

    @property
    def passed(self) -> bool:
        return self.expected == self.observed and self.ancilla_deviation < 1e-9


def register_value(index: int, wires) -> int:
    return sum(((index >> w) & 1) << k for k, w in enumerate(wires))


_PERMUTATION_KINDS = {"x", "cnot", "ccnot"}


def verify_cost_circuit(
    cc: CostCircuit, reduced: ReducedQubo | QuboModel, workers: int = 1, mode: str = "auto"
) -> list[BasisCheck]:
    """Simulate every basis input and compare the cost register with ``evaluate``.

    ``mode="basis"`` prepares each input as its own basis state.
    ``mode="superposed"`` runs once on a superposition of all inputs where
    input ``x`` carries the distinct phase ``exp(2 pi i x / 2**q)``; for a
    circuit of X/CNOT/CCNOT gates each input lands on a single basis state
    with its phase intact, so the phases identify every input's output.
    ``"auto"`` picks superposed whenever the circuit is permutation-only.

    ``ancilla_deviation`` is the per-input amplitude error against the ideal
    output ``|x>|cost(x)>|0...0>``, normalized to a unit input.
    """
    model = _as_model(reduced)
    if mode == "auto":
        permutation = all(g.kind in _PERMUTATION_KINDS for g in cc.circuit.gates)
        mode = "superposed" if permutation else "basis"
    if mode not in ("basis", "superposed"):
        raise ValueError(f"unknown verification mode {mode!r}")
    q, m = cc.q, cc.circuit.num_qubits
    N = 1 << q
    expected = [int(evaluate(model, int_to_bits(x, q))) for x in range(N)]
    if not cc.circuit.gates:
        return [BasisCheck(int_to_bits(x, q), expected[x], 0, 0.0) for x in range(N)]
    cost_lo = cc.layout["cost"][0]

    def target(x: int) -> int:
        return x | ((expected[x] % (1 << cc.width)) << cost_lo)

    checks = []
    if mode == "basis":
        for x in range(N):
            amps = np.zeros(1 << m, dtype=np.complex128)
            amps[x] = 1.0
            out = run_circuit(StateVector(m, amps, workers), cc.circuit).amplitudes
            peak = int(np.argmax(np.abs(out)))
            ideal = np.zeros_like(out)
            ideal[target(x)] = 1.0
            deviation = float(np.max(np.abs(out - ideal)))
            observed = cc.decode(register_value(peak, cc.layout["cost"]))
            checks.append(BasisCheck(int_to_bits(x, q), expected[x], observed, deviation))
        return checks

    phases = np.exp(2j * np.pi * np.arange(N) / N)
    amps = np.zeros(1 << m, dtype=np.complex128)
    amps[:N] = phases / np.sqrt(N)
    out = run_circuit(StateVector(m, amps, workers), cc.circuit).amplitudes * np.sqrt(N)
    targets = np.array([target(x) for x in range(N)])
    stray = out.copy()
    stray[targets] = 0
    # charge stray amplitude to the input whose phase it carries
    leak = np.zeros(N)
    for y in np.flatnonzero(np.abs(stray) > 1e-12):
        owner = int(round(np.angle(stray[y]) / (2 * np.pi) * N)) % N
        leak[owner] = max(leak[owner], abs(stray[y]))
    support = np.flatnonzero(np.abs(out) > 0.5)
    for x in range(N):
        deviation = max(abs(out[targets[x]] - phases[x]), leak[x])
        # where did input x go: the support index carrying its phase
        hits = support[np.abs(out[support] - phases[x]) < 1e-6]
        landed = int(hits[0]) if len(hits) else int(targets[x])
        observed = cc.decode(register_value(landed, cc.layout["cost"]))
        checks.append(BasisCheck(int_to_bits(x, q), expected[x], observed, float(deviation)))
    return checks


def marked_inputs(oracle: Circuit, q: int, mode: str = "auto") -> list[int]:
    """Inputs whose phase the oracle flips, found by simulation.

    ``"superposed"`` runs once on all inputs tagged with distinct phases,
    valid when every gate maps basis states to (signed) basis states;
    ``"basis"`` simulates each input separately. An input whose amplitude
    does not come back onto itself (dirty work qubits) raises.
    """
    if mode == "auto":
        signed_perm = all(g.kind in _PERMUTATION_KINDS | {"z", "mcz"} for g in oracle.gates)
        mode = "superposed" if signed_perm else "basis"
    N = 1 << q
    m = oracle.num_qubits
    if mode == "basis":
        ratios = []
        for x in range(N):
            amps = np.zeros(1 << m, dtype=np.complex128)
            amps[x] = 1.0
            ratios.append(run_circuit(StateVector(m, amps), oracle).amplitudes[x])
        ratios = np.array(ratios)
    elif mode == "superposed":
        phases = np.exp(2j * np.pi * np.arange(N) / N)
        amps = np.zeros(1 << m, dtype=np.complex128)
        amps[:N] = phases / np.sqrt(N)
        out = run_circuit(StateVector(m, amps), oracle).amplitudes
        ratios = out[:N] * np.sqrt(N) / phases
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if np.max(np.abs(np.abs(ratios) - 1)) > 1e-9:
        raise SynthesisError("oracle leaves work qubits entangled with the input")
    return [x for x in range(N) if ratios[x].real < 0]
