"""Dense statevector simulator and the small gate set used by the cost circuits.

Qubit ``k`` is bit ``k`` of the amplitude index. Bitstrings list qubit 0
first, matching how assignments are displayed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import CapacityError, DimensionError, GateError

MAX_QUBITS = 26

# Below this size the thread pool costs more than it saves.
_PARALLEL_MIN_QUBITS = 14
# Up to this size gates use cached flat index arrays instead of tensor slicing.
_FLAT_MAX_QUBITS = 15

_ARITY = {"x": 1, "h": 1, "z": 1, "cnot": 2, "ccnot": 3, "cphase": 2}
_SELF_INVERSE = {"x", "h", "z", "cnot", "ccnot", "mcz"}


@dataclass(frozen=True)
class Gate:
    """One gate. Controls come first in ``qubits``; the target is last."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind == "mcz":
            if not self.qubits:
                raise GateError("mcz needs at least one qubit")
        elif self.kind in _ARITY:
            if len(self.qubits) != _ARITY[self.kind]:
                raise GateError(f"{self.kind} takes {_ARITY[self.kind]} qubits, got {len(self.qubits)}")
        else:
            raise GateError(f"unknown gate kind {self.kind!r}")
        if (self.kind == "cphase") != (self.angle is not None):
            raise GateError("only cphase carries an angle")
        if len(set(self.qubits)) != len(self.qubits):
            raise GateError(f"{self.kind} qubits collide: {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise GateError(f"negative qubit index in {self.qubits}")

    def inverse(self) -> "Gate":
        if self.kind in _SELF_INVERSE:
            return self
        return Gate("cphase", self.qubits, -self.angle)

    def to_text(self) -> str:
        parts = [self.kind, *map(str, self.qubits)]
        if self.angle is not None:
            parts.append(repr(self.angle))
        return " ".join(parts)

    @classmethod
    def from_text(cls, line: str) -> "Gate":
        kind, *rest = line.split()
        if kind == "cphase":
            *qs, angle = rest
            return cls(kind, tuple(int(q) for q in qs), float(angle))
        return cls(kind, tuple(int(q) for q in rest))


def X(t: int) -> Gate:
    return Gate("x", (t,))


def H(t: int) -> Gate:
    return Gate("h", (t,))


def Z(t: int) -> Gate:
    return Gate("z", (t,))


def CNOT(c: int, t: int) -> Gate:
    return Gate("cnot", (c, t))


def CCNOT(c1: int, c2: int, t: int) -> Gate:
    return Gate("ccnot", (c1, c2, t))


def CPHASE(c: int, t: int, angle: float) -> Gate:
    return Gate("cphase", (c, t), float(angle))


def MCZ(*qubits: int) -> Gate:
    return Gate("mcz", tuple(qubits))


@dataclass
class Circuit:
    """Ordered gate list over ``num_qubits`` wires with named registers."""

    num_qubits: int
    gates: list[Gate] = field(default_factory=list)
    registers: dict[str, tuple[int, ...]] = field(default_factory=dict)

    def append(self, gate: Gate) -> None:
        if max(gate.qubits) >= self.num_qubits:
            raise GateError(f"{gate.to_text()} outside {self.num_qubits}-qubit circuit")
        self.gates.append(gate)

    def extend(self, gates) -> None:
        for g in gates:
            self.append(g)

    def inverse(self) -> "Circuit":
        return Circuit(self.num_qubits, [g.inverse() for g in reversed(self.gates)], dict(self.registers))

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for g in self.gates:
            counts[g.kind] = counts.get(g.kind, 0) + 1
        return counts

    def to_text(self) -> str:
        header = [f"qubits {self.num_qubits}"]
        for name, qs in self.registers.items():
            header.append(f"register {name} " + " ".join(map(str, qs)))
        return "\n".join(header + [g.to_text() for g in self.gates]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("qubits "):
            raise ValueError("circuit dump must start with 'qubits <m>'")
        circ = cls(int(lines[0].split()[1]))
        for ln in lines[1:]:
            if ln.startswith("register "):
                _, name, *qs = ln.split()
                circ.registers[name] = tuple(int(q) for q in qs)
            else:
                circ.append(Gate.from_text(ln))
        return circ


class StateVector:
    """``2**m`` complex amplitudes, mutated in place by :func:`apply_gate`.

    ``workers > 1`` splits each gate over independent amplitude blocks. Every
    block performs the same elementwise arithmetic, so results do not depend
    on the worker count.
    """

    def __init__(self, m: int, amplitudes: np.ndarray | None = None, workers: int = 1):
        if not 1 <= m <= MAX_QUBITS:
            raise CapacityError(f"{m} qubits outside supported range [1, {MAX_QUBITS}]")
        self.m = m
        if amplitudes is None:
            amplitudes = np.zeros(1 << m, dtype=np.complex128)
            amplitudes[0] = 1.0
        elif amplitudes.shape != (1 << m,):
            raise DimensionError(f"expected {1 << m} amplitudes, got {amplitudes.shape}")
        self.amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        self.workers = max(1, int(workers))

    def copy(self) -> "StateVector":
        return StateVector(self.m, self.amplitudes.copy(), self.workers)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tensor(self) -> np.ndarray:
        """Axis ``m - 1 - k`` of the view is qubit ``k``."""
        return self.amplitudes.reshape((2,) * self.m)


def new_state(m: int, workers: int = 1) -> StateVector:
    return StateVector(m, workers=workers)


def basis_state(m: int, index: int, workers: int = 1) -> StateVector:
    amps = np.zeros(1 << m, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(m, amps, workers)


def _index(m: int, fixed: dict[int, int]) -> tuple:
    idx: list = [slice(None)] * m
    for qubit, value in fixed.items():
        idx[m - 1 - qubit] = value
    return tuple(idx)


def _apply_block(t: np.ndarray, m: int, gate: Gate, block: dict[int, int]) -> None:
    kind, qs = gate.kind, gate.qubits
    if kind in ("x", "cnot", "ccnot"):
        ctrl = {c: 1 for c in qs[:-1]}
        i0 = _index(m, {**block, **ctrl, qs[-1]: 0})
        i1 = _index(m, {**block, **ctrl, qs[-1]: 1})
        tmp = t[i0].copy()
        t[i0] = t[i1]
        t[i1] = tmp
    elif kind in ("z", "mcz"):
        t[_index(m, {**block, **{q: 1 for q in qs}})] *= -1
    elif kind == "cphase":
        t[_index(m, {**block, qs[0]: 1, qs[1]: 1})] *= np.exp(1j * gate.angle)
    elif kind == "h":
        i0 = _index(m, {**block, qs[0]: 0})
        i1 = _index(m, {**block, qs[0]: 1})
        a0 = t[i0].copy()
        a1 = t[i1].copy()
        s = 1 / math.sqrt(2)
        t[i0] = (a0 + a1) * s
        t[i1] = (a0 - a1) * s
    else:  # pragma: no cover - Gate validates kinds
        raise GateError(kind)


@lru_cache(maxsize=512)
def _flat_plan(m: int, gate: Gate) -> tuple[np.ndarray, np.ndarray | None]:
    idx = np.arange(1 << m)
    qs = gate.qubits
    if gate.kind in ("z", "mcz", "cphase"):
        mask = sum(1 << q for q in qs)
        return idx[(idx & mask) == mask], None
    ctrl = sum(1 << q for q in qs[:-1])
    tbit = 1 << qs[-1]
    low = idx[((idx & ctrl) == ctrl) & ((idx & tbit) == 0)]
    return low, low | tbit


def _apply_flat(amps: np.ndarray, m: int, gate: Gate) -> None:
    i0, i1 = _flat_plan(m, gate)
    kind = gate.kind
    if kind in ("x", "cnot", "ccnot"):
        amps[i0], amps[i1] = amps[i1], amps[i0]
    elif kind in ("z", "mcz"):
        amps[i0] *= -1
    elif kind == "cphase":
        amps[i0] *= np.exp(1j * gate.angle)
    else:
        a0, a1 = amps[i0], amps[i1]
        s = 1 / math.sqrt(2)
        amps[i0] = (a0 + a1) * s
        amps[i1] = (a0 - a1) * s


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    if max(gate.qubits) >= state.m:
        raise GateError(f"{gate.to_text()} addresses a qubit outside {state.m}-qubit state")
    if state.m <= _FLAT_MAX_QUBITS:
        _apply_flat(state.amplitudes, state.m, gate)
        return state
    t = state.tensor()
    free = [k for k in range(state.m - 1, -1, -1) if k not in gate.qubits]
    if state.workers > 1 and state.m >= _PARALLEL_MIN_QUBITS and free:
        nsplit = min(len(free), max(1, math.ceil(math.log2(state.workers))))
        split = free[:nsplit]
        blocks = [dict(zip(split, vals)) for vals in product((0, 1), repeat=nsplit)]
        with ThreadPoolExecutor(max_workers=state.workers) as pool:
            list(pool.map(lambda b: _apply_block(t, state.m, gate, b), blocks))
    else:
        _apply_block(t, state.m, gate, {})
    return state


def run_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.num_qubits > state.m:
        raise GateError(f"circuit needs {circuit.num_qubits} qubits, state has {state.m}")
    for g in circuit.gates:
        apply_gate(state, g)
    return state


FUSE_MAX_QUBITS = 20
_PERMUTING = {"x", "cnot", "ccnot"}
_DIAGONAL = {"z", "mcz", "cphase"}


class FusedCircuit:
    """A circuit of permutation and diagonal gates folded into one gather.

    Replaying the gate list on an index array gives ``src`` and ``phase``
    with ``out = amps[src] * phase``, identical to applying the gates in
    order. Circuits containing H cannot be fused.
    """

    def __init__(self, circuit: Circuit):
        m = circuit.num_qubits
        if m > FUSE_MAX_QUBITS:
            raise CapacityError(f"fusion supports at most {FUSE_MAX_QUBITS} qubits, got {m}")
        self.m = m
        src = np.arange(1 << m)
        phase = np.ones(1 << m, dtype=np.complex128)
        for g in circuit.gates:
            i0, i1 = _flat_plan(m, g)
            if g.kind in _PERMUTING:
                src[i0], src[i1] = src[i1], src[i0]
                phase[i0], phase[i1] = phase[i1], phase[i0]
            elif g.kind in ("z", "mcz"):
                phase[i0] *= -1
            elif g.kind == "cphase":
                phase[i0] *= np.exp(1j * g.angle)
            else:
                raise GateError(f"cannot fuse non-permutation gate {g.to_text()}")
        self.src = src
        self.phase = phase

    def apply(self, state: StateVector) -> StateVector:
        if state.m != self.m:
            raise GateError(f"fused circuit is {self.m} qubits, state has {state.m}")
        state.amplitudes[:] = state.amplitudes[self.src] * self.phase
        return state


def fuse_circuit(circuit: Circuit) -> FusedCircuit:
    return FusedCircuit(circuit)


def _bits_of(index: int, m: int) -> str:
    return "".join(str((index >> k) & 1) for k in range(m))


def _index_of(bitstring: str, m: int) -> int:
    if len(bitstring) != m:
        raise DimensionError(f"bitstring of length {len(bitstring)} for {m}-qubit state")
    if any(ch not in "01" for ch in bitstring):
        raise DimensionError(f"not a bitstring: {bitstring!r}")
    return sum(int(ch) << k for k, ch in enumerate(bitstring))


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw; one uniform per sample keeps rng streams predictable."""
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side="right")), len(probs) - 1)


def measure_all(state: StateVector, rng: np.random.Generator) -> str:
    """Sample a basis string without collapsing the stored state."""
    return _bits_of(sample_index(state.probabilities(), rng), state.m)


def probability_of(state: StateVector, bitstring: str) -> float:
    return float(abs(state.amplitudes[_index_of(bitstring, state.m)]) ** 2)
