"""Grover amplification and threshold-descent minimum finding over a reduced model.

Two oracle flavours share one driver:

* ``SemanticOracle`` flips phases from a precomputed cost table. It reaches
  q = 20 and is what scaling experiments use.
* ``CircuitOracle`` runs a synthesized threshold circuit on the full
  statevector (input, cost register and ancillas). It is exact but caps q
  near 8 once the work wires are counted.

Both prepare the input register (qubits ``0..q-1``) in uniform superposition,
so their input-register distributions agree for the same threshold and
iteration count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Protocol

import numpy as np

from .errors import CapacityError, MarkedSetError, SynthesisError
from .qubo import QuboModel, ReducedQubo, all_costs, evaluate, int_to_bits
from .statevector import (
    FUSE_MAX_QUBITS,
    MAX_QUBITS,
    StateVector,
    fuse_circuit,
    run_circuit,
    sample_index,
)
from .synthesis import oracle_width, synthesize_threshold_oracle

SEMANTIC_MAX_Q = 20
SCHEDULE_GROWTH = 6 / 5


@dataclass(frozen=True)
class GroverOutcome:
    measured: tuple[int, ...]
    cost: float
    iterations_used: int
    oracle_calls: int


@dataclass(frozen=True)
class MinFindResult:
    best: tuple[int, ...]
    best_cost: float
    rounds: int
    total_oracle_calls: int
    measurements: int
    cost_history: tuple[float, ...] = ()


class Oracle(Protocol):
    q: int
    num_qubits: int
    model: QuboModel

    def apply(self, state: StateVector) -> None: ...


def _model_of(reduced: ReducedQubo | QuboModel) -> QuboModel:
    return reduced.model if isinstance(reduced, ReducedQubo) else reduced


class SemanticOracle:
    """Phase flip on every input whose tabulated cost is below ``threshold``."""

    def __init__(self, model: QuboModel, threshold: float, costs: np.ndarray | None = None):
        if model.n > SEMANTIC_MAX_Q:
            raise CapacityError(f"semantic backend supports q <= {SEMANTIC_MAX_Q}, got {model.n}")
        self.model = model
        self.q = model.n
        self.num_qubits = model.n
        self.threshold = threshold
        self.costs = all_costs(model) if costs is None else costs
        self.marked = self.costs < threshold

    def apply(self, state: StateVector) -> None:
        view = state.amplitudes.reshape(-1, 1 << self.q)
        view[:, self.marked] *= -1


class CircuitOracle:
    """Runs the synthesized compare-and-flip circuit on the full register.

    With ``fused=True`` (the default when the register is small enough) the
    gate list is folded once into a signed permutation; otherwise gates are
    applied one at a time. Both give identical amplitudes.
    """

    def __init__(self, model: QuboModel, threshold: int, fused: bool | None = None):
        self.model = model
        self.q = model.n
        self.threshold = threshold
        self.circuit = synthesize_threshold_oracle(model, threshold)
        self.num_qubits = self.circuit.num_qubits
        if fused is None:
            fused = self.num_qubits <= FUSE_MAX_QUBITS
        self._fused = fuse_circuit(self.circuit) if fused else None

    def apply(self, state: StateVector) -> None:
        if self._fused is not None:
            self._fused.apply(state)
        else:
            run_circuit(state, self.circuit)


class Diffusion:
    """Reflection about the uniform state of a ``q``-qubit input register.

    Acts on the lowest ``q`` qubits of a larger state as ``I (x) D``.
    """

    def __init__(self, q: int):
        if q < 1:
            raise ValueError("diffusion needs q >= 1")
        self.q = q

    def apply(self, state: StateVector | np.ndarray) -> None:
        amps = state.amplitudes if isinstance(state, StateVector) else state
        view = amps.reshape(-1, 1 << self.q)
        view[:] = 2 * view.mean(axis=1, keepdims=True) - view

    def matrix(self) -> np.ndarray:
        n = 1 << self.q
        return np.full((n, n), 2 / n) - np.eye(n)


def diffusion(q: int) -> Diffusion:
    return Diffusion(q)


def optimal_iterations(N: int, M: int) -> int:
    if M == 0:
        raise MarkedSetError("no marked states; handle the empty set before amplifying")
    if not 1 <= M <= N:
        raise ValueError(f"need 1 <= M <= N, got M={M}, N={N}")
    return max(1, math.floor(math.pi / 4 * math.sqrt(N / M)))


def success_probability(N: int, M: int, r: int) -> float:
    """sin^2((2r+1) theta) with sin^2 theta = M/N."""
    theta = math.asin(math.sqrt(M / N))
    return math.sin((2 * r + 1) * theta) ** 2


def amplify(oracle: Oracle, iterations: int, workers: int = 1) -> StateVector:
    """Uniform superposition on the input register, then ``iterations`` Grover steps."""
    state = StateVector(oracle.num_qubits, workers=workers)
    # Same amplitudes as H on each input qubit of |0...0>, written directly.
    state.amplitudes[0] = 0
    state.amplitudes[: 1 << oracle.q] = 1 / math.sqrt(1 << oracle.q)
    d = Diffusion(oracle.q)
    for _ in range(iterations):
        oracle.apply(state)
        d.apply(state)
    return state


def input_distribution(state: StateVector, q: int) -> np.ndarray:
    """Marginal probabilities of the low ``q`` qubits."""
    return state.probabilities().reshape(-1, 1 << q).sum(axis=0)


def grover_search(oracle: Oracle, q: int, iterations: int, rng: np.random.Generator, workers: int = 1) -> GroverOutcome:
    if q != oracle.q:
        raise ValueError(f"oracle acts on {oracle.q} inputs, asked for q={q}")
    state = amplify(oracle, iterations, workers)
    idx = sample_index(input_distribution(state, q), rng)
    bits = int_to_bits(idx, q)
    return GroverOutcome(bits, evaluate(oracle.model, bits), iterations, iterations)


class SemanticBackend:
    name = "grover-semantic"

    def __init__(self, workers: int = 1):
        self.workers = workers

    def check_capacity(self, model: QuboModel) -> None:
        if model.n > SEMANTIC_MAX_Q:
            raise CapacityError(f"grover-semantic supports q <= {SEMANTIC_MAX_Q}, got q={model.n}")

    def oracle_factory(self, model: QuboModel):
        costs = all_costs(model)
        return lambda threshold: SemanticOracle(model, threshold, costs)


class CircuitBackend:
    name = "grover-circuit"

    def __init__(self, workers: int = 1, fused: bool | None = None):
        self.workers = workers
        self.fused = fused

    @staticmethod
    def qubits_needed(model: QuboModel) -> int:
        """Worst case over every threshold the descent can use."""
        lo, hi = (int(v) for v in model.bounds())
        width = max(oracle_width(model, t) for t in (lo, hi + 1))
        return model.n + 2 * width + 2

    def check_capacity(self, model: QuboModel) -> None:
        if not model.is_integral:
            raise SynthesisError("grover-circuit needs integer coefficients")
        need = self.qubits_needed(model)
        if need > MAX_QUBITS:
            raise CapacityError(f"grover-circuit needs {need} qubits for q={model.n}, cap is {MAX_QUBITS}")

    def oracle_factory(self, model: QuboModel):
        fused = self.fused

        def make(threshold):
            return _cached_circuit_oracle(model, int(threshold), fused)

        return make


@lru_cache(maxsize=256)
def _cached_circuit_oracle(model: QuboModel, threshold: int, fused: bool | None) -> "CircuitOracle":
    # Subspace models recur across annealing steps; synthesis and fusion are the expensive part.
    return CircuitOracle(model, threshold, fused)


def make_backend(name: str, workers: int = 1):
    if name == "grover-semantic":
        return SemanticBackend(workers)
    if name == "grover-circuit":
        return CircuitBackend(workers)
    raise ValueError(f"unknown Grover backend {name!r}")


def durr_hoyer_min(
    reduced: ReducedQubo | QuboModel,
    backend,
    rng: np.random.Generator,
    call_budget: int,
    initial: int | None = None,
    patience: int = 3,
    round_factor: float = 3.0,
) -> MinFindResult:
    """Threshold-descent minimum finding.

    Each round searches for any input cheaper than the current threshold
    using the randomized exponential schedule for an unknown number of
    solutions: draw ``r`` uniformly from ``[0, m)``, run ``r`` Grover
    iterations, measure, and grow ``m`` by 6/5 on failure up to
    ``ceil(pi/4 * sqrt(N))``. A round gives up after spending
    ``round_factor * sqrt(N)`` effort (``max(r, 1)`` per measurement). The
    search stops after ``patience`` consecutive failed rounds or when the
    oracle-call budget is spent.

    ``initial`` seeds the threshold with a known input instead of a uniform
    sample; the hybrid loop passes the current state so the result never
    gets worse than it.
    """
    model = _model_of(reduced)
    backend.check_capacity(model)
    q = model.n
    N = 1 << q
    make_oracle = backend.oracle_factory(model)
    m_cap = math.ceil(math.pi / 4 * math.sqrt(N))
    allowance = round_factor * math.sqrt(N)

    best_idx = int(rng.integers(N)) if initial is None else int(initial)
    best_bits = int_to_bits(best_idx, q)
    best_cost = evaluate(model, best_bits)
    history = [best_cost]
    calls = rounds = failures = 0
    measurements = 1

    while failures < patience and calls < call_budget:
        m = 1.0
        effort = 0.0
        improved = False
        oracle = make_oracle(best_cost)
        while effort < allowance and calls < call_budget:
            r = min(int(rng.random() * m), call_budget - calls)
            outcome = grover_search(oracle, q, r, rng, backend.workers)
            calls += outcome.oracle_calls
            measurements += 1
            effort += max(r, 1)
            if outcome.cost < best_cost:
                best_bits, best_cost = outcome.measured, outcome.cost
                history.append(best_cost)
                improved = True
                break
            m = min(SCHEDULE_GROWTH * m, m_cap)
        if improved:
            rounds += 1
            failures = 0
        else:
            failures += 1
    return MinFindResult(best_bits, best_cost, rounds, calls, measurements, tuple(history))
