"""Simulated annealing: the single-flip baseline and the subspace-search hybrid.

The hybrid keeps the annealing loop classical. Each outer iteration picks q
free variables, freezes the rest at their current values, asks a backend for
the best completion of the free bits, and runs the Metropolis test on that
candidate. Because the current values of the free bits are one of the 2^q
completions, an exact backend never proposes a worse state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapacityError, DimensionError
from .grover import durr_hoyer_min, make_backend
from .qubo import (
    BRUTE_FORCE_MAX_N,
    PartialAssignment,
    QuboModel,
    all_costs,
    bits_to_int,
    evaluate,
    fix_variables,
    int_to_bits,
)

BACKENDS = ("classical-exhaustive", "grover-semantic", "grover-circuit")


@dataclass(frozen=True)
class SaConfig:
    initial_temperature: float = 10.0
    cooling_factor: float = 0.99
    outer_iterations: int = 1000
    q: int = 0
    seed: int = 0
    backend: str = "classical-exhaustive"
    grover_k: float = 20.0  # per-step oracle budget is grover_k * 2**(q/2)
    patience: int = 3
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.initial_temperature > 0:
            raise ValueError("initial_temperature must be positive")
        if not 0 < self.cooling_factor < 1:
            raise ValueError("cooling_factor must lie in (0, 1)")
        if self.outer_iterations < 1:
            raise ValueError("outer_iterations must be at least 1")
        if self.q < 0:
            raise ValueError("q must be non-negative")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if not self.grover_k > 0:
            raise ValueError("grover_k must be positive")


@dataclass
class SaResult:
    best_assignment: tuple[int, ...]
    best_cost: float
    cost_trace: list[float] = field(default_factory=list)
    classical_evaluations: int = 0
    oracle_calls: int = 0
    grover_iterations: int = 0
    configurations_explored: int = 0
    accepted_moves: int = 0


@dataclass(frozen=True)
class StepAccounting:
    classical_evaluations: int
    oracle_calls: int
    grover_iterations: int
    accepted: bool


def _metropolis(delta: float, temperature: float, rng: np.random.Generator) -> bool:
    if delta <= 0:
        return True
    # the draw is kept even when the temperature has underflowed to 0, so seeded runs stay aligned
    scaled = float(delta) / temperature if temperature > 0 else math.inf
    return rng.random() < math.exp(-scaled)


def classical_sa(model: QuboModel, cfg: SaConfig) -> SaResult:
    """Single-bit-flip annealing with geometric cooling.

    Energy changes come from a maintained local field, so each proposal is
    one cost evaluation.
    """
    rng = np.random.default_rng(cfg.seed)
    n = model.n
    if n < 1:
        raise DimensionError("model has no variables")
    h, W = model.to_dense()
    x = rng.integers(0, 2, size=n)
    cost = evaluate(model, x.tolist())
    local = h + W @ x
    best, best_cost = x.copy(), cost
    T = cfg.initial_temperature
    trace = []
    accepted = 0
    for _ in range(cfg.outer_iterations):
        i = int(rng.integers(n))
        delta = (1 - 2 * x[i]) * local[i]
        if _metropolis(delta, T, rng):
            step = 1 - 2 * x[i]
            x[i] ^= 1
            local += W[:, i] * step
            cost += delta
            accepted += 1
            if cost < best_cost:
                best, best_cost = x.copy(), cost
        trace.append(float(best_cost))
        T *= cfg.cooling_factor
    best_t = tuple(int(b) for b in best)
    return SaResult(
        best_assignment=best_t,
        best_cost=evaluate(model, best_t),
        cost_trace=trace,
        classical_evaluations=cfg.outer_iterations,
        configurations_explored=cfg.outer_iterations,
        accepted_moves=accepted,
    )


def select_free_bits(n: int, q: int, rng: np.random.Generator) -> tuple[int, ...]:
    """``q`` distinct indices, uniform without replacement, in ascending order."""
    if not 0 <= q <= n:
        raise DimensionError(f"cannot free {q} of {n} variables")
    return tuple(sorted(int(i) for i in rng.choice(n, size=q, replace=False)))


def _grover_budget(k: float, q: int) -> int:
    return max(1, math.floor(k * 2 ** (q / 2)))


def hybrid_step(
    model: QuboModel,
    current: Sequence[int],
    free: Sequence[int],
    backend,
    temperature: float,
    rng: np.random.Generator,
    grover_k: float = 20.0,
    patience: int = 3,
    current_cost: float | None = None,
) -> tuple[list[int], float, StepAccounting]:
    """One outer iteration of the hybrid loop.

    ``backend`` is ``"classical-exhaustive"`` or a Grover backend object or
    name. Returns the next state, its cost and the step's counters.
    """
    current = [int(b) for b in current]
    evals = 0
    if current_cost is None:
        current_cost = evaluate(model, current)
        evals += 1
    q = len(free)
    if q == 0:
        return current, current_cost, StepAccounting(evals, 0, 0, False)

    p = PartialAssignment.from_assignment(current, free)
    reduced = fix_variables(model, p)
    current_idx = bits_to_int([current[i] for i in free])
    calls = 0
    if backend == "classical-exhaustive":
        if q > BRUTE_FORCE_MAX_N:
            raise CapacityError(f"classical-exhaustive supports q <= {BRUTE_FORCE_MAX_N}, got {q}")
        costs = all_costs(reduced.model)
        best_idx = int(np.argmin(costs))
        if costs[best_idx] >= costs[current_idx]:
            best_idx = current_idx
        completion = int_to_bits(best_idx, q)
        evals += 1 << q
    else:
        if isinstance(backend, str):
            backend = make_backend(backend)
        found = durr_hoyer_min(
            reduced, backend, rng, _grover_budget(grover_k, q), initial=current_idx, patience=patience
        )
        completion = found.best
        calls = found.total_oracle_calls
        evals += found.measurements

    candidate = p.merge(completion)
    candidate_cost = evaluate(model, candidate)
    evals += 1
    accepted = _metropolis(candidate_cost - current_cost, temperature, rng)
    if accepted:
        return candidate, candidate_cost, StepAccounting(evals, calls, calls, True)
    return current, current_cost, StepAccounting(evals, calls, calls, False)


def hybrid_sa(model: QuboModel, cfg: SaConfig) -> SaResult:
    if cfg.q < 1:
        raise ValueError("hybrid annealing needs q >= 1")
    if cfg.q > model.n:
        raise DimensionError(f"q={cfg.q} exceeds n={model.n}")
    backend = cfg.backend
    if backend != "classical-exhaustive":
        backend = make_backend(backend, cfg.workers)
    rng = np.random.default_rng(cfg.seed)
    x = [int(b) for b in rng.integers(0, 2, size=model.n)]
    cost = evaluate(model, x)
    best, best_cost = tuple(x), cost
    result = SaResult(best, best_cost, classical_evaluations=1)
    T = cfg.initial_temperature
    for _ in range(cfg.outer_iterations):
        free = select_free_bits(model.n, cfg.q, rng)
        x, cost, acct = hybrid_step(
            model, x, free, backend, T, rng, cfg.grover_k, cfg.patience, current_cost=cost
        )
        result.classical_evaluations += acct.classical_evaluations
        result.oracle_calls += acct.oracle_calls
        result.grover_iterations += acct.grover_iterations
        result.accepted_moves += acct.accepted
        if cost < best_cost:
            best, best_cost = tuple(x), cost
        result.cost_trace.append(best_cost)
        T *= cfg.cooling_factor
    result.best_assignment = best
    result.best_cost = evaluate(model, best)
    result.configurations_explored = cfg.outer_iterations << cfg.q
    return result
