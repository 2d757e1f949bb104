"""Analytic runtime model for classical versus Grover-accelerated annealing.

Per annealing iteration the classical cost is ``t_q + t_det``: one QUBO
evaluation plus a residual for proposal, acceptance and cooling. The hybrid
divides only the evaluation part by the Grover gain ``2**(q/2)`` and pays an
overhead factor ``q_oh`` for it:

    T_hy = T_Q / 2**(q/2) * q_oh + T_det

All totals are scaled by ``sa_total / normalization``.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Iterable, NamedTuple

from .qubo import QuboModel, evaluate, evaluate_counted

TQ_CONSTANT = 5.82e-7  # seconds per n**2 at n = 625
DEFAULT_T_Q = 0.228
DEFAULT_T_DET = 1.3e-4
DEFAULT_Q_OH = 100.0
DEFAULT_SA_TOTAL = 1e10
DEFAULT_NORMALIZATION = 1e5
DEFAULT_SATURATION_EPSILON = 0.5


@dataclass(frozen=True)
class RuntimeParams:
    t_q: float = DEFAULT_T_Q
    t_det: float = DEFAULT_T_DET
    q_oh: float = DEFAULT_Q_OH
    sa_total: float = DEFAULT_SA_TOTAL
    normalization: float = DEFAULT_NORMALIZATION

    def __post_init__(self) -> None:
        for name in ("t_q", "sa_total", "normalization"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.t_det < 0:
            raise ValueError("t_det must be non-negative")
        if self.q_oh < 1:
            raise ValueError("q_oh must be at least 1")

    @classmethod
    def from_totals(cls, T_Q: float, T_det: float, q_oh: float = DEFAULT_Q_OH, **kw) -> "RuntimeParams":
        """Build from normalized totals such as T_Q = 22800, T_det = 13."""
        sa_total = kw.get("sa_total", DEFAULT_SA_TOTAL)
        norm = kw.get("normalization", DEFAULT_NORMALIZATION)
        scale = sa_total / norm
        return cls(T_Q / scale, T_det / scale, q_oh, sa_total, norm)

    @property
    def scale(self) -> float:
        return self.sa_total / self.normalization

    @property
    def T_Q(self) -> float:
        return self.t_q * self.scale

    @property
    def T_det(self) -> float:
        return self.t_det * self.scale

    @property
    def T_SA(self) -> float:
        return self.T_Q + self.T_det


class RuntimeBreakdown(NamedTuple):
    T_Q: float
    T_G: float
    T_SA: float
    T_hy: float
    odd_q: bool


@dataclass(frozen=True)
class SpeedupRow:
    q: int
    T_Q: float
    T_G: float
    X_QUBO: float
    T_SA: float
    T_hy: float
    X_SA: float

    def as_dict(self) -> dict:
        return asdict(self)


def calibrate_tq(n: int, c: float = TQ_CONSTANT) -> float:
    """Per-evaluation time under the quadratic cost model, ``c * n**2``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return c * n * n


def grover_gain(q: int, oracle_calls: float | None = None) -> float:
    """Classical evaluations displaced per oracle call.

    Idealized as ``2**(q/2)``; with measured calls per subspace search it
    becomes ``2**q / oracle_calls``.
    """
    if oracle_calls is None:
        return 2 ** (q / 2)
    if oracle_calls <= 0:
        raise ValueError("oracle_calls must be positive")
    return 2**q / oracle_calls


def hybrid_runtime(p: RuntimeParams, q: int, oracle_calls: float | None = None) -> RuntimeBreakdown:
    if q < 0:
        raise ValueError("q must be non-negative")
    T_Q, T_det = p.T_Q, p.T_det
    T_G = T_Q / grover_gain(q, oracle_calls) * p.q_oh
    return RuntimeBreakdown(T_Q, T_G, T_Q + T_det, T_G + T_det, q % 2 == 1)


def speedup_row(p: RuntimeParams, q: int, oracle_calls: float | None = None) -> SpeedupRow:
    b = hybrid_runtime(p, q, oracle_calls)
    return SpeedupRow(q, b.T_Q, b.T_G, b.T_Q / b.T_G, b.T_SA, b.T_hy, b.T_SA / b.T_hy)


def speedup_table(p: RuntimeParams, q_list: Iterable[int]) -> list[SpeedupRow]:
    return [speedup_row(p, q) for q in q_list]


def advantage_threshold(q_oh: float, k: float = 1.0) -> int:
    """Smallest even q with ``2**(q/2) / k > q_oh``.

    ``k`` is the constant in front of ``2**(q/2)`` in the realized oracle
    call count; ``k = 1`` is the idealized model.
    """
    if q_oh < 1:
        raise ValueError("q_oh must be at least 1")
    if not k > 0:
        raise ValueError("k must be positive")
    q = 2
    while 2 ** (q / 2) / k <= q_oh:
        q += 2
    return q


class Saturation(NamedTuple):
    q: int
    reached: bool


def saturation_q(
    p: RuntimeParams, epsilon: float = DEFAULT_SATURATION_EPSILON, q_max: int = 64
) -> Saturation:
    """Smallest even q where two more qubits raise X_SA by less than ``epsilon`` (relative).

    Returns ``(q_max, False)`` when no such q exists up to ``q_max``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    for q in range(2, q_max - 1, 2):
        here = speedup_row(p, q).X_SA
        nxt = speedup_row(p, q + 2).X_SA
        if (nxt - here) / here < epsilon:
            return Saturation(q, True)
    return Saturation(q_max, False)


def figure_rows(p: RuntimeParams, q_list: Iterable[int]) -> list[dict]:
    """Runtime and speedup series with log10 columns for plotting."""
    out = []
    for row in speedup_table(p, q_list):
        out.append(
            {
                "q": row.q,
                "QUBO": row.T_Q,
                "Grover": row.T_G,
                "SA": row.T_SA,
                "SA+Grover": row.T_hy,
                "log10_QUBO": math.log10(row.T_Q),
                "log10_Grover": math.log10(row.T_G),
                "log10_SA": math.log10(row.T_SA),
                "log10_SA+Grover": math.log10(row.T_hy),
                "X_QUBO": row.X_QUBO,
                "X_SA": row.X_SA,
                "log10_X_QUBO": math.log10(row.X_QUBO),
                "log10_X_SA": math.log10(row.X_SA),
            }
        )
    return out


def evaluation_ops(model: QuboModel) -> int:
    """Term operations one evaluation of ``model`` performs."""
    return evaluate_counted(model, [0] * model.n)[1]


def measure_seconds_per_op(model: QuboModel, repeats: int = 20) -> float:
    """Wall-clock seconds per term operation of the local evaluator."""
    bits = [1] * model.n
    ops = evaluation_ops(model)
    start = time.perf_counter()
    for _ in range(repeats):
        evaluate(model, bits)
    return (time.perf_counter() - start) / (repeats * ops)


def local_tq_constant(model: QuboModel, seconds_per_op: float) -> float:
    """The ``c`` of ``t_Q = c * n**2`` implied by the evaluator's op count."""
    return seconds_per_op * evaluation_ops(model) / model.n**2
