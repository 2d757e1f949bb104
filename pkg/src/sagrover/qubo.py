"""QUBO models: evaluation, exhaustive search, variable fixing, generation and text I/O.

A model is the polynomial

    f(x) = offset + sum_i linear[i] x_i + sum_{i<j} quadratic[(i, j)] x_i x_j

over binary x. Whenever an assignment is encoded as an integer, variable 0
is the least significant bit. Display strings put x_0 leftmost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, ParseError, PartitionError

Assignment = Sequence[int]

BRUTE_FORCE_MAX_N = 24
FORMAT_VERSION = 1


def _is_integral(value: float) -> bool:
    return float(value).is_integer()


def _clean(value):
    """Keep integral values as ``int`` so they print and compare exactly."""
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    return int(value) if value.is_integer() else value


@dataclass(frozen=True)
class QuboModel:
    """Immutable quadratic pseudo-Boolean function over ``n`` binary variables.

    Zero coefficients are dropped on construction, so two models compare
    equal exactly when they define the same polynomial.
    """

    n: int
    linear: Mapping[int, float] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise DimensionError(f"n must be non-negative, got {self.n}")
        linear = {}
        for i, c in self.linear.items():
            i = int(i)
            if not 0 <= i < self.n:
                raise DimensionError(f"linear index {i} out of range [0, {self.n})")
            if not math.isfinite(c):
                raise ValueError(f"linear coefficient for {i} is not finite")
            if c != 0:
                linear[i] = _clean(c)
        quadratic = {}
        for key, c in self.quadratic.items():
            i, j = int(key[0]), int(key[1])
            if not i < j:
                raise DimensionError(f"quadratic key ({i}, {j}) must satisfy i < j")
            if not (0 <= i and j < self.n):
                raise DimensionError(f"quadratic key ({i}, {j}) out of range [0, {self.n})")
            if not math.isfinite(c):
                raise ValueError(f"quadratic coefficient for ({i}, {j}) is not finite")
            if c != 0:
                quadratic[(i, j)] = _clean(c)
        if not math.isfinite(self.offset):
            raise ValueError("offset is not finite")
        object.__setattr__(self, "linear", dict(sorted(linear.items())))
        object.__setattr__(self, "quadratic", dict(sorted(quadratic.items())))
        object.__setattr__(self, "offset", _clean(self.offset))

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.linear.items()), tuple(self.quadratic.items()), self.offset))

    @property
    def num_terms(self) -> int:
        """Nonzero non-constant monomials."""
        return len(self.linear) + len(self.quadratic)

    @property
    def is_integral(self) -> bool:
        coeffs = [self.offset, *self.linear.values(), *self.quadratic.values()]
        return all(_is_integral(c) for c in coeffs)

    def bounds(self) -> tuple[float, float]:
        """Lower and upper cost bounds from the signed coefficient sums."""
        coeffs = [*self.linear.values(), *self.quadratic.values()]
        lo = self.offset + sum(c for c in coeffs if c < 0)
        hi = self.offset + sum(c for c in coeffs if c > 0)
        return lo, hi

    def to_dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(h, W)`` with ``W`` symmetric, zero diagonal.

        ``f(x) = offset + h.x + x.W.x / 2``.
        """
        h = np.zeros(self.n)
        W = np.zeros((self.n, self.n))
        for i, c in self.linear.items():
            h[i] = c
        for (i, j), c in self.quadratic.items():
            W[i, j] = W[j, i] = c
        return h, W


@dataclass(frozen=True)
class PartialAssignment:
    """Fixed bit values plus the ordered list of free variable indices."""

    fixed: Mapping[int, int]
    free: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fixed", {int(k): int(v) for k, v in self.fixed.items()})
        object.__setattr__(self, "free", tuple(int(i) for i in self.free))
        for k, v in self.fixed.items():
            if v not in (0, 1):
                raise PartitionError(f"fixed value for x{k} must be 0 or 1, got {v}")

    @property
    def q(self) -> int:
        return len(self.free)

    def validate(self, n: int) -> None:
        if len(set(self.free)) != len(self.free):
            raise PartitionError("free list contains duplicate indices")
        overlap = set(self.fixed) & set(self.free)
        if overlap:
            raise PartitionError(f"indices both fixed and free: {sorted(overlap)}")
        covered = set(self.fixed) | set(self.free)
        if covered != set(range(n)):
            missing = sorted(set(range(n)) - covered)
            extra = sorted(covered - set(range(n)))
            raise PartitionError(f"not a partition of [0, {n}): missing {missing}, out of range {extra}")

    def merge(self, completion: Sequence[int]) -> list[int]:
        """Full assignment from the fixed bits and values for the free bits."""
        if len(completion) != len(self.free):
            raise DimensionError(f"completion has {len(completion)} bits, expected {len(self.free)}")
        n = len(self.fixed) + len(self.free)
        bits = [0] * n
        for k, v in self.fixed.items():
            bits[k] = v
        for idx, v in zip(self.free, completion):
            bits[idx] = int(v)
        return bits

    @classmethod
    def from_assignment(cls, bits: Sequence[int], free: Sequence[int]) -> "PartialAssignment":
        """Fix every variable outside ``free`` to its value in ``bits``."""
        free_set = set(free)
        fixed = {i: int(b) for i, b in enumerate(bits) if i not in free_set}
        return cls(fixed=fixed, free=tuple(free))


@dataclass(frozen=True)
class ReducedQubo:
    """A model over the free variables of a partial assignment.

    ``folded_offset`` is the constant absorbed while fixing bits; it is
    already part of ``model.offset``.
    """

    model: QuboModel
    index_map: tuple[int, ...]
    folded_offset: float

    @property
    def q(self) -> int:
        return self.model.n


class BruteForceResult(NamedTuple):
    assignment: tuple[int, ...]
    cost: float
    count: int


def bits_to_int(bits: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def int_to_bits(value: int, n: int) -> tuple[int, ...]:
    return tuple((value >> i) & 1 for i in range(n))


def format_bits(bits: Sequence[int]) -> str:
    """Render with x_0 leftmost."""
    return "".join(str(int(b)) for b in bits)


def parse_bits(text: str) -> tuple[int, ...]:
    if any(ch not in "01" for ch in text):
        raise ValueError(f"not a bitstring: {text!r}")
    return tuple(int(ch) for ch in text)


def evaluate(model: QuboModel, a: Assignment) -> float:
    return evaluate_counted(model, a)[0]


def evaluate_counted(model: QuboModel, a: Assignment) -> tuple[float, int]:
    """Evaluate and also return the number of term operations performed.

    One operation per monomial visited plus one for the offset, which is the
    unit behind the quadratic evaluation-cost model.
    """
    if len(a) != model.n:
        raise DimensionError(f"assignment has {len(a)} bits, model has n={model.n}")
    cost = model.offset
    ops = 1
    for i, c in model.linear.items():
        cost += c * a[i]
        ops += 1
    for (i, j), c in model.quadratic.items():
        cost += c * a[i] * a[j]
        ops += 1
    return _clean(cost), ops


def all_costs(model: QuboModel, max_n: int = BRUTE_FORCE_MAX_N) -> np.ndarray:
    """Cost of every assignment, indexed by its integer encoding.

    Built by doubling: the costs with bit k set are the costs without it plus
    the local field of variable k over the lower bits.
    """
    n = model.n
    if n > max_n:
        raise CapacityError(f"enumeration of n={n} exceeds limit {max_n}")
    h, W = model.to_dense()
    costs = np.array([float(model.offset)])
    for k in range(n):
        size = 1 << k
        idx = np.arange(size)
        field_k = np.full(size, h[k])
        for j in range(k):
            if W[j, k] != 0:
                field_k += W[j, k] * ((idx >> j) & 1)
        costs = np.concatenate([costs, costs + field_k])
    return costs


def brute_force_min(model: QuboModel) -> BruteForceResult:
    """Exhaustive minimum; ties resolve to the lowest integer encoding."""
    costs = all_costs(model)
    best = int(np.argmin(costs))
    cost = costs[best]
    count = int(np.count_nonzero(costs == cost))
    return BruteForceResult(int_to_bits(best, model.n), _clean(cost), count)


def fix_variables(model: QuboModel, p: PartialAssignment) -> ReducedQubo:
    p.validate(model.n)
    position = {orig: k for k, orig in enumerate(p.free)}
    offset = model.offset
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    for i, c in model.linear.items():
        if i in position:
            linear[position[i]] = linear.get(position[i], 0) + c
        elif p.fixed[i]:
            offset += c
    for (i, j), c in model.quadratic.items():
        fi, fj = i in position, j in position
        if fi and fj:
            a, b = sorted((position[i], position[j]))
            quadratic[(a, b)] = c
        elif fi:
            if p.fixed[j]:
                linear[position[i]] = linear.get(position[i], 0) + c
        elif fj:
            if p.fixed[i]:
                linear[position[j]] = linear.get(position[j], 0) + c
        elif p.fixed[i] and p.fixed[j]:
            offset += c
    reduced = QuboModel(n=len(p.free), linear=linear, quadratic=quadratic, offset=offset)
    return ReducedQubo(model=reduced, index_map=tuple(p.free), folded_offset=_clean(offset - model.offset))


def _nonzero_uniform(rng: np.random.Generator, bound: int, size: int) -> np.ndarray:
    v = rng.integers(0, 2 * bound, size=size)
    return np.where(v < bound, v - bound, v - bound + 1)


def random_instance(n: int, density: float, coeff_range: int, seed: int) -> QuboModel:
    """Synthetic instance with nonzero integer coefficients in [-coeff_range, coeff_range]."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if coeff_range < 1:
        raise ValueError("coeff_range must be at least 1")
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    lin_mask = rng.random(n) < density
    lin_vals = _nonzero_uniform(rng, coeff_range, n)
    iu, ju = np.triu_indices(n, k=1)
    quad_mask = rng.random(iu.size) < density
    quad_vals = _nonzero_uniform(rng, coeff_range, iu.size)
    linear = {int(i): int(lin_vals[i]) for i in np.flatnonzero(lin_mask)}
    quadratic = {
        (int(iu[k]), int(ju[k])): int(quad_vals[k]) for k in np.flatnonzero(quad_mask)
    }
    return QuboModel(n=n, linear=linear, quadratic=quadratic, offset=0)


def _format_coeff(c) -> str:
    if _is_integral(c):
        return str(int(c))
    return repr(float(c))


def serialize_model(model: QuboModel) -> str:
    lines = [f"qubo {FORMAT_VERSION}", f"n {model.n}", f"offset {_format_coeff(model.offset)}"]
    lines += [f"l {i} {_format_coeff(c)}" for i, c in model.linear.items()]
    lines += [f"q {i} {j} {_format_coeff(c)}" for (i, j), c in model.quadratic.items()]
    return "\n".join(lines) + "\n"


def _parse_number(token: str, line_no: int):
    try:
        return int(token)
    except ValueError:
        pass
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"invalid coefficient {token!r}", line_no) from None
    if not math.isfinite(value):
        raise ParseError(f"coefficient {token!r} is not finite", line_no)
    return value


def _parse_index(token: str, n: int, line_no: int) -> int:
    try:
        idx = int(token)
    except ValueError:
        raise ParseError(f"invalid index {token!r}", line_no) from None
    if not 0 <= idx < n:
        raise ParseError(f"index {idx} out of range [0, {n})", line_no)
    return idx


def parse_model(text: str) -> QuboModel:
    n = None
    offset = None
    seen_header = False
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        key, args = tokens[0], tokens[1:]
        if not seen_header:
            if key != "qubo" or len(args) != 1:
                raise ParseError("expected header 'qubo <version>'", line_no)
            if args[0] != str(FORMAT_VERSION):
                raise ParseError(f"unsupported format version {args[0]!r}", line_no)
            seen_header = True
            continue
        if key == "n":
            if n is not None or len(args) != 1:
                raise ParseError("'n' must appear once with one value", line_no)
            try:
                n = int(args[0])
            except ValueError:
                raise ParseError(f"invalid variable count {args[0]!r}", line_no) from None
            if n < 0:
                raise ParseError("variable count must be non-negative", line_no)
            continue
        if n is None:
            raise ParseError(f"'{key}' before 'n' declaration", line_no)
        if key == "offset":
            if offset is not None or len(args) != 1:
                raise ParseError("'offset' must appear once with one value", line_no)
            offset = _parse_number(args[0], line_no)
        elif key == "l":
            if len(args) != 2:
                raise ParseError("expected 'l <index> <coeff>'", line_no)
            i = _parse_index(args[0], n, line_no)
            if i in linear:
                raise ParseError(f"duplicate linear term {i}", line_no)
            linear[i] = _parse_number(args[1], line_no)
        elif key == "q":
            if len(args) != 3:
                raise ParseError("expected 'q <i> <j> <coeff>'", line_no)
            i = _parse_index(args[0], n, line_no)
            j = _parse_index(args[1], n, line_no)
            if not i < j:
                raise ParseError(f"quadratic term requires i < j, got {i} {j}", line_no)
            if (i, j) in quadratic:
                raise ParseError(f"duplicate quadratic term {i} {j}", line_no)
            quadratic[(i, j)] = _parse_number(args[2], line_no)
        else:
            raise ParseError(f"unknown record {key!r}", line_no)
    if not seen_header:
        raise ParseError("missing 'qubo' header")
    if n is None:
        raise ParseError("missing 'n' declaration")
    return QuboModel(n=n, linear=linear, quadratic=quadratic, offset=offset or 0)


def five_variable_example() -> QuboModel:
    """The five-variable worked example used throughout the docs and tests.

    f = x1x2 + 2x2x4 + 3x1x4 + x0x1 + 5x0 + 2x2x3 - 2x2 + 4x3x4 - 4x4 + x3 - 1
    """
    return QuboModel(
        n=5,
        linear={0: 5, 2: -2, 3: 1, 4: -4},
        quadratic={(1, 2): 1, (2, 4): 2, (1, 4): 3, (0, 1): 1, (2, 3): 2, (3, 4): 4},
        offset=-1,
    )
