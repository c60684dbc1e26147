"""Markov operators and conditional expectations on finite spaces.

A Markov operator from functions on a finite set of size n1 to functions on
a set of size n2 is a nonnegative n2 x n1 matrix whose rows sum to one.
Conditioning on a finite partition is the special case of block averaging.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr import Expr, evaluate
from .hull import HullPolygon, OutOfDomainError, PLFunction, eval_pl, margins_many

BOUND_TOLERANCE = 1e-9
ROW_TOLERANCE = 1e-12


class InvariantViolation(RuntimeError):
    """An averaged point left the hull of K, which valid inputs cannot cause."""


@dataclass(frozen=True)
class MarkovOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise ValueError("a Markov operator needs a nonempty 2-D matrix")
        if (m < 0).any():
            raise ValueError("Markov operator entries must be nonnegative")
        sums = m.sum(axis=1)
        if np.abs(sums - 1.0).max() > ROW_TOLERANCE:
            raise ValueError(f"rows must sum to 1, worst row sums to {sums[np.argmax(np.abs(sums - 1))]!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __matmul__(self, other: "MarkovOperator") -> "MarkovOperator":
        return MarkovOperator(self.matrix @ other.matrix)

    def to_json(self) -> dict:
        return {"matrix": self.matrix.tolist()}


def expectation_operator(n: int, weights=None) -> MarkovOperator:
    """The expectation as a one-row Markov operator (uniform weights by default)."""
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    return MarkovOperator(w.reshape(1, -1))


def random_stochastic(rows: int, cols: int, seed: int) -> MarkovOperator:
    """Rows of i.i.d. uniform(0, 1) entries, normalised to sum to one."""
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.0, 1.0, size=(rows, cols))
    m /= m.sum(axis=1, keepdims=True)
    return MarkovOperator(m)


def apply(M: MarkovOperator, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[0] != M.shape[1]:
        raise ValueError(f"operator takes vectors of length {M.shape[1]}, got {v.shape[0]}")
    return M.matrix @ v


@dataclass(frozen=True)
class FiniteConditioning:
    """Probability weights on atoms ``0..n-1`` and a partition into blocks."""

    omega_weights: tuple[float, ...]
    partition: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.omega_weights)
        blocks = tuple(tuple(int(i) for i in b) for b in self.partition)
        if any(x <= 0 for x in w):
            raise ValueError("atom weights must be strictly positive")
        if abs(sum(w) - 1.0) > ROW_TOLERANCE:
            raise ValueError(f"atom weights sum to {sum(w)!r}, not 1")
        seen = sorted(i for b in blocks for i in b)
        if seen != list(range(len(w))):
            raise ValueError("partition blocks must cover every atom exactly once")
        if any(not b for b in blocks):
            raise ValueError("partition blocks must be nonempty")
        object.__setattr__(self, "omega_weights", w)
        object.__setattr__(self, "partition", blocks)

    def __len__(self) -> int:
        return len(self.omega_weights)

    def as_operator(self) -> MarkovOperator:
        """Conditional expectation written as an n x n Markov matrix."""
        n = len(self)
        w = np.array(self.omega_weights)
        m = np.zeros((n, n))
        for block in self.partition:
            idx = list(block)
            m[np.ix_(idx, idx)] = w[idx] / w[idx].sum()
        return MarkovOperator(m)

    def coarsen(self, merge: list[list[int]]) -> "FiniteConditioning":
        """Merge blocks: ``merge`` lists groups of block indices."""
        blocks = tuple(tuple(sorted(i for b in group for i in self.partition[b])) for group in merge)
        return FiniteConditioning(self.omega_weights, blocks)

    def to_json(self) -> dict:
        return {"weights": list(self.omega_weights), "partition": [list(b) for b in self.partition]}


def random_conditioning(n: int, seed: int, max_blocks: int | None = None) -> FiniteConditioning:
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.0, 1.0, size=n) + 1e-3
    w /= w.sum()
    k = int(rng.integers(1, (max_blocks or n) + 1))
    labels = rng.integers(0, k, size=n)
    blocks = [tuple(np.flatnonzero(labels == j).tolist()) for j in range(k)]
    return FiniteConditioning(tuple(w), tuple(b for b in blocks if b))


def conditional_expectation(c: FiniteConditioning, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[0] != len(c):
        raise ValueError(f"expected a vector of length {len(c)}, got {v.shape[0]}")
    w = np.array(c.omega_weights)
    out = np.empty_like(v)
    for block in c.partition:
        idx = list(block)
        if len(idx) == 1:
            out[idx] = v[idx]
            continue
        total = w[idx].sum()
        if total <= 0:
            raise ZeroDivisionError("block with zero total weight")
        out[idx] = np.dot(w[idx], v[idx]) / total
    return out


@dataclass
class BoundsCheck:
    """Per-coordinate outcome of a bounds verification."""

    mean_x: np.ndarray
    mean_f: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    passed: np.ndarray
    c_l: list = field(default_factory=list)
    c_u: list = field(default_factory=list)
    tol: float = BOUND_TOLERANCE

    @property
    def lower_margin(self) -> np.ndarray:
        return self.mean_f - self.lower

    @property
    def upper_margin(self) -> np.ndarray:
        return self.upper - self.mean_f

    @property
    def ok(self) -> bool:
        return bool(self.passed.all())

    @property
    def violations(self) -> int:
        return int((~self.passed).sum())

    def to_json(self) -> dict:
        rows = []
        for i in range(len(self.mean_x)):
            rows.append({
                "index": i,
                "mean_x": float(self.mean_x[i]),
                "mean_f": float(self.mean_f[i]),
                "lower": float(self.lower[i]),
                "upper": float(self.upper[i]),
                "lower_margin": float(self.lower_margin[i]),
                "upper_margin": float(self.upper_margin[i]),
                "c_l": self.c_l[i] if self.c_l else None,
                "c_u": self.c_u[i] if self.c_u else None,
                "pass": bool(self.passed[i]),
            })
        return {"tolerance": self.tol, "violations": self.violations, "coordinates": rows}


def _check(u, w, f: Expr, g_l: PLFunction, g_u: PLFunction, domain, tol: float) -> BoundsCheck:
    try:
        lower = np.array([eval_pl(g_l, x) for x in u])
        upper = np.array([eval_pl(g_u, x) for x in u])
    except OutOfDomainError as exc:
        raise InvariantViolation(f"averaged state {exc.x!r} left CH(K)") from exc
    passed = (lower - tol <= w) & (w <= upper + tol)
    c_l, c_u = [], []
    if domain is not None:
        for x, lo, hi in zip(u, lower, upper):
            fx = evaluate(f, x) if x in domain else None
            ok = fx is not None and fx != 0.0
            c_l.append(lo / fx if ok else None)
            c_u.append(hi / fx if ok else None)
    return BoundsCheck(u, w, lower, upper, passed, c_l, c_u, tol)


def verify_markov_bounds(
    M: MarkovOperator,
    x_vals,
    f: Expr,
    g_l: PLFunction,
    g_u: PLFunction,
    domain=None,
    tol: float = BOUND_TOLERANCE,
) -> BoundsCheck:
    """Check ``g_l(M x) <= M f(x) <= g_u(M x)`` in every output coordinate.

    ``x_vals`` should be points of the sampled grid: the envelopes come from
    the sampled hull, so off-grid points can sit slightly outside it.
    """
    x = np.asarray(x_vals, dtype=float)
    fx = np.array([evaluate(f, xi) for xi in x])
    return _check(apply(M, x), apply(M, fx), f, g_l, g_u, domain, tol)


def verify_conditional_bounds(
    c: FiniteConditioning,
    x_vals,
    f: Expr,
    g_l: PLFunction,
    g_u: PLFunction,
    domain=None,
    tol: float = BOUND_TOLERANCE,
) -> BoundsCheck:
    """Same check with ``M`` replaced by conditioning on the partition of ``c``.

    Every atom has positive weight, so "almost surely" means "at every atom".
    """
    x = np.asarray(x_vals, dtype=float)
    fx = np.array([evaluate(f, xi) for xi in x])
    return _check(
        conditional_expectation(c, x), conditional_expectation(c, fx), f, g_l, g_u, domain, tol
    )


def hull_preserved(M: MarkovOperator, z, h: HullPolygon, tol: float = BOUND_TOLERANCE) -> bool:
    """Apply ``M`` to each coordinate of the points ``z``; all images stay in ``h``."""
    z = np.asarray(z, dtype=float)
    images = np.column_stack([apply(M, z[:, 0]), apply(M, z[:, 1])])
    return bool((margins_many(h, images) >= -tol).all())
