"""Domains made of finitely many closed intervals, and sampled graphs over them."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .expr import EvaluationError, Expr, evaluate

DEFAULT_RESOLUTION = 2049


class DomainError(ValueError):
    pass


class SamplingError(ArithmeticError):
    def __init__(self, x: float, reason: str):
        super().__init__(f"cannot evaluate f at x = {x!r}: {reason}")
        self.x = x


@dataclass(frozen=True)
class Domain:
    """Sorted, pairwise disjoint closed intervals ``[lo, hi]``."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        if not ivs:
            raise DomainError("a domain needs at least one interval")
        for lo, hi in ivs:
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise DomainError(f"interval [{lo}, {hi}] is unbounded")
            if lo > hi:
                raise DomainError(f"interval [{lo}, {hi}] has lo > hi")
        for (_, hi), (lo, _) in zip(ivs, ivs[1:]):
            if lo <= hi:
                raise DomainError("intervals must be sorted and pairwise disjoint")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def of(cls, *intervals) -> "Domain":
        return cls(tuple(tuple(iv) for iv in intervals))

    def __contains__(self, x: float) -> bool:
        return any(lo <= x <= hi for lo, hi in self.intervals)

    def hull(self) -> tuple[float, float]:
        return hull_of_K(self)

    def to_json(self) -> list[list[float]]:
        return [[lo, hi] for lo, hi in self.intervals]

    def __str__(self) -> str:
        return "u".join(f"[{lo!r},{hi!r}]" for lo, hi in self.intervals)


_NUM = r"\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*"
_INTERVAL = re.compile(r"\s*\[" + _NUM + "," + _NUM + r"\]\s*")


def parse_domain(text) -> Domain:
    """Build a Domain from ``"[a,b]u[c,d]"`` text or a JSON-style list of pairs."""
    if not isinstance(text, str):
        try:
            return Domain(tuple((lo, hi) for lo, hi in text))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"expected a list of [lo, hi] pairs, got {text!r}") from None
    parts = re.split(r"[uU∪]", text)
    intervals = []
    for part in parts:
        m = _INTERVAL.fullmatch(part)
        if m is None:
            raise DomainError(f"cannot parse interval {part.strip()!r}; expected [a,b]")
        intervals.append((float(m.group(1)), float(m.group(2))))
    return Domain(tuple(intervals))


def hull_of_K(d: Domain) -> tuple[float, float]:
    """Convex hull of the domain on the real line."""
    return d.intervals[0][0], d.intervals[-1][1]


def grid(d: Domain, n_per_interval: int = DEFAULT_RESOLUTION) -> list[float]:
    """Uniform grid with ``n_per_interval`` points per interval, endpoints included.

    Grid ``2n - 1`` contains grid ``n`` bit for bit: node ``i`` of an ``n``-grid
    is ``lo + (hi - lo) * (i / (n - 1))`` and ``2i / (2n - 2)`` rounds to the
    same double as ``i / (n - 1)``.
    """
    if n_per_interval < 2:
        raise ValueError("n_per_interval must be at least 2")
    xs = []
    for lo, hi in d.intervals:
        if lo == hi:
            xs.append(lo)
            continue
        width = hi - lo
        m = n_per_interval - 1
        xs.append(lo)
        xs.extend(lo + width * (i / m) for i in range(1, m))
        xs.append(hi)
    return xs


@dataclass(frozen=True)
class SampledGraph:
    points: tuple[tuple[float, float], ...]
    grid: tuple[float, ...]
    resolution: int

    @property
    def xs(self) -> tuple[float, ...]:
        return self.grid

    @property
    def ys(self) -> tuple[float, ...]:
        return tuple(p[1] for p in self.points)

    def __len__(self) -> int:
        return len(self.points)


def sample(f: Expr, d: Domain, n_per_interval: int = DEFAULT_RESOLUTION) -> SampledGraph:
    """Evaluate ``f`` on the uniform grid of ``d``.

    Any evaluation failure aborts with :class:`SamplingError` carrying the
    offending ``x``.
    """
    xs = grid(d, n_per_interval)
    pts = []
    for x in xs:
        try:
            pts.append((x, evaluate(f, x)))
        except EvaluationError as exc:
            raise SamplingError(x, str(exc)) from exc
    return SampledGraph(tuple(pts), tuple(xs), n_per_interval)
