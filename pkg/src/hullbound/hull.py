"""Planar convex hulls and the lower/upper envelope functions of a hull."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Point = tuple[float, float]

END_TOLERANCE = 1e-12

# Shewchuk's error bound for the non-robust orientation determinant
_CCW_ERRBOUND = (3.0 + 16.0 * 2.0**-53) * 2.0**-53


def orient(a: Point, b: Point, c: Point) -> int:
    """Sign of the cross product ``(b - a) x (c - a)``, computed exactly.

    +1 for a counterclockwise turn, -1 for clockwise, 0 for collinear.
    A floating-point filter handles the common case; ambiguous cases fall
    back to rational arithmetic.
    """
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    if abs(det) >= _CCW_ERRBOUND * (abs(detleft) + abs(detright)) and det != 0.0:
        return 1 if det > 0 else -1
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (*a, *b, *c))
    exact = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (exact > 0) - (exact < 0)


def cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class HullPolygon:
    """Convex polygon, counterclockwise, starting at the lexicographically
    smallest vertex. One vertex is a point hull, two a segment."""

    vertices: tuple[Point, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.vertices, dtype=float).reshape(-1, 2)
        a.setflags(write=False)
        return a

    @property
    def xs(self) -> np.ndarray:
        return self.array[:, 0]

    @property
    def ys(self) -> np.ndarray:
        return self.array[:, 1]

    def bbox(self) -> tuple[float, float, float, float]:
        xs, ys = self.xs, self.ys
        return xs.min(), xs.max(), ys.min(), ys.max()


def convex_hull_2d(points: Iterable[Sequence[float]]) -> HullPolygon:
    """Andrew's monotone chain. Collinear points are dropped (exact test)."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if not pts:
        raise ValueError("convex hull of an empty point set")
    for x, y in pts:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite point ({x}, {y})")
    if len(pts) == 1:
        return HullPolygon((pts[0],))

    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return HullPolygon(tuple(lower[:-1] + upper[:-1]))


class OutOfDomainError(ValueError):
    def __init__(self, x: float, lo: float, hi: float):
        super().__init__(f"x = {x!r} is outside the valid range [{lo!r}, {hi!r}]")
        self.x, self.lo, self.hi = x, lo, hi


@dataclass(frozen=True)
class PLFunction:
    """Piecewise-linear function through ``breakpoints`` (x strictly increasing)."""

    breakpoints: tuple[Point, ...]
    shape: str | None = None  # "convex", "concave" or None

    def __post_init__(self):
        bps = tuple((float(x), float(y)) for x, y in self.breakpoints)
        if not bps:
            raise ValueError("a PLFunction needs at least one breakpoint")
        if any(b[0] <= a[0] for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoint x-values must be strictly increasing")
        if self.shape not in (None, "convex", "concave"):
            raise ValueError(f"unknown shape {self.shape!r}")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "_xs", [b[0] for b in bps])

    @property
    def domain(self) -> tuple[float, float]:
        return self.breakpoints[0][0], self.breakpoints[-1][0]

    @property
    def xs(self) -> list[float]:
        return list(self._xs)

    @property
    def ys(self) -> list[float]:
        return [b[1] for b in self.breakpoints]

    def slopes(self) -> list[float]:
        return [
            (y1 - y0) / (x1 - x0)
            for (x0, y0), (x1, y1) in zip(self.breakpoints, self.breakpoints[1:])
        ]

    def __call__(self, x: float) -> float:
        return eval_pl(self, x)

    def evaluate_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        lo, hi = self.domain
        bad = (xs < lo - END_TOLERANCE) | (xs > hi + END_TOLERANCE)
        if bad.any():
            raise OutOfDomainError(float(xs[bad][0]), lo, hi)
        if len(self.breakpoints) == 1:
            return np.full(xs.shape, self.breakpoints[0][1])
        return np.interp(xs, self._xs, self.ys)

    def to_json(self) -> dict:
        return {"breakpoints": [[x, y] for x, y in self.breakpoints], "shape": self.shape}

    @classmethod
    def from_json(cls, data: dict) -> "PLFunction":
        return cls(tuple(tuple(bp) for bp in data["breakpoints"]), data.get("shape"))

    def to_csv(self) -> str:
        rows = ["x,y"] + [f"{x!r},{y!r}" for x, y in self.breakpoints]
        return "\n".join(rows) + "\n"


def eval_pl(g: PLFunction, x: float) -> float:
    """Linear interpolation of ``g`` at ``x``; breakpoints are reproduced exactly."""
    lo, hi = g.domain
    x = float(x)
    if x < lo - END_TOLERANCE or x > hi + END_TOLERANCE or math.isnan(x):
        raise OutOfDomainError(x, lo, hi)
    x = min(max(x, lo), hi)
    xs = g._xs
    i = bisect.bisect_left(xs, x)
    if i < len(xs) and xs[i] == x:
        return g.breakpoints[i][1]
    x0, y0 = g.breakpoints[i - 1]
    x1, y1 = g.breakpoints[i]
    t = (x - x0) / (x1 - x0)
    return y0 + t * (y1 - y0)


def _chains(h: HullPolygon) -> tuple[list[Point], list[Point]]:
    verts = list(h.vertices)
    n = len(verts)
    i0 = min(range(n), key=lambda i: verts[i])
    i1 = max(range(n), key=lambda i: verts[i])
    lower = [verts[(i0 + k) % n] for k in range((i1 - i0) % n + 1)]
    upper = [verts[(i1 + k) % n] for k in range((i0 - i1) % n + 1)][::-1]
    if n == 1:
        lower, upper = verts[:], verts[:]
    return lower, upper


def envelopes(h: HullPolygon) -> tuple[PLFunction, PLFunction]:
    """Lower (convex) and upper (concave) envelope of the hull over its x-range.

    Where the hull has a vertical edge at an extreme x, ``g_l`` takes the
    lower end and ``g_u`` the upper end.
    """
    lower, upper = _chains(h)
    if len(lower) >= 2 and lower[-1][0] == lower[-2][0]:
        lower.pop()
    if len(upper) >= 2 and upper[0][0] == upper[1][0]:
        upper.pop(0)
    return PLFunction(tuple(lower), "convex"), PLFunction(tuple(upper), "concave")


def edge_margins(h: HullPolygon, p: Point) -> np.ndarray:
    """Signed distance from ``p`` to each edge line, positive on the inner side."""
    v = h.array
    a, b = v, np.roll(v, -1, axis=0)
    e = b - a
    length = np.hypot(e[:, 0], e[:, 1])
    c = e[:, 0] * (p[1] - a[:, 1]) - e[:, 1] * (p[0] - a[:, 0])
    return c / length


def signed_margin(h: HullPolygon, p: Point) -> float:
    """Worst inner-side margin of ``p``: nonnegative iff ``p`` is in the hull.

    For point and segment hulls this is minus the Euclidean distance.
    """
    if len(h) <= 2:
        return -_distance_to_segment(h.vertices[0], h.vertices[-1], p)
    return float(edge_margins(h, p).min())


def _distance_to_segment(a: Point, b: Point, p: Point) -> float:
    ex, ey = b[0] - a[0], b[1] - a[1]
    den = ex * ex + ey * ey
    t = 0.0 if den == 0.0 else ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / den
    t = min(max(t, 0.0), 1.0)
    return math.hypot(p[0] - (a[0] + t * ex), p[1] - (a[1] + t * ey))


def contains(h: HullPolygon, p: Point, tol: float = 0.0) -> bool:
    """True iff ``p`` lies within ``tol`` of the inner side of every edge."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    p = (float(p[0]), float(p[1]))
    if p in h.vertices:
        return True
    return signed_margin(h, p) >= -tol


def margins_many(h: HullPolygon, pts: np.ndarray) -> np.ndarray:
    """Vectorised :func:`signed_margin` over an ``(n, 2)`` array of points."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    if len(h) <= 2:
        return np.array([signed_margin(h, (px, py)) for px, py in pts])
    v = h.array
    e = np.roll(v, -1, axis=0) - v
    length = np.hypot(e[:, 0], e[:, 1])
    out = np.full(len(pts), np.inf)
    # chunk over edges to bound memory for large hulls
    for s in range(0, len(v), 512):
        sl = slice(s, s + 512)
        c = e[sl, 0] * (pts[:, 1:2] - v[sl, 1]) - e[sl, 1] * (pts[:, 0:1] - v[sl, 0])
        out = np.minimum(out, (c / length[sl]).min(axis=1))
    return out
