"""Finite distributions on K that hit a prescribed point of the graph hull.

Any point of a planar hull is a convex combination of at most three hull
vertices; the vertices are graph samples, so the combination is a law on K
with the requested ``(E[X], E[f(X)])``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hull import HullPolygon, Point, edge_margins, signed_margin

HULL_TOLERANCE = 1e-9
_LAMBDA_SLACK = 1e-12
_DROP = 1e-15
# targets this close to an edge are resolved on that edge
_BOUNDARY = 1e-13


class OutsideHullError(ValueError):
    def __init__(self, target: Point, distance: float):
        super().__init__(f"target {target} lies outside the hull (distance {distance:.3e})")
        self.target = target
        self.distance = distance


class DegenerateTriangleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DiscreteDistribution:
    support: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.weights) or not self.support:
            raise ValueError("support and weights must be nonempty and of equal length")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {sum(self.weights)!r}, not 1")

    def mean(self) -> float:
        return float(np.dot(self.weights, self.support))

    def expect(self, fn) -> float:
        return float(sum(w * fn(x) for x, w in zip(self.support, self.weights)))

    def to_json(self) -> dict:
        return {"support": list(self.support), "weights": list(self.weights)}

    @classmethod
    def from_json(cls, data: dict) -> "DiscreteDistribution":
        return cls(tuple(data["support"]), tuple(data["weights"]))


def _fan_barycentric(v: np.ndarray, p: Point) -> np.ndarray:
    """Barycentric coordinates of ``p`` in every fan triangle (v0, vi, vi+1)."""
    a = v[1:-1] - v[0]
    b = v[2:] - v[0]
    q = np.array(p) - v[0]
    area = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    l1 = (q[0] * b[:, 1] - q[1] * b[:, 0]) / area
    l2 = (a[:, 0] * q[1] - a[:, 1] * q[0]) / area
    return np.stack([1.0 - l1 - l2, l1, l2], axis=1)


def _solve(pts: np.ndarray, p: Point) -> np.ndarray:
    """Affine weights of ``p`` in a triangle, refined once against the residual."""
    a = (pts[1:] - pts[0]).T
    q = np.array(p) - pts[0]
    lam = np.linalg.solve(a, q)
    lam += np.linalg.solve(a, q - a @ lam)
    return np.array([1.0 - lam.sum(), lam[0], lam[1]])


def _segment_weights(a: Point, b: Point, p: Point) -> np.ndarray:
    ex, ey = b[0] - a[0], b[1] - a[1]
    den = ex * ex + ey * ey
    t = 0.0 if den == 0.0 else ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / den
    t = min(max(t, 0.0), 1.0)
    return np.array([1.0 - t, t])


def _assemble(points: list[Point], lam: np.ndarray) -> tuple[DiscreteDistribution, float, float]:
    """Distribution plus its exact moment pair, recomputed by direct summation."""
    lam = np.clip(lam, 0.0, None)
    keep = [i for i in range(len(lam)) if lam[i] > _DROP]
    w = lam[keep] / lam[keep].sum()
    kept = [points[i] for i in keep]
    dist = DiscreteDistribution(tuple(p[0] for p in kept), tuple(float(v) for v in w))
    mx = sum(wi * p[0] for wi, p in zip(dist.weights, kept))
    my = sum(wi * p[1] for wi, p in zip(dist.weights, kept))
    return dist, mx, my


def witness(h: HullPolygon, target: Point, tol: float = HULL_TOLERANCE) -> DiscreteDistribution:
    """Law on the hull vertices with ``(E[X], E[f(X)]) == target``.

    Targets on (or within ``tol`` outside) an edge get the two edge
    endpoints. Otherwise a fan triangulation from vertex 0 is used. When several triangles contain the
    target the lowest-indexed one wins; if its solve is numerically poor the
    next containing triangle is tried.
    """
    target = (float(target[0]), float(target[1]))
    margin = signed_margin(h, target)
    if margin < -tol:
        raise OutsideHullError(target, -margin)

    verts = list(h.vertices)
    if target in verts:
        return DiscreteDistribution((target[0],), (1.0,))
    if len(verts) <= 2:
        a, b = verts[0], verts[-1]
        return _assemble([a, b], _segment_weights(a, b, target))[0]

    v = h.array
    edges = edge_margins(h, target)
    k = int(np.argmin(edges))
    scale = max(1.0, np.abs(v).max())
    if edges[k] <= _BOUNDARY * scale:
        a, b = verts[k], verts[(k + 1) % len(verts)]
        return _assemble([a, b], _segment_weights(a, b, target))[0]

    lam = _fan_barycentric(v, target)
    worst = lam.min(axis=1)
    candidates = list(np.flatnonzero(worst >= -_LAMBDA_SLACK))
    if not candidates:
        # boundary target just outside every triangle: take the closest fit
        candidates = [int(np.argmax(worst))]

    best = None
    for i in candidates[:3]:
        tri = v[[0, i + 1, i + 2]]
        refined = _solve(tri, target)
        dist, mx, my = _assemble([verts[0], verts[i + 1], verts[i + 2]], refined)
        err = max(abs(mx - target[0]), abs(my - target[1]))
        if best is None or err < best[0]:
            best = (err, dist)
        if err <= 1e-12 * max(1.0, abs(target[0]), abs(target[1])):
            break
    if best is None:
        raise DegenerateTriangleError(f"no usable triangle for target {target}")
    return best[1]
