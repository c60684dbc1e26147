"""Bounds on E[f(X)] from the envelopes, plus the derived ratio and gap constants."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .domain import Domain, SampledGraph, hull_of_K
from .expr import EvaluationError, Expr, evaluate
from .hull import END_TOLERANCE, PLFunction, eval_pl

JENSEN_TOLERANCE = 1e-7


class OutsideHullError(ValueError):
    pass


@dataclass(frozen=True)
class BoundsReport:
    mean_x: float
    lower: float
    upper: float
    f_at_mean: Optional[float]
    jensen_reduced: bool

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ConstantsReport:
    """Ratio and gap constants of the bounds. ``None`` marks an undefined quantity."""

    c_l_at: Optional[float]
    c_u_at: Optional[float]
    s_l: float
    s_u: float
    c_hat_l: Optional[float]
    c_hat_u: Optional[float]
    obvious_inf: float
    obvious_sup: float
    obvious_ratio_lo: Optional[float]
    obvious_ratio_hi: Optional[float]
    mean_x: Optional[float] = None

    def to_json(self) -> dict:
        return asdict(self)


def bounds_at(
    g_l: PLFunction,
    g_u: PLFunction,
    mean_x: float,
    f: Expr,
    d: Domain,
    grid: SampledGraph | None = None,
) -> BoundsReport:
    """Bounds ``g_l(m) <= E[f(X)] <= g_u(m)`` valid for every X on K with mean m.

    ``f_at_mean`` is filled in only when ``m`` lies in K. ``jensen_reduced`` is
    computed when the sampled graph is supplied, otherwise False.
    """
    lo, hi = hull_of_K(d)
    if not (lo - END_TOLERANCE <= mean_x <= hi + END_TOLERANCE):
        raise OutsideHullError(f"mean {mean_x!r} is outside CH(K) = [{lo!r}, {hi!r}]")
    lower = eval_pl(g_l, mean_x)
    upper = eval_pl(g_u, mean_x)
    f_at_mean = None
    if mean_x in d:
        try:
            f_at_mean = evaluate(f, mean_x)
        except EvaluationError:
            f_at_mean = None
    reduced = jensen_check(g_l, f, grid) if grid is not None else False
    return BoundsReport(float(mean_x), lower, upper, f_at_mean, reduced)


def _probe(g_l: PLFunction, g_u: PLFunction, f: Expr, grid: SampledGraph):
    # grid points plus envelope breakpoints that lie in K (breakpoints come
    # from the samples, so normally this adds nothing new)
    pts = dict(grid.points)
    for g in (g_l, g_u):
        for x, _ in g.breakpoints:
            if x not in pts:
                try:
                    pts[x] = evaluate(f, x)
                except EvaluationError:
                    pass
    xs = np.array(sorted(pts))
    fx = np.array([pts[x] for x in xs])
    return xs, fx


def constants(
    g_l: PLFunction,
    g_u: PLFunction,
    f: Expr,
    d: Domain,
    grid: SampledGraph,
    mean_x: float | None = None,
) -> ConstantsReport:
    """Ratio and gap constants, with sup/inf taken over the sample grid.

    Ratios are reported as None whenever f vanishes or changes sign on the
    probe set, instead of being forced to an infinite value.
    """
    xs, fx = _probe(g_l, g_u, f, grid)
    gl = g_l.evaluate_many(xs)
    gu = g_u.evaluate_many(xs)

    s_l = float(np.max(np.abs(fx - gl)))
    s_u = float(np.max(np.abs(fx - gu)))
    f_min, f_max = float(fx.min()), float(fx.max())

    one_sign = bool(np.all(fx > 0) or np.all(fx < 0))
    c_hat_l = c_hat_u = ratio_lo = ratio_hi = None
    if one_sign:
        c_hat_l = float(np.min(gl / fx))
        c_hat_u = float(np.max(gu / fx))
        a = np.abs(fx)
        ratio_lo = float(a.min() / a.max())
        ratio_hi = float(a.max() / a.min())

    c_l_at = c_u_at = None
    if mean_x is not None and mean_x in d and one_sign:
        try:
            fm = evaluate(f, mean_x)
        except EvaluationError:
            fm = 0.0
        if fm != 0.0:
            c_l_at = eval_pl(g_l, mean_x) / fm
            c_u_at = eval_pl(g_u, mean_x) / fm

    return ConstantsReport(
        c_l_at, c_u_at, s_l, s_u, c_hat_l, c_hat_u,
        f_min, f_max, ratio_lo, ratio_hi,
        None if mean_x is None else float(mean_x),
    )


def jensen_check(g: PLFunction, f: Expr, grid: SampledGraph, upper: bool = False) -> bool:
    """Whether ``f`` coincides with its lower envelope on every sample.

    With ``upper=True`` the same test is run against the upper envelope,
    which is the concave counterpart.
    """
    xs = np.array(grid.xs)
    fx = np.array(grid.ys)
    gx = g.evaluate_many(xs)
    gap = (gx - fx) if upper else (fx - gx)
    return bool(gap.max() <= JENSEN_TOLERANCE)

