"""Function text + domain -> samples -> hull -> envelopes, in one call."""

from __future__ import annotations

from dataclasses import dataclass

from .domain import DEFAULT_RESOLUTION, Domain, SampledGraph, parse_domain, sample
from .expr import Expr, parse
from .hull import HullPolygon, PLFunction, convex_hull_2d, envelopes


@dataclass(frozen=True)
class Analysis:
    f: Expr
    domain: Domain
    graph: SampledGraph
    hull: HullPolygon
    g_l: PLFunction
    g_u: PLFunction


def analyze(fn, domain, resolution: int = DEFAULT_RESOLUTION) -> Analysis:
    f = fn if isinstance(fn, Expr) else parse(fn)
    d = domain if isinstance(domain, Domain) else parse_domain(domain)
    graph = sample(f, d, resolution)
    hull = convex_hull_2d(graph.points)
    g_l, g_u = envelopes(hull)
    return Analysis(f, d, graph, hull, g_l, g_u)


def longest_chord_end(g: PLFunction) -> float:
    """Right end of the longest linear piece of ``g``.

    For a lower envelope that runs along a single tangent line before
    following the sampled curve, this is the tangency point.
    """
    bps = g.breakpoints
    if len(bps) < 2:
        return bps[0][0]
    i = max(range(len(bps) - 1), key=lambda k: bps[k + 1][0] - bps[k][0])
    return bps[i + 1][0]
