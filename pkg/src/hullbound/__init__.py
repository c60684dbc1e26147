"""Sharp bounds on E[f(X)] from the convex hull of the graph of f."""

from .bounds import BoundsReport, ConstantsReport, bounds_at, constants, jensen_check
from .domain import DEFAULT_RESOLUTION, Domain, SampledGraph, hull_of_K, parse_domain, sample
from .expr import EvaluationError, Expr, ExprSyntaxError, evaluate, parse, pretty
from .hull import HullPolygon, PLFunction, contains, convex_hull_2d, envelopes, eval_pl
from .markov import (
    FiniteConditioning,
    MarkovOperator,
    apply,
    conditional_expectation,
    verify_conditional_bounds,
    verify_markov_bounds,
)
from .oracle import OracleConfig, mc_mean, random_distribution, run_oracle
from .pipeline import Analysis, analyze
from .witness import DiscreteDistribution, witness

__version__ = "0.1.0"
