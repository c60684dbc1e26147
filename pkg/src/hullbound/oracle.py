"""Brute-force check of hull membership for random finite laws on K.

Everything random here comes from SplitMix64 keyed by ``(seed, trial)`` and
turned into exponentials by inverse CDF, so runs are bit-reproducible on any
platform without relying on a library's distribution code.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, stats

from .domain import DEFAULT_RESOLUTION, Domain, grid
from .expr import Expr, evaluate, evaluate_array
from .hull import HullPolygon, PLFunction, margins_many
from .witness import DiscreteDistribution

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """Steele, Lea and Flood's SplitMix64 generator."""

    def __init__(self, state: int):
        self.state = state & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def below(self, n: int) -> int:
        """Integer in [0, n) by multiply-shift."""
        return (self.next_u64() * n) >> 64

    def exponential(self) -> float:
        return -math.log1p(-self.random())

    @classmethod
    def for_trial(cls, seed: int, trial: int) -> "SplitMix64":
        return cls((seed & MASK64) * GOLDEN + trial)


@dataclass(frozen=True)
class OracleConfig:
    n_trials: int = 10_000
    support_size_range: tuple[int, int] = (1, 8)
    seed: int = 0
    tolerance: float = 1e-9
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        lo, hi = self.support_size_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad support size range {self.support_size_range}")


class SupportOutsideDomain(ValueError):
    pass


def checked_distribution(support, weights, d: Domain) -> DiscreteDistribution:
    """Build a distribution, rejecting any support point outside ``d``."""
    for x in support:
        if x not in d:
            raise SupportOutsideDomain(f"support point {x!r} is not in {d}")
    return DiscreteDistribution(tuple(support), tuple(weights))


def moment_pair(dist: DiscreteDistribution, f: Expr) -> tuple[float, float]:
    ex = math.fsum(w * x for x, w in zip(dist.support, dist.weights))
    efx = math.fsum(w * evaluate(f, x) for x, w in zip(dist.support, dist.weights))
    return ex, efx


def random_distribution(
    d: Domain, f: Expr, cfg: OracleConfig, trial: int, xs: list[float] | None = None
) -> tuple[DiscreteDistribution, tuple[float, float]]:
    """Random law on the sample grid with flat Dirichlet weights.

    Fully determined by ``(cfg.seed, trial)``. Pass ``xs`` to reuse a grid.
    """
    if not 0 <= trial < cfg.n_trials:
        raise IndexError(f"trial {trial} not in [0, {cfg.n_trials})")
    if xs is None:
        xs = grid(d, cfg.resolution)
    rng = SplitMix64.for_trial(cfg.seed, trial)
    lo, hi = cfg.support_size_range
    k = lo + rng.below(hi - lo + 1)
    support = [xs[rng.below(len(xs))] for _ in range(k)]
    e = [rng.exponential() for _ in range(k)]
    total = math.fsum(e)
    if total == 0.0:
        e, total = [1.0] * k, float(k)
    weights = [v / total for v in e]
    dist = checked_distribution(support, weights, d)
    return dist, moment_pair(dist, f)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HULLBOUND_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class OracleSummary:
    trials: int
    passed: int
    pass_fraction: float
    worst_margin: float
    worst_trial: int
    tolerance: float
    seed: int

    @property
    def ok(self) -> bool:
        return self.passed == self.trials

    def to_json(self) -> dict:
        return asdict(self)


def run_oracle(h: HullPolygon, d: Domain, f: Expr, cfg: OracleConfig) -> OracleSummary:
    """Fraction of random moment pairs that land in ``h`` (expected: all of them)."""
    xs = grid(d, cfg.resolution)

    def chunk(trials: range) -> list[tuple[float, float]]:
        return [random_distribution(d, f, cfg, t, xs)[1] for t in trials]

    n_workers = min(_threads(), cfg.n_trials)
    step = -(-cfg.n_trials // n_workers)
    ranges = [range(s, min(s + step, cfg.n_trials)) for s in range(0, cfg.n_trials, step)]
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            parts = list(pool.map(chunk, ranges))
    else:
        parts = [chunk(r) for r in ranges]
    moments = np.array([m for part in parts for m in part])
    margins = margins_many(h, moments)
    passed = int((margins >= -cfg.tolerance).sum())
    worst = int(np.argmin(margins))
    return OracleSummary(
        cfg.n_trials, passed, passed / cfg.n_trials, float(margins[worst]), worst,
        cfg.tolerance, cfg.seed,
    )


# continuous laws -----------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    @property
    def support(self) -> tuple[float, float]:
        return self.a, self.b

    def pdf(self, x):
        return 1.0 / (self.b - self.a)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.a, self.b, size=n)


@dataclass(frozen=True)
class TruncatedNormal:
    mu: float
    sigma: float
    a: float
    b: float

    @property
    def support(self) -> tuple[float, float]:
        return self.a, self.b

    @cached_property
    def _frozen(self):
        alpha = (self.a - self.mu) / self.sigma
        beta = (self.b - self.mu) / self.sigma
        return stats.truncnorm(alpha, beta, loc=self.mu, scale=self.sigma)

    def pdf(self, x):
        return self._frozen.pdf(x)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self._frozen.rvs(size=n, random_state=rng)


def parse_law(text: str):
    """``"uniform(a,b)"`` or ``"truncnorm(mu,sigma,a,b)"``."""
    name, _, rest = text.strip().partition("(")
    args = [float(v) for v in rest.rstrip(") ").split(",")] if rest else []
    name = name.strip().lower().replace("-", "").replace("_", "")
    if name == "uniform" and len(args) == 2:
        return Uniform(*args)
    if name in ("truncnorm", "truncatednormal") and len(args) == 4:
        return TruncatedNormal(*args)
    raise ValueError(f"unsupported law {text!r}; use uniform(a,b) or truncnorm(mu,sigma,a,b)")


def _check_law(law, d: Domain):
    if not isinstance(law, (Uniform, TruncatedNormal)):
        raise ValueError(f"unsupported law {law!r}")
    a, b = law.support
    if not a < b:
        raise ValueError(f"law support [{a}, {b}] is empty")
    if not any(lo <= a and b <= hi for lo, hi in d.intervals):
        raise ValueError(f"law support [{a}, {b}] is not inside one interval of {d}")


@dataclass(frozen=True)
class MCEstimate:
    mean_x: float
    mean_f: float
    se_x: float
    se_f: float
    n_samples: int

    def to_json(self) -> dict:
        return asdict(self)


def mc_mean(f: Expr, law, d: Domain, n_samples: int, seed: int) -> MCEstimate:
    """Monte-Carlo estimates of ``E[X]`` and ``E[f(X)]`` with standard errors."""
    _check_law(law, d)
    rng = np.random.default_rng(seed)
    x = law.draw(rng, n_samples)
    fx = evaluate_array(f, x)
    root_n = math.sqrt(n_samples)
    return MCEstimate(
        float(x.mean()), float(fx.mean()),
        float(x.std(ddof=1) / root_n), float(fx.std(ddof=1) / root_n), n_samples,
    )


def law_moments(f: Expr, law, d: Domain) -> tuple[float, float]:
    """``(E[X], E[f(X)])`` by adaptive quadrature against the law's density."""
    _check_law(law, d)
    a, b = law.support
    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
    ex = integrate.quad(lambda t: t * law.pdf(t), a, b, **opts)[0]
    efx = integrate.quad(lambda t: evaluate(f, t) * law.pdf(t), a, b, **opts)[0]
    return ex, efx


def sandwich_margin(g_l: PLFunction, g_u: PLFunction, mean_x: float, mean_f: float) -> float:
    """Smallest distance of ``mean_f`` to the violated side; >= 0 means inside."""
    return min(mean_f - g_l(mean_x), g_u(mean_x) - mean_f)
