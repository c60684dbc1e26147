"""Command-line front end.

Exit codes: 0 success, 1 computation or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .bounds import bounds_at, constants
from .catalog import EXAMPLES, example_checks
from .domain import DEFAULT_RESOLUTION, DomainError, SamplingError
from .expr import EvaluationError, ExprSyntaxError
from .hull import OutOfDomainError
from .markov import (
    FiniteConditioning,
    InvariantViolation,
    MarkovOperator,
    random_conditioning,
    random_stochastic,
    verify_conditional_bounds,
    verify_markov_bounds,
)
from .oracle import OracleConfig, law_moments, mc_mean, parse_law, run_oracle, sandwich_margin
from .pipeline import analyze
from .witness import OutsideHullError, witness

DEFAULTS = {
    "fn": None,
    "domain": None,
    "resolution": DEFAULT_RESOLUTION,
    "mean": None,
    "at": None,
    "seed": 0,
    "trials": 10_000,
    "out": None,
    "format": "json",
}


class UsageError(Exception):
    pass


class VerificationFailed(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--fn", help="function of x, e.g. '2 - x + sin(2*pi*x)'")
    p.add_argument("--domain", help="closed intervals, e.g. '[-2,-1]u[1,2]'")
    p.add_argument("--example", choices=sorted(EXAMPLES), help="use a built-in example's fn and domain")
    p.add_argument("--resolution", type=int, help=f"grid points per interval (default {DEFAULT_RESOLUTION})")
    p.add_argument("--config", type=Path, help="JSON file with any of the option names as keys")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, help="output file (or directory for 'envelope')")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="hullbound", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("envelope", parents=[common], help="lower/upper envelopes and hull vertices")
    p = sub.add_parser("bounds", parents=[common], help="bounds on E[f(X)] given E[X]")
    p.add_argument("--mean", type=float)
    p = sub.add_parser("constants", parents=[common], help="ratio and gap constants")
    p.add_argument("--mean", type=float)
    p = sub.add_parser("witness", parents=[common], help="finite law hitting a hull point")
    p.add_argument("--at", help="target 'x,y'")
    p = sub.add_parser("oracle", parents=[common], help="random-law hull membership check")
    p.add_argument("--trials", type=int)
    p = sub.add_parser("verify-markov", parents=[common], help="bounds under Markov operators")
    p.add_argument("--input", type=Path, help='JSON {"matrix": [[...]], "x": [...]}')
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--rows", type=int, default=8)
    p.add_argument("--cols", type=int, default=16)
    p = sub.add_parser("verify-conditional", parents=[common], help="bounds under conditioning on a partition")
    p.add_argument("--input", type=Path, help='JSON {"weights": [...], "partition": [[...]], "x": [...]}')
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--atoms", type=int, default=64)
    p = sub.add_parser("mc", parents=[common], help="Monte-Carlo moments of a continuous law")
    p.add_argument("--law", required=True, help="uniform(a,b) or truncnorm(mu,sigma,a,b)")
    p.add_argument("--samples", type=int, default=1_000_000)
    p = sub.add_parser("example", parents=[common], help="run a built-in example against its published numbers")
    p.add_argument("name", choices=sorted(EXAMPLES))
    return parser


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config is not None:
        try:
            cfg.update(json.loads(args.config.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    example = getattr(args, "name", None) or args.example or cfg.get("example")
    if example:
        cfg.update(EXAMPLES[example])
        cfg["example"] = example
    for key in ("fn", "domain", "resolution", "seed", "format", "mean", "at", "trials"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if args.out is not None:
        cfg["out"] = str(args.out)
    if example == "ex1" and args.command == "example" and args.resolution is None:
        cfg["resolution"] = 4097
    if cfg["fn"] is None:
        raise UsageError("--fn is required (or --example / a config file with 'fn')")
    if cfg["domain"] is None:
        raise UsageError("--domain is required (or --example / a config file with 'domain')")
    return cfg


def _emit(data, cfg: dict, csv_text: str | None = None) -> None:
    text = csv_text if (cfg["format"] == "csv" and csv_text is not None) else jsonio.dumps(data) + "\n"
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)


def _hull_csv(vertices) -> str:
    return "x,y\n" + "".join(f"{x!r},{y!r}\n" for x, y in vertices)


def cmd_envelope(a, cfg, args):
    data = {
        "fn": cfg["fn"],
        "domain": a.domain.to_json(),
        "resolution": cfg["resolution"],
        "lower": a.g_l,
        "upper": a.g_u,
        "hull": [list(v) for v in a.hull.vertices],
    }
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "envelope.json").write_text(jsonio.dumps(data) + "\n")
        (out / "lower.csv").write_text(a.g_l.to_csv())
        (out / "upper.csv").write_text(a.g_u.to_csv())
        (out / "hull.csv").write_text(_hull_csv(a.hull.vertices))
        print(f"wrote envelope.json, lower.csv, upper.csv, hull.csv to {out}")
        return
    if cfg["format"] == "csv":
        sys.stdout.write("curve,x,y\n")
        for name, g in (("lower", a.g_l), ("upper", a.g_u)):
            for x, y in g.breakpoints:
                sys.stdout.write(f"{name},{x!r},{y!r}\n")
        return
    sys.stdout.write(jsonio.dumps(data) + "\n")


def cmd_bounds(a, cfg, args):
    if cfg["mean"] is None:
        raise UsageError("bounds needs --mean")
    report = bounds_at(a.g_l, a.g_u, float(cfg["mean"]), a.f, a.domain, a.graph)
    _emit(report, cfg)


def cmd_constants(a, cfg, args):
    report = constants(a.g_l, a.g_u, a.f, a.domain, a.graph, cfg["mean"])
    _emit(report, cfg)


def _pair(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in str(text).split(","))
    except ValueError:
        raise UsageError(f"expected 'x,y', got {text!r}") from None
    return x, y


def cmd_witness(a, cfg, args):
    if cfg["at"] is None:
        raise UsageError("witness needs --at x,y")
    target = _pair(cfg["at"])
    dist = witness(a.hull, target)
    ex = sum(w * x for x, w in zip(dist.support, dist.weights))
    efx = sum(w * a.f(x) for x, w in zip(dist.support, dist.weights))
    data = dist.to_json()
    data["target"] = list(target)
    data["moments"] = [ex, efx]
    data["error"] = max(abs(ex - target[0]), abs(efx - target[1]))
    _emit(data, cfg)
    if data["error"] > 1e-9:
        raise VerificationFailed(f"witness moments miss the target by {data['error']:.3e}")


def cmd_oracle(a, cfg, args):
    oc = OracleConfig(n_trials=int(cfg["trials"]), seed=int(cfg["seed"]), resolution=int(cfg["resolution"]))
    summary = run_oracle(a.hull, a.domain, a.f, oc)
    _emit(summary, cfg)
    if not summary.ok:
        raise VerificationFailed(f"{summary.trials - summary.passed} moment pairs fell outside the hull")


def _grid_choice(a, n: int, rng: np.random.Generator) -> np.ndarray:
    xs = np.array(a.graph.xs)
    return xs[rng.integers(0, len(xs), size=n)]


def _read_input(path: Path, a, keys: tuple[str, ...]) -> dict:
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read input {path}: {exc}") from None
    missing = [k for k in keys if k not in data]
    if missing:
        raise UsageError(f"input {path} lacks {', '.join(missing)}")
    outside = [x for x in data.get("x", []) if float(x) not in a.domain]
    if outside:
        raise ValueError(f"input x-values {outside[:3]} are not in K = {a.domain}")
    return data


def cmd_verify_markov(a, cfg, args):
    if args.input is not None:
        data = _read_input(args.input, a, ("matrix", "x"))
        checks = [verify_markov_bounds(MarkovOperator(np.array(data["matrix"])), data["x"], a.f, a.g_l, a.g_u, a.domain)]
    else:
        rng = np.random.default_rng(int(cfg["seed"]))
        checks = []
        for i in range(args.count):
            m = random_stochastic(args.rows, args.cols, int(cfg["seed"]) * 1_000_003 + i)
            checks.append(verify_markov_bounds(m, _grid_choice(a, args.cols, rng), a.f, a.g_l, a.g_u, a.domain))
    _report_checks(checks, cfg)


def cmd_verify_conditional(a, cfg, args):
    if args.input is not None:
        data = _read_input(args.input, a, ("weights", "partition", "x"))
        c = FiniteConditioning(tuple(data["weights"]), tuple(tuple(b) for b in data["partition"]))
        checks = [verify_conditional_bounds(c, data["x"], a.f, a.g_l, a.g_u, a.domain)]
    else:
        rng = np.random.default_rng(int(cfg["seed"]))
        checks = []
        for i in range(args.count):
            c = random_conditioning(args.atoms, int(cfg["seed"]) * 1_000_003 + i)
            checks.append(verify_conditional_bounds(c, _grid_choice(a, args.atoms, rng), a.f, a.g_l, a.g_u, a.domain))
    _report_checks(checks, cfg)


def _report_checks(checks, cfg):
    violations = sum(c.violations for c in checks)
    coords = sum(len(c.mean_x) for c in checks)
    if len(checks) == 1:
        data = checks[0].to_json()
    else:
        data = {
            "operators": len(checks),
            "coordinates": coords,
            "violations": violations,
            "worst_lower_margin": min(float(c.lower_margin.min()) for c in checks),
            "worst_upper_margin": min(float(c.upper_margin.min()) for c in checks),
        }
    _emit(data, cfg)
    if violations:
        raise VerificationFailed(f"{violations} of {coords} coordinates violate the bounds")


def cmd_mc(a, cfg, args):
    law = parse_law(args.law)
    est = mc_mean(a.f, law, a.domain, args.samples, int(cfg["seed"]))
    ex, efx = law_moments(a.f, law, a.domain)
    data = est.to_json()
    data["quadrature"] = {"mean_x": ex, "mean_f": efx}
    data["sandwich_margin"] = sandwich_margin(a.g_l, a.g_u, est.mean_x, est.mean_f)
    _emit(data, cfg)
    if data["sandwich_margin"] < -4 * est.se_f:
        raise VerificationFailed("Monte-Carlo mean lies outside the envelope bounds")


def cmd_example(a, cfg, args):
    _, checks, note = example_checks(args.name, int(cfg["resolution"]))
    if cfg["format"] == "json" and cfg.get("out"):
        _emit({"example": args.name, "checks": [c.to_json() for c in checks], "note": note}, cfg)
    else:
        width = max(len(c.quantity) for c in checks)
        print(f"{'quantity':<{width}}  {'computed':>20}  {'reference':>10}  {'tol':>8}  result")
        for c in checks:
            got = "undefined" if c.computed is None else f"{c.computed:.10g}"
            print(f"{c.quantity:<{width}}  {got:>20}  {c.reference:>10.6g}  {c.tolerance:>8.0e}  "
                  f"{'PASS' if c.passed else 'FAIL'}")
        print(f"note: {note}")
    if not all(c.passed for c in checks):
        raise VerificationFailed("example does not reproduce its reference values")


COMMANDS = {
    "envelope": cmd_envelope,
    "bounds": cmd_bounds,
    "constants": cmd_constants,
    "witness": cmd_witness,
    "oracle": cmd_oracle,
    "verify-markov": cmd_verify_markov,
    "verify-conditional": cmd_verify_conditional,
    "mc": cmd_mc,
    "example": cmd_example,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        if args.print_config:
            sys.stdout.write(jsonio.dumps({k: cfg[k] for k in sorted(cfg)}) + "\n")
            return 0
        a = analyze(cfg["fn"], cfg["domain"], int(cfg["resolution"]))
        COMMANDS[args.command](a, cfg, args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hullbound: error: {exc}", file=sys.stderr)
        return 2
    except (ExprSyntaxError, DomainError) as exc:
        print(f"hullbound: error: {exc}", file=sys.stderr)
        return 2
    except (VerificationFailed, SamplingError, EvaluationError, OutOfDomainError,
            OutsideHullError, InvariantViolation, ValueError, ArithmeticError) as exc:
        print(f"hullbound: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
