"""The two worked examples, with their published reference numbers."""

from __future__ import annotations

from dataclasses import dataclass

from .bounds import constants
from .pipeline import Analysis, analyze, longest_chord_end


@dataclass(frozen=True)
class Check:
    quantity: str
    computed: float | None
    reference: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.computed is not None and abs(self.computed - self.reference) <= self.tolerance

    def to_json(self) -> dict:
        return {
            "quantity": self.quantity,
            "computed": self.computed,
            "reference": self.reference,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


EXAMPLES = {
    "ex1": {"fn": "2 - x + sin(2*pi*x)", "domain": "[0,1]"},
    "ex2": {"fn": "1/x", "domain": "[-2,-1]u[1,2]"},
}

EX2_NOTE = (
    "Published g_u for this example reads (3-x)/2 on [-2,1] and (x-1)/2 on [1,2], "
    "and the second g_l piece is labelled [-1,-2]. The hull gives g_l = (-3-x)/2 on "
    "[-2,-1], (x-1)/2 on [-1,2] and g_u = (x+1)/2 on [-2,1], (3-x)/2 on [1,2]."
)
EX1_NOTE = (
    "g_u follows f up to 1 - x* ~ 0.285 (not x*), then the line 1 + a - a*x; "
    "the graph is symmetric under (x, y) -> (1 - x, 3 - y)."
)


def example_checks(name: str, resolution: int = 4097) -> tuple[Analysis, list[Check], str]:
    example = EXAMPLES[name]
    a = analyze(example["fn"], example["domain"], resolution)
    if name == "ex1":
        c = constants(a.g_l, a.g_u, a.f, a.domain, a.graph)
        checks = [
            Check("x* (lower envelope kink)", longest_chord_end(a.g_l), 0.715, 2e-3),
            Check("c_hat_l", c.c_hat_l, 0.5, 0.05),
            Check("c_hat_u", c.c_hat_u, 6.5, 0.1),
            Check("obvious inf f(x)/f(y)", c.obvious_ratio_lo, 0.09, 0.01),
            Check("obvious sup f(x)/f(y)", c.obvious_ratio_hi, 11.6, 0.1),
        ]
        return a, checks, EX1_NOTE
    checks = []
    for x in (-1.5, 0.0, 1.5):
        lower = (-3 - x) / 2 if x <= -1 else (x - 1) / 2
        upper = (x + 1) / 2 if x <= 1 else (3 - x) / 2
        checks.append(Check(f"g_l({x})", a.g_l(x), lower, 1e-6))
        checks.append(Check(f"g_u({x})", a.g_u(x), upper, 1e-6))
    return a, checks, EX2_NOTE
