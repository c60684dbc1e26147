"""Scalar expressions in one variable ``x``.

Grammar, loosest to tightest::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | 'x' | 'pi' | FUNC '(' expr ')' | '(' expr ')'

so ``-x^2`` is ``-(x^2)`` and ``2^3^2`` is ``2^(3^2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

MAX_DEPTH = 64

FUNCTIONS = ("sin", "cos", "exp", "log", "abs", "sqrt")
BINARY_OPS = ("+", "-", "*", "/", "^")


class ExprSyntaxError(ValueError):
    """Malformed expression text. ``offset`` is the character offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvaluationError(ArithmeticError):
    """Raised when an expression has no finite real value at ``x``."""

    def __init__(self, message: str, x: float):
        super().__init__(f"{message} (x = {x!r})")
        self.x = x


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = "x"


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or one of FUNCTIONS
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Pi, Unary, Binary]


@dataclass(frozen=True)
class Expr:
    """A parsed expression. Immutable, so safe to share between threads."""

    root: Node
    source: str = ""

    def __call__(self, x: float) -> float:
        return evaluate(self, x)

    def __str__(self) -> str:
        return pretty(self)

    @property
    def node_count(self) -> int:
        return _count(self.root)

    @property
    def depth(self) -> int:
        return _depth(self.root)


_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {source[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0
        self.nesting = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, value, offset = self.peek()
        if value != text or kind == "eof":
            what = "end of input" if kind == "eof" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {what}", offset)
        return self.advance()

    def enter(self, offset: int):
        self.nesting += 1
        if self.nesting > MAX_DEPTH:
            raise ExprSyntaxError(f"nesting deeper than {MAX_DEPTH}", offset)

    def leave(self):
        self.nesting -= 1

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        kind, value, offset = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            self.enter(offset)
            node = Unary("neg", self.unary())
            self.leave()
            return node
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, value, offset = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            self.enter(offset)
            node = Binary("^", base, self.unary())
            self.leave()
            return node
        return base

    def atom(self) -> Node:
        kind, value, offset = self.advance()
        if kind == "number":
            v = float(value)
            if not math.isfinite(v):
                raise ExprSyntaxError(f"number {value!r} is not finite", offset)
            return Const(v)
        if kind == "name":
            if value == "x":
                return Var()
            if value == "pi":
                return Pi()
            if value in FUNCTIONS:
                self.expect("(")
                self.enter(offset)
                arg = self.expr()
                self.leave()
                self.expect(")")
                return Unary(value, arg)
            raise ExprSyntaxError(f"unknown identifier {value!r}", offset)
        if kind == "op" and value == "(":
            self.enter(offset)
            node = self.expr()
            self.leave()
            self.expect(")")
            return node
        what = "end of input" if kind == "eof" else repr(value)
        raise ExprSyntaxError(f"unexpected {what}", offset)


def parse(source: str) -> Expr:
    """Parse ``source`` into an :class:`Expr`.

    Raises :class:`ExprSyntaxError` for malformed text, unknown identifiers
    and trees deeper than ``MAX_DEPTH``.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    p = _Parser(source)
    root = p.expr()
    kind, value, offset = p.peek()
    if kind != "eof":
        raise ExprSyntaxError(f"unexpected {value!r}", offset)
    if _depth(root) > MAX_DEPTH:
        raise ExprSyntaxError(f"expression tree deeper than {MAX_DEPTH}", 0)
    return Expr(root, source)


def _count(node: Node) -> int:
    if isinstance(node, Unary):
        return 1 + _count(node.arg)
    if isinstance(node, Binary):
        return 1 + _count(node.left) + _count(node.right)
    return 1


def _depth(node: Node) -> int:
    # iterative: a long chain like x+x+...+x must not hit the recursion limit
    best = 0
    stack = [(node, 1)]
    while stack:
        n, d = stack.pop()
        best = max(best, d)
        if isinstance(n, Unary):
            stack.append((n.arg, d + 1))
        elif isinstance(n, Binary):
            stack.append((n.left, d + 1))
            stack.append((n.right, d + 1))
    return best


def _div(a: float, b: float, x: float) -> float:
    if b == 0.0:
        raise EvaluationError("division by zero", x)
    return a / b


def _pow(a: float, b: float, x: float) -> float:
    if a == 0.0 and b < 0.0:
        raise EvaluationError("zero raised to a negative power", x)
    if a < 0.0 and not float(b).is_integer():
        raise EvaluationError("negative base with non-integer exponent", x)
    try:
        return math.pow(a, b)
    except OverflowError:
        raise EvaluationError("overflow in '^'", x) from None


def _log(a: float, x: float) -> float:
    if a <= 0.0:
        raise EvaluationError("log of a nonpositive number", x)
    return math.log(a)


def _sqrt(a: float, x: float) -> float:
    if a < 0.0:
        raise EvaluationError("sqrt of a negative number", x)
    return math.sqrt(a)


def _exp(a: float, x: float) -> float:
    try:
        return math.exp(a)
    except OverflowError:
        raise EvaluationError("overflow in exp", x) from None


_UNARY: dict[str, Callable[[float, float], float]] = {
    "neg": lambda a, x: -a,
    "sin": lambda a, x: math.sin(a),
    "cos": lambda a, x: math.cos(a),
    "exp": _exp,
    "log": _log,
    "abs": lambda a, x: abs(a),
    "sqrt": _sqrt,
}

_BINARY: dict[str, Callable[[float, float, float], float]] = {
    "+": lambda a, b, x: a + b,
    "-": lambda a, b, x: a - b,
    "*": lambda a, b, x: a * b,
    "/": _div,
    "^": _pow,
}


def _eval(node: Node, x: float) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Unary):
        return _UNARY[node.op](_eval(node.arg, x), x)
    return _BINARY[node.op](_eval(node.left, x), _eval(node.right, x), x)


def evaluate(e: Expr, x: float) -> float:
    """Evaluate ``e`` at ``x`` in IEEE double precision.

    Domain errors and non-finite results raise :class:`EvaluationError`
    instead of producing NaN or infinity.
    """
    x = float(x)
    try:
        y = _eval(e.root, x)
    except (ValueError, OverflowError) as exc:
        raise EvaluationError(str(exc), x) from None
    if not math.isfinite(y):
        raise EvaluationError("non-finite result", x)
    return y


# precedence levels used by the printer
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _fmt(node: Node) -> tuple[str, int]:
    if isinstance(node, Const):
        return repr(node.value), 5
    if isinstance(node, Var):
        return "x", 5
    if isinstance(node, Pi):
        return "pi", 5
    if isinstance(node, Unary):
        if node.op == "neg":
            s, p = _fmt(node.arg)
            # operand of unary minus parses as unary, i.e. anything at level >= 3
            return "-" + (s if p >= 3 else f"({s})"), 3
        return f"{node.op}({_fmt(node.arg)[0]})", 5
    ls, lp = _fmt(node.left)
    rs, rp = _fmt(node.right)
    prec = _PREC[node.op]
    if node.op == "^":
        # base must be an atom; exponent is parsed as unary
        ls = ls if lp >= 5 else f"({ls})"
        rs = rs if rp >= 3 else f"({rs})"
        return f"{ls}^{rs}", 4
    ls = ls if lp >= prec else f"({ls})"
    rs = rs if rp > prec else f"({rs})"
    return f"{ls} {node.op} {rs}", prec


def pretty(e: Expr | Node) -> str:
    """Render an expression with the minimal parentheses needed to reparse it."""
    node = e.root if isinstance(e, Expr) else e
    return _fmt(node)[0]


def _check_domain(mask, xs, message):
    if mask.any():
        raise EvaluationError(message, float(xs[np.argmax(mask)]))


def _eval_array(node: Node, xs):
    if isinstance(node, Const):
        return np.full(xs.shape, node.value)
    if isinstance(node, Var):
        return xs
    if isinstance(node, Pi):
        return np.full(xs.shape, math.pi)
    if isinstance(node, Unary):
        a = _eval_array(node.arg, xs)
        if node.op == "log":
            _check_domain(a <= 0.0, xs, "log of a nonpositive number")
        elif node.op == "sqrt":
            _check_domain(a < 0.0, xs, "sqrt of a negative number")
        return _NP_UNARY[node.op](a)
    a = _eval_array(node.left, xs)
    b = _eval_array(node.right, xs)
    if node.op == "/":
        _check_domain(b == 0.0, xs, "division by zero")
    elif node.op == "^":
        _check_domain((a == 0.0) & (b < 0.0), xs, "zero raised to a negative power")
        _check_domain((a < 0.0) & (b != np.floor(b)), xs, "negative base with non-integer exponent")
    return _NP_BINARY[node.op](a, b)


_NP_UNARY = {
    "neg": np.negative, "sin": np.sin, "cos": np.cos, "exp": np.exp,
    "log": np.log, "abs": np.abs, "sqrt": np.sqrt,
}
_NP_BINARY = {
    "+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": np.power,
}


def evaluate_array(e: Expr, xs) -> "np.ndarray":
    """Vectorised :func:`evaluate`, for large Monte-Carlo batches.

    numpy's transcendental functions may differ from :mod:`math` in the last
    bit, so grids that feed the hull use the scalar path.
    """
    xs = np.asarray(xs, dtype=float)
    with np.errstate(all="ignore"):
        y = _eval_array(e.root, xs)
    y = np.broadcast_to(y, xs.shape)
    _check_domain(~np.isfinite(y), xs, "non-finite result")
    return np.array(y, dtype=float)
