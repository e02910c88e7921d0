"""
Scalar expressions over named variables ``x1..xn, y1..ym``.

Expressions are parsed once into an immutable tree, then either evaluated
(through a cached chain of closures, which is what the solvers call in their
inner loops) or pushed through forward-mode differentiation with :class:`Dual`
numbers, which yields every first partial in one sweep.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' ['-'] number)? | '-' factor
    atom   := number | ident | func '(' expr ')' | '(' expr ')'
    ident  := ('x'|'y') digits
    func   := sin | cos | exp | log | sqrt | abs | w

``w(t) = t^2 sin(1/t)`` with ``w(0) = 0`` is differentiable everywhere but its
derivative is discontinuous at 0.
"""

from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ParseError, UndeclaredVariable

__all__ = [
    "Num", "Var", "Neg", "BinOp", "Pow", "Call",
    "Expr", "VarEnv", "Dual",
    "parse", "parse_system", "evaluate", "eval_dual", "gradient", "jacobian",
    "to_source", "remap_variables", "FUNCTIONS",
]

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs", "w")


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: float
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    kind: str   # 'x' or 'y'
    index: int  # 1-based
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: float
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


Node = Num | Var | Neg | BinOp | Pow | Call


def _children(node):
    if isinstance(node, (Num, Var)):
        return ()
    if isinstance(node, Neg):
        return (node.operand,)
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, Pow):
        return (node.base,)
    return (node.arg,)


def _fmt_number(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def to_source(node) -> str:
    """Fully parenthesized source text; parsing it gives back the same tree."""
    if isinstance(node, Expr):
        node = node.root
    if isinstance(node, Num):
        return _fmt_number(node.value) if node.value >= 0 else f"({_fmt_number(node.value)})"
    if isinstance(node, Var):
        return f"{node.kind}{node.index}"
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Pow):
        return f"({to_source(node.base)})^{_fmt_number(node.exponent)}"
    return f"{node.func}({to_source(node.arg)})"


# --------------------------------------------------------------------------
# Parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)
_VAR_RE = re.compile(r"([xy])(\d+)$")


def _tokenize(source: str):
    tokens = []
    pos = 0
    end = len(source.rstrip())
    while pos < end:
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            at = len(source) - len(source[pos:].lstrip())
            raise ParseError(f"unexpected character {source[at]!r}", at)
        kind = match.lastgroup
        text = match.group(kind)
        tokens.append((kind, text, match.start(kind)))
        pos = match.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, n: int, m: int):
        self.source = source
        self.n = n
        self.m = m
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, tok, pos = self.advance()
        if kind == "end" or tok != text:
            found = "end of input" if kind == "end" else repr(tok)
            raise ParseError(f"expected {text!r}, found {found}", pos)
        return pos

    def parse(self):
        node = self.expr()
        kind, tok, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {tok!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, _ = self.advance()
            right = self.term()
            node = BinOp(op, node, right, (node.span[0], right.span[1]))
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, _ = self.advance()
            right = self.factor()
            node = BinOp(op, node, right, (node.span[0], right.span[1]))
        return node

    def factor(self):
        kind, tok, pos = self.peek()
        if kind == "op" and tok == "-":
            self.advance()
            operand = self.factor()
            return Neg(operand, (pos, operand.span[1]))
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.advance()
            sign = 1.0
            if self.peek()[1] == "-" and self.peek()[0] == "op":
                self.advance()
                sign = -1.0
            kind, tok, epos = self.advance()
            if kind != "number":
                raise ParseError("exponent must be a numeric literal", epos)
            return Pow(base, sign * float(tok), (base.span[0], epos + len(tok)))
        return base

    def atom(self):
        kind, tok, pos = self.advance()
        if kind == "number":
            value = float(tok)
            if not math.isfinite(value):
                raise ParseError(f"numeric literal {tok!r} overflows", pos)
            return Num(value, (pos, pos + len(tok)))
        if kind == "ident":
            if tok in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                close = self.expect(")")
                return Call(tok, arg, (pos, close + 1))
            match = _VAR_RE.match(tok)
            if match is None:
                raise ParseError(f"unknown identifier {tok!r}", pos)
            vkind, index = match.group(1), int(match.group(2))
            limit = self.n if vkind == "x" else self.m
            if not 1 <= index <= limit:
                raise UndeclaredVariable(
                    f"{tok} undeclared ({'n' if vkind == 'x' else 'm'}={limit})", pos)
            return Var(vkind, index, (pos, pos + len(tok)))
        if kind == "op" and tok == "(":
            inner = self.expr()
            close = self.expect(")")
            return _respan(inner, (pos, close + 1))
        found = "end of input" if kind == "end" else repr(tok)
        raise ParseError(f"unexpected {found}", pos)


def _respan(node, span):
    # parentheses do not create nodes; keep the outer span for error messages
    return type(node)(*[getattr(node, f) for f in node.__dataclass_fields__ if f != "span"], span)


# --------------------------------------------------------------------------
# Elementary pieces shared by the float and dual paths (bitwise agreement
# between the two depends on both calling exactly these).

def _ipow(v, k: int):
    if k == 0:
        return 1.0
    result = v
    for _ in range(k - 1):
        result = result * v
    return result


def _w_value(t: float) -> float:
    if t == 0.0:
        return 0.0
    inv = 1.0 / t
    if not math.isfinite(inv):
        return 0.0
    return t * t * math.sin(inv)


def _w_deriv(t: float) -> float:
    if t == 0.0:
        return 0.0
    inv = 1.0 / t
    if not math.isfinite(inv):
        return 0.0
    return 2.0 * t * math.sin(inv) - math.cos(inv)


def _exp(v, node):
    try:
        return math.exp(v)
    except OverflowError:
        raise DomainError("exp overflow", to_source(node)) from None


def _log(v, node):
    if v <= 0.0:
        raise DomainError(f"log of nonpositive value {v!r}", to_source(node))
    return math.log(v)


def _sqrt(v, node):
    if v < 0.0:
        raise DomainError(f"sqrt of negative value {v!r}", to_source(node))
    return math.sqrt(v)


def _trig(fn):
    def call(v, node):
        try:
            return fn(v)
        except ValueError:
            raise DomainError(f"{fn.__name__} of non-finite value", to_source(node)) from None
    return call


_SCALAR_FUNCS = {
    "sin": _trig(math.sin),
    "cos": _trig(math.cos),
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "abs": lambda v, node: abs(v),
    "w": lambda v, node: _w_value(v),
}


# --------------------------------------------------------------------------
# Compilation to closures

def _compile(node, n: int) -> Callable[[Sequence[float]], float]:
    if isinstance(node, Num):
        c = node.value
        return lambda v: c
    if isinstance(node, Var):
        return operator.itemgetter(node.index - 1 if node.kind == "x" else n + node.index - 1)
    if isinstance(node, Neg):
        f = _compile(node.operand, n)
        return lambda v: -f(v)
    if isinstance(node, BinOp):
        lf = _compile(node.left, n)
        rf = _compile(node.right, n)
        if node.op == "+":
            return lambda v: lf(v) + rf(v)
        if node.op == "-":
            return lambda v: lf(v) - rf(v)
        if node.op == "*":
            return lambda v: lf(v) * rf(v)

        def div(v):
            num = lf(v)
            den = rf(v)
            if den == 0.0:
                raise DomainError("division by zero", to_source(node))
            return num / den
        return div
    if isinstance(node, Pow):
        f = _compile(node.base, n)
        e = node.exponent
        if float(e).is_integer():
            k = int(e)
            if k >= 0:
                return lambda v: _ipow(f(v), k)

            def negpow(v):
                den = _ipow(f(v), -k)
                if den == 0.0:
                    raise DomainError("division by zero", to_source(node))
                return 1.0 / den
            return negpow

        def realpow(v):
            a = f(v)
            if a <= 0.0:
                raise DomainError(f"non-integer power of nonpositive value {a!r}", to_source(node))
            return a ** e
        return realpow
    f = _compile(node.arg, n)
    g = _SCALAR_FUNCS[node.func]
    return lambda v: g(f(v), node)


# --------------------------------------------------------------------------
# Public expression handle

class Expr:
    """A parsed expression together with its declared dimensions ``(n, m)``."""

    __slots__ = ("root", "n", "m", "source", "_fn")

    def __init__(self, root: Node, n: int, m: int, source: str | None = None):
        self.root = root
        self.n = n
        self.m = m
        self.source = source if source is not None else to_source(root)
        self._fn = None

    @property
    def nvars(self) -> int:
        return self.n + self.m

    @property
    def fn(self) -> Callable[[Sequence[float]], float]:
        """Compiled evaluator taking a flat list ``[x1..xn, y1..ym]``."""
        if self._fn is None:
            self._fn = _compile(self.root, self.n)
        return self._fn

    def __call__(self, values) -> float:
        return evaluate(self, values)

    def __eq__(self, other):
        if not isinstance(other, Expr):
            return NotImplemented
        return (self.n, self.m, self.root) == (other.n, other.m, other.root)

    def __hash__(self):
        return hash((self.n, self.m, self.root))

    def __repr__(self):
        return f"Expr({self.source!r}, n={self.n}, m={self.m})"

    def __str__(self):
        return to_source(self.root)

    def depth(self) -> int:
        """Height of the tree in edges (a lone leaf has depth 0)."""
        def h(node):
            kids = _children(node)
            return 0 if not kids else 1 + max(h(c) for c in kids)
        return h(self.root)

    def variables(self) -> list[Var]:
        """Variable references in left-to-right order (repeats included)."""
        out = []

        def walk(node):
            if isinstance(node, Var):
                out.append(node)
            for c in _children(node):
                walk(c)
        walk(self.root)
        return out

    def calls(self) -> list[Call]:
        out = []

        def walk(node):
            if isinstance(node, Call):
                out.append(node)
            for c in _children(node):
                walk(c)
        walk(self.root)
        return out


def parse(source: str, n: int, m: int) -> Expr:
    """Parse ``source`` into an expression over ``x1..xn`` and ``y1..ym``.

    Raises
    ------
    ParseError
        On malformed input; the message carries the character position.
    UndeclaredVariable
        When ``x<k>`` or ``y<k>`` has ``k`` outside ``1..n`` / ``1..m``.
    """
    if n < 0 or m < 0:
        raise ValueError("dimensions must be nonnegative")
    root = _Parser(source, n, m).parse()
    return Expr(root, n, m, source)


def parse_system(sources: Sequence[str], n: int, m: int) -> list[Expr]:
    return [parse(s, n, m) for s in sources]


def remap_variables(expr: Expr, mapping: dict, n: int, m: int) -> Expr:
    """Rename variable references, e.g. ``{('x', 1): ('y', 1)}``, into dims ``(n, m)``.

    References missing from ``mapping`` are kept as they are.
    """
    def walk(node):
        if isinstance(node, Var):
            kind, index = mapping.get((node.kind, node.index), (node.kind, node.index))
            return Var(kind, index)
        if isinstance(node, Num):
            return Num(node.value)
        if isinstance(node, Neg):
            return Neg(walk(node.operand))
        if isinstance(node, BinOp):
            return BinOp(node.op, walk(node.left), walk(node.right))
        if isinstance(node, Pow):
            return Pow(walk(node.base), node.exponent)
        return Call(node.func, walk(node.arg))
    root = walk(expr.root)
    for var in Expr(root, n, m).variables():
        limit = n if var.kind == "x" else m
        if not 1 <= var.index <= limit:
            raise UndeclaredVariable(f"{var.kind}{var.index} undeclared after remapping")
    return Expr(root, n, m)


# --------------------------------------------------------------------------
# Evaluation

@dataclass(frozen=True)
class VarEnv:
    """The point ``(x, y)`` at which an expression is evaluated."""

    n: int
    m: int
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != self.n + self.m:
            raise ValueError(f"expected {self.n + self.m} values, got {len(self.values)}")

    @classmethod
    def from_xy(cls, x, y=()):
        x = [float(v) for v in np.atleast_1d(x)] if np.size(x) else []
        y = [float(v) for v in np.atleast_1d(y)] if np.size(y) else []
        return cls(len(x), len(y), tuple(x + y))


def _values(expr: Expr, env) -> list[float]:
    if isinstance(env, VarEnv):
        if (env.n, env.m) != (expr.n, expr.m):
            raise ValueError(f"environment dims {(env.n, env.m)} do not match expression dims {(expr.n, expr.m)}")
        vals = list(env.values)
    else:
        vals = np.asarray(env, dtype=float).ravel().tolist()
    if len(vals) != expr.nvars:
        raise ValueError(f"expected {expr.nvars} values, got {len(vals)}")
    return vals


def evaluate(expr: Expr, env) -> float:
    """Value of ``expr`` at ``env`` (a :class:`VarEnv` or flat ``[x..., y...]``)."""
    return expr.fn(_values(expr, env))


# --------------------------------------------------------------------------
# Forward-mode differentiation

class Dual:
    """Value plus a vector of first partials."""

    __slots__ = ("value", "partials")

    def __init__(self, value: float, partials: np.ndarray):
        self.value = value
        self.partials = partials

    def __repr__(self):
        return f"Dual({self.value!r}, {self.partials!r})"

    def __neg__(self):
        return Dual(-self.value, -self.partials)

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.partials + other.partials)
        return Dual(self.value + other, self.partials.copy())

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.partials - other.partials)
        return Dual(self.value - other, self.partials.copy())

    def __rsub__(self, other):
        return Dual(other - self.value, -self.partials)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value * other.value,
                        self.partials * other.value + self.value * other.partials)
        return Dual(self.value * other, self.partials * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            if other.value == 0.0:
                raise ZeroDivisionError
            q = self.value / other.value
            return Dual(q, (self.partials - q * other.partials) / other.value)
        return Dual(self.value / other, self.partials / other)

    def __rtruediv__(self, other):
        if self.value == 0.0:
            raise ZeroDivisionError
        q = other / self.value
        return Dual(q, -q * self.partials / self.value)


def _dual(node, vals, seed, n, width):
    if isinstance(node, Num):
        return Dual(node.value, np.zeros(width))
    if isinstance(node, Var):
        i = node.index - 1 if node.kind == "x" else n + node.index - 1
        return Dual(vals[i], seed[i].copy())
    if isinstance(node, Neg):
        return -_dual(node.operand, vals, seed, n, width)
    if isinstance(node, BinOp):
        a = _dual(node.left, vals, seed, n, width)
        b = _dual(node.right, vals, seed, n, width)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b.value == 0.0:
            raise DomainError("division by zero", to_source(node))
        return a / b
    if isinstance(node, Pow):
        a = _dual(node.base, vals, seed, n, width)
        e = node.exponent
        if float(e).is_integer():
            k = int(e)
            if k == 0:
                return Dual(1.0, np.zeros(width))
            kk = abs(k)
            u = Dual(_ipow(a.value, kk), (kk * _ipow(a.value, kk - 1)) * a.partials)
            if k > 0:
                return u
            if u.value == 0.0:
                raise DomainError("division by zero", to_source(node))
            return 1.0 / u
        if a.value <= 0.0:
            raise DomainError(f"non-integer power of nonpositive value {a.value!r}", to_source(node))
        return Dual(a.value ** e, (e * a.value ** (e - 1.0)) * a.partials)

    a = _dual(node.arg, vals, seed, n, width)
    v = a.value
    func = node.func
    value = _SCALAR_FUNCS[func](v, node)
    if func == "sin":
        d = math.cos(v)
    elif func == "cos":
        d = -math.sin(v)
    elif func == "exp":
        d = value
    elif func == "log":
        d = 1.0 / v
    elif func == "sqrt":
        if value == 0.0:
            raise DomainError("sqrt is not differentiable at 0", to_source(node))
        d = 0.5 / value
    elif func == "abs":
        if v == 0.0:
            raise DomainError("abs is not differentiable at 0", to_source(node))
        d = 1.0 if v > 0.0 else -1.0
    else:
        d = _w_deriv(v)
    return Dual(value, d * a.partials)


def eval_dual(expr: Expr, env, seed=None) -> Dual:
    """Value and first partials of ``expr`` at ``env``.

    Without ``seed`` the partials are with respect to ``x1..xn, y1..ym`` in
    that order. ``seed`` is an ``(n+m, k)`` matrix whose row ``i`` is taken as
    the derivative of variable ``i`` with respect to ``k`` new parameters, so
    the result holds ``J @ seed`` (the chain rule through an affine map).
    """
    vals = _values(expr, env)
    if seed is None:
        seed = np.eye(expr.nvars)
    else:
        seed = np.asarray(seed, dtype=float)
        if seed.ndim != 2 or seed.shape[0] != expr.nvars:
            raise ValueError(f"seed must have {expr.nvars} rows")
    return _dual(expr.root, vals, seed, expr.n, seed.shape[1])


def gradient(expr: Expr, env) -> np.ndarray:
    return eval_dual(expr, env).partials


def jacobian(system: Sequence[Expr], env, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Values and Jacobian (rows = components) of a list of expressions."""
    duals = [eval_dual(e, env, seed) for e in system]
    return (np.array([d.value for d in duals]),
            np.array([d.partials for d in duals]).reshape(len(duals), -1))
