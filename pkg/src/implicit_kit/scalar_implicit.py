"""
One equation, one dependent variable: ``F(x, y) = 0`` with ``y`` scalar.

The construction follows the bracketing argument directly. Around the base
point ``(a, b)`` a box ``X x [b - r, b + r]`` is found on which the oriented
fiber ``sigma * F(x, .)`` is negative at ``b - r`` and positive at ``b + r``;
``g(x)`` is then the root on that fiber, located by bisection. Nothing beyond
the endpoint signs is checked: a fiber derivative that never vanishes cannot
change sign (derivatives have the intermediate value property), so the fiber
is monotone and the root unique.

``F`` is either an :class:`~implicit_kit.exprlang.Expr` with ``m == 1`` or a
plain callable ``F(x, y)``; the system engine uses the latter for its reduced
equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import (BaseResidualError, BracketFailure, DegenerateBase, DegenerateFiber,
                     DomainError, OutsideDomain)
from .exprlang import Expr, eval_dual

__all__ = ["ScalarProblem", "ScalarSolution", "prepare", "bisect",
           "TOL_Y", "TOL_RESIDUAL", "MAX_HALVINGS"]

TOL_Y = 1e-14
TOL_RESIDUAL = 1e-12
BASE_TOL = 1e-12
DERIV_FLOOR = 1e-10
FIBER_FLOOR = 1e-12
MAX_HALVINGS = 40
MAX_BISECTIONS = 200

Fiber = Callable[[np.ndarray, float], float]


@dataclass(frozen=True)
class ScalarProblem:
    """Data for one scalar equation near a base point.

    Parameters
    ----------
    F : Expr or callable
        An expression in ``n`` independents and one dependent, or a callable
        ``F(x, y)``. Callables must come with ``dFdy_base``.
    a : array_like
        Base value of the independents (length ``n``).
    b : float
        Base value of the dependent variable.
    x_half : array_like
        Half-widths of the box searched for ``X``.
    r : float
        Half-width of the dependent interval ``[b - r, b + r]``.
    """

    F: Union[Expr, Fiber]
    a: np.ndarray
    b: float
    x_half: np.ndarray
    r: float
    dFdy_base: float | None = None
    base_tol: float = BASE_TOL

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        x_half = np.broadcast_to(np.asarray(self.x_half, dtype=float), a.shape).copy()
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "x_half", x_half)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "r", float(self.r))
        if isinstance(self.F, Expr):
            if self.F.m != 1 or self.F.n != a.size:
                raise ValueError(f"expression has dims (n={self.F.n}, m={self.F.m}); "
                                 f"expected (n={a.size}, m=1)")
        elif self.dFdy_base is None:
            raise ValueError("callable problems must supply dFdy_base")
        if not self.r > 0 or not np.all(x_half > 0):
            raise ValueError("box half-widths must be positive")

    @property
    def n(self) -> int:
        return self.a.size

    def fiber(self, x, y: float) -> float:
        """Value of ``F(x, y)``."""
        if isinstance(self.F, Expr):
            return self.F.fn(list(x) + [y])
        return self.F(np.asarray(x, dtype=float), y)

    def base_derivative(self) -> float:
        if self.dFdy_base is not None:
            return float(self.dFdy_base)
        return float(eval_dual(self.F, np.append(self.a, self.b)).partials[-1])


def bisect(f: Callable[[float], float], lo: float, hi: float, sigma: int = 1,
           tol_y: float = TOL_Y, f_lo: float | None = None, f_hi: float | None = None):
    """Root of ``f`` on ``[lo, hi]`` given ``sigma*f(lo) < 0 < sigma*f(hi)``.

    Halving stops once the bracket is no wider than ``tol_y``, when a
    midpoint hits an exact zero, or when the midpoint can no longer be
    separated from the endpoints in floating point.

    Returns ``(y, f(y), iterations)``.
    """
    f_lo = sigma * (f(lo) if f_lo is None else f_lo)
    f_hi = sigma * (f(hi) if f_hi is None else f_hi)
    if not (f_lo < 0.0 < f_hi):
        raise BracketFailure(f"no sign change on [{lo!r}, {hi!r}]: oriented values {f_lo!r}, {f_hi!r}")
    it = 0
    while it < MAX_BISECTIONS:
        mid = lo + 0.5 * (hi - lo)
        if hi - lo <= tol_y or mid <= lo or mid >= hi:
            break
        f_mid = sigma * f(mid)
        it += 1
        if f_mid == 0.0:
            return mid, sigma * f_mid, it
        if f_mid < 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    # report whichever end point is closer to a zero, or the midpoint
    mid = lo + 0.5 * (hi - lo)
    if mid <= lo or mid >= hi:
        return (lo, sigma * f_lo, it) if -f_lo <= f_hi else (hi, sigma * f_hi, it)
    return mid, f(mid), it


@dataclass(frozen=True)
class ScalarSolution:
    """Validated box and orientation for a :class:`ScalarProblem`.

    ``g(x)`` is available on the open box ``|x - a| < x_half`` through
    :meth:`solve_at`; the root lies in ``[b - r, b + r]``.
    """

    problem: ScalarProblem
    x_half: np.ndarray
    r: float
    sigma: int
    tol_y: float = TOL_Y
    tol_residual: float = TOL_RESIDUAL
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def y_interval(self) -> tuple[float, float]:
        b = self.problem.b
        return b - self.r, b + self.r

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != self.problem.a.shape:
            raise ValueError(f"expected {self.problem.n} independents, got {x.size}")
        return bool(np.all(np.abs(x - self.problem.a) < self.x_half))

    def _solve(self, x) -> tuple[float, float]:
        p = self.problem
        lo, hi = self.y_interval
        xs = list(map(float, x))
        f_lo = p.fiber(xs, lo)
        f_hi = p.fiber(xs, hi)
        if not (self.sigma * f_lo < 0.0):
            raise BracketFailure(f"fiber has the wrong sign at y={lo!r}: F={f_lo!r}", value=f_lo)
        if not (self.sigma * f_hi > 0.0):
            raise BracketFailure(f"fiber has the wrong sign at y={hi!r}: F={f_hi!r}", value=f_hi)
        y, fy, _ = bisect(lambda t: p.fiber(xs, t), lo, hi, self.sigma, self.tol_y, f_lo, f_hi)
        return y, fy

    def solve_at(self, x) -> float:
        """``g(x)``: the unique root of ``F(x, .)`` in the validated interval."""
        if not self.contains(x):
            raise OutsideDomain(f"x={np.asarray(x).tolist()} lies outside the validated box")
        return self._solve(np.atleast_1d(x))[0]

    def grad_at(self, x) -> np.ndarray:
        """Gradient of ``g`` from the quotient ``-dF/dx_j / dF/dy`` at ``(x, g(x))``."""
        if not isinstance(self.problem.F, Expr):
            raise TypeError("grad_at needs an expression-backed problem")
        y = self.solve_at(x)
        d = eval_dual(self.problem.F, np.append(np.atleast_1d(x), y)).partials
        if abs(d[-1]) <= FIBER_FLOOR:
            raise DegenerateFiber(f"dF/dy={d[-1]!r} vanishes at y={y!r}")
        return -d[:-1] / d[-1]


def _signs_ok(p: ScalarProblem, sigma: int, x, lo: float, hi: float, strict: bool = True) -> bool:
    xs = list(map(float, x))
    try:
        f_lo = sigma * p.fiber(xs, lo)
        f_hi = sigma * p.fiber(xs, hi)
    except (BracketFailure, DomainError, OverflowError):
        return False
    if strict:
        return f_lo < 0.0 < f_hi
    return f_lo <= 0.0 <= f_hi


def _face_centres(a: np.ndarray, x_half: np.ndarray):
    for j in range(a.size):
        for s in (-1.0, 1.0):
            pt = a.copy()
            pt[j] += s * x_half[j]
            yield pt


def prepare(p: ScalarProblem, tol_y: float = TOL_Y, tol_residual: float = TOL_RESIDUAL) -> ScalarSolution:
    """Orient the fiber and shrink the box until the endpoint signs straddle zero.

    First the dependent half-width ``r`` is halved until the base fiber
    brackets zero, then all independent half-widths are halved together until
    the bracket holds at the box centre (strictly) and at every face centre
    (non-strictly, the faces being the boundary of an open box). Both loops
    give up after ``MAX_HALVINGS`` halvings.

    The face-centre check is a probe: :meth:`ScalarSolution.solve_at`
    re-checks the endpoint signs on every call.
    """
    base_value = p.fiber(p.a, p.b)
    if abs(base_value) > p.base_tol:
        raise BaseResidualError(f"|F(a, b)| = {abs(base_value)!r} exceeds {p.base_tol!r}")
    d = p.base_derivative()
    if not abs(d) > DERIV_FLOOR:
        raise DegenerateBase(f"dF/dy(a, b) = {d!r} vanishes")
    sigma = 1 if d > 0 else -1

    r = p.r
    for halvings_r in range(MAX_HALVINGS + 1):
        if _signs_ok(p, sigma, p.a, p.b - r, p.b + r):
            break
        r *= 0.5
    else:
        raise BracketFailure(f"no bracket around b after {MAX_HALVINGS} halvings of r")

    x_half = p.x_half.copy()
    lo, hi = p.b - r, p.b + r
    for halvings_x in range(MAX_HALVINGS + 1):
        # X is open, so its closed faces only need the non-strict signs
        if (_signs_ok(p, sigma, p.a, lo, hi)
                and all(_signs_ok(p, sigma, pt, lo, hi, strict=False) for pt in _face_centres(p.a, x_half))):
            break
        x_half *= 0.5
    else:
        raise BracketFailure(f"bracket fails at box faces after {MAX_HALVINGS} halvings of X")

    return ScalarSolution(p, x_half, r, sigma, tol_y, tol_residual,
                          {"halvings_r": halvings_r, "halvings_x": halvings_x, "dFdy_base": d})
