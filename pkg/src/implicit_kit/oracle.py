"""
Independent reference solvers used to cross-check the bisection/elimination
path: a damped Newton iteration and a brute-force sign scan of one fiber.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from . import densela
from .errors import NoConvergence, SingularFiber, SingularMatrixError
from .exprlang import Expr, jacobian as expr_jacobian

__all__ = ["NewtonTrace", "newton_solve", "first_order_guess", "fiber_scan"]


@dataclass
class NewtonTrace:
    iterates: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    damping: list = field(default_factory=list)
    converged: bool = False


def _blocks(F, x, y):
    n = len(x)
    values, J = expr_jacobian(F, np.concatenate([x, y]))
    return values, J[:, :n], J[:, n:]


def newton_solve(F: Sequence[Expr], x, y_init, tol: float = 1e-12, max_iter: int = 100,
                 full_output: bool = False):
    """Solve ``F(x, y) = 0`` for ``y`` by Newton's method with step halving.

    Each step solves ``dF/dy * s = -F``; the step is halved until the max-norm
    residual drops (at most 60 halvings).

    Parameters
    ----------
    F : sequence of Expr
        ``m`` expressions over ``(n, m)`` variables.
    x : array_like
        Fixed independent values.
    y_init : array_like
        Starting guess for the dependents.
    tol : float
        Stop once ``||F(x, y)||_max <= tol``.
    full_output : bool
        Also return the :class:`NewtonTrace`.

    Raises
    ------
    NoConvergence
        Iteration budget exhausted or no decreasing step found.
    SingularFiber
        ``dF/dy`` singular at an iterate.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y_init, dtype=float)).copy()
    trace = NewtonTrace()
    values, _, Fy = _blocks(F, x, y)
    res = np.abs(values).max()
    trace.iterates.append(y.copy())
    trace.residuals.append(res)
    for _ in range(max_iter):
        if res <= tol:
            trace.converged = True
            return (y, trace) if full_output else y
        try:
            step = densela.solve(Fy, -values)
        except SingularMatrixError as exc:
            raise SingularFiber(f"dF/dy singular at y={y.tolist()}", det=densela.det(Fy)) from exc
        lam = 1.0
        for _ in range(60):
            y_new = y + lam * step
            try:
                values_new, _, Fy_new = _blocks(F, x, y_new)
                res_new = np.abs(values_new).max()
            except (ArithmeticError, ValueError):
                res_new = np.inf
            if res_new < res:
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"no decreasing step from residual {res!r}", trace)
        y, values, Fy, res = y_new, values_new, Fy_new, res_new
        trace.iterates.append(y.copy())
        trace.residuals.append(res)
        trace.damping.append(lam)
    if res <= tol:
        trace.converged = True
        return (y, trace) if full_output else y
    raise NoConvergence(f"residual {res!r} after {max_iter} iterations", trace)


def first_order_guess(F: Sequence[Expr], a, b, x) -> np.ndarray:
    """``b + Jg(a)(x - a)`` with ``Jg(a) = -[dF/dy]^{-1} dF/dx`` at the base."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    _, Fx, Fy = _blocks(F, a, b)
    return b + densela.solve(Fy, -Fx) @ (np.atleast_1d(np.asarray(x, dtype=float)) - a)


def fiber_scan(F: Union[Expr, Callable[[float], float]], x, y_lo: float, y_hi: float,
               grid: int) -> list[tuple[float, float]]:
    """Intervals between consecutive grid points where ``F(x, .)`` changes sign.

    Grid points where the fiber is exactly zero are skipped over, so a root
    sitting on a grid point gives one interval spanning it. ``F`` is an
    expression with ``m == 1`` or a callable of ``y`` alone (``x`` ignored).
    """
    if grid < 2:
        raise ValueError("grid needs at least 2 points")
    ys = np.linspace(y_lo, y_hi, grid)
    if isinstance(F, Expr):
        head = [float(v) for v in np.atleast_1d(x)]
        fn = F.fn
        vals = np.array([fn(head + [y]) for y in ys.tolist()])
    else:
        vals = np.array([F(y) for y in ys.tolist()])
    nz = np.flatnonzero(vals != 0.0)
    signs = np.sign(vals[nz])
    flips = np.flatnonzero(signs[:-1] * signs[1:] < 0)
    return [(float(ys[nz[k]]), float(ys[nz[k + 1]])) for k in flips]
