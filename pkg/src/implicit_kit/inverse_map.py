"""
Local inverse of a square map ``F: R^n -> R^n`` near ``x0``.

The inverse is the implicit function of ``Phi(y, x) = F(x) - y``, with the
target ``y`` as independent and the preimage ``x`` as dependent. Roles are
swapped by renaming variable references in the expression trees, so every
point solve is a call into :mod:`implicit_kit.system_implicit`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import densela
from .errors import OutsideDomain, SingularBase, SingularFiber, SingularMatrixError
from .exprlang import BinOp, Expr, Var, jacobian as expr_jacobian, parse, remap_variables
from .system_implicit import DET_FLOOR, ImplicitProblem, ImplicitSolution, build

__all__ = ["InverseProblem", "InverseSolution", "build_inverse", "implicit_form"]


@dataclass(frozen=True)
class InverseProblem:
    """``F`` given as ``n`` expressions in ``x1..xn`` (declared with ``m = 0``)."""

    F: tuple[Expr, ...]
    x0: np.ndarray
    x_half: np.ndarray
    y_half: np.ndarray

    def __post_init__(self):
        F = tuple(self.F)
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        n = x0.size
        if len(F) != n:
            raise ValueError(f"{len(F)} components for {n} variables; the map must be square")
        for e in F:
            if (e.n, e.m) != (n, 0):
                raise ValueError(f"components must be expressions in x1..x{n} only")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x_half", np.broadcast_to(np.asarray(self.x_half, float), x0.shape).copy())
        object.__setattr__(self, "y_half", np.broadcast_to(np.asarray(self.y_half, float), x0.shape).copy())

    @classmethod
    def from_strings(cls, sources: Sequence[str], x0, x_half, y_half):
        n = np.size(x0)
        return cls(tuple(parse(s, n, 0) for s in sources), x0, x_half, y_half)

    @property
    def n(self) -> int:
        return self.x0.size

    def forward(self, x) -> np.ndarray:
        vals = list(map(float, x))
        return np.array([e.fn(vals) for e in self.F])

    def jacobian(self, x) -> np.ndarray:
        return expr_jacobian(self.F, np.atleast_1d(x))[1]


def implicit_form(F: Sequence[Expr]) -> tuple[Expr, ...]:
    """Rewrite each ``F_i(x)`` as ``F_i(y) - x_i`` over ``(n, n)`` variables.

    In the rewritten system the independents ``x1..xn`` stand for the target
    point and the dependents ``y1..yn`` for the preimage.
    """
    n = len(F)
    mapping = {("x", k): ("y", k) for k in range(1, n + 1)}
    out = []
    for i, e in enumerate(F, start=1):
        moved = remap_variables(e, mapping, n, n)
        out.append(Expr(BinOp("-", moved.root, Var("x", i)), n, n))
    return tuple(out)


class InverseSolution:
    """``G`` with ``F(G(y)) = y`` on the validated target box."""

    def __init__(self, problem: InverseProblem, implicit: ImplicitSolution, y0: np.ndarray):
        self.problem = problem
        self.implicit = implicit
        self.y0 = y0

    def __repr__(self):
        return f"<InverseSolution n={self.problem.n} y0={self.y0.tolist()} Y half-widths={self.y_half.tolist()}>"

    @property
    def y_half(self) -> np.ndarray:
        return self.implicit.x_half

    def contains(self, y) -> bool:
        return self.implicit.contains(y)

    def contains_x(self, x) -> bool:
        """Membership in ``X = G(Y)``, tested as ``F(x)`` in the validated ``Y``
        together with ``x`` in the preimage box."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.contains(self.problem.forward(x)) and self.implicit.contains_y(x)

    def invert_at(self, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if not self.contains(y):
            raise OutsideDomain(f"y={y.tolist()} lies outside the validated box")
        return self.implicit.evaluate(y)

    __call__ = invert_at

    def inverse_jacobian(self, y) -> np.ndarray:
        """``JG(y) = JF(G(y))^{-1}``."""
        J = self.problem.jacobian(self.invert_at(y))
        try:
            return densela.inverse(J)
        except SingularMatrixError as exc:
            d = densela.det(J)
            raise SingularFiber(f"JF(G(y)) is singular (det={d!r})", det=d) from exc


def build_inverse(p: InverseProblem, order: Sequence[int] | None = None) -> InverseSolution:
    J0 = p.jacobian(p.x0)
    d = densela.det(J0)
    scale = np.abs(J0).max(axis=1)
    scaled = densela.det(J0 / scale[:, None]) if np.all(scale > 0) else 0.0
    if not abs(scaled) > DET_FLOOR:
        raise SingularBase(f"det JF(x0) = {d!r} vanishes", det=d)
    y0 = p.forward(p.x0)
    ip = ImplicitProblem(implicit_form(p.F), y0, p.x0, p.y_half, p.x_half)
    return InverseSolution(p, build(ip, order), y0)
