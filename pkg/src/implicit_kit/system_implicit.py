"""
Systems ``F(x, y) = 0`` with ``y`` in R^m, solved by eliminating one
dependent variable at a time.

Outline of :func:`build`:

1. Normalize. With ``M = dF/dy(a, b)`` work with
   ``G(x, z) = F(x, b + M^{-1}(z - b))`` whose ``z``-Jacobian at the base is
   the identity.
2. Eliminate. Pick an equation ``e`` and a variable ``v``; the scalar engine
   gives ``phi(x, z_rest)`` solving ``G_e = 0`` for ``z_v``. Substituting phi
   into the remaining equations leaves a system with one unknown fewer.
   Repeat until no unknowns remain.
3. Evaluate. ``g(x)`` is rebuilt from the last level back to the first, then
   mapped back through ``y = b + M^{-1}(z - b)``.

Each reduced equation is a closure over the previous level, so one value of a
level-``k`` equation costs a full bisection at every level below it. The cost
grows like (bisection steps)^m; this is meant for m up to about 5.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import densela
from .errors import (BaseResidualError, BracketFailure, DegenerateBase, OutsideDomain,
                     SingularBase, SingularFiber, SingularMatrixError)
from .exprlang import Expr, eval_dual, jacobian as expr_jacobian, parse
from .scalar_implicit import TOL_RESIDUAL, TOL_Y, ScalarProblem, ScalarSolution, bisect, prepare

__all__ = ["ImplicitProblem", "Normalization", "DiniNode", "ImplicitSolution",
           "normalize", "build", "augmented_jacobian", "SAFETY"]

SAFETY = 0.9
BASE_TOL = 1e-12
LEVEL_BASE_TOL = 1e-10
DET_FLOOR = 1e-10
IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class ImplicitProblem:
    """``m`` equations in ``n`` independents and ``m`` dependents.

    ``x_half`` and ``y_half`` are the half-widths of the box searched around
    the base point ``(a, b)``.
    """

    F: tuple[Expr, ...]
    a: np.ndarray
    b: np.ndarray
    x_half: np.ndarray
    y_half: np.ndarray
    tol_y: float = TOL_Y
    tol_residual: float = TOL_RESIDUAL

    def __post_init__(self):
        F = tuple(self.F)
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        n, m = a.size, b.size
        if n < 1 or m < 1:
            raise ValueError("need at least one independent and one dependent variable")
        if len(F) != m:
            raise ValueError(f"{len(F)} equations for {m} dependent variables")
        for i, e in enumerate(F):
            if (e.n, e.m) != (n, m):
                raise ValueError(f"equation {i + 1} has dims (n={e.n}, m={e.m}), expected ({n}, {m})")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "x_half", np.broadcast_to(np.asarray(self.x_half, float), a.shape).copy())
        object.__setattr__(self, "y_half", np.broadcast_to(np.asarray(self.y_half, float), b.shape).copy())
        if not (np.all(self.x_half > 0) and np.all(self.y_half > 0)):
            raise ValueError("box half-widths must be positive")

    @classmethod
    def from_strings(cls, sources: Sequence[str], a, b, x_half, y_half, **kw):
        n, m = np.size(a), np.size(b)
        return cls(tuple(parse(s, n, m) for s in sources), a, b, x_half, y_half, **kw)

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def m(self) -> int:
        return self.b.size

    def residual(self, x, y) -> np.ndarray:
        vals = list(map(float, x)) + list(map(float, y))
        return np.array([e.fn(vals) for e in self.F])

    def blocks(self, x, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(F, dF/dx, dF/dy)`` at ``(x, y)`` by forward differentiation."""
        values, J = expr_jacobian(self.F, np.concatenate([np.atleast_1d(x), np.atleast_1d(y)]))
        return values, J[:, :self.n], J[:, self.n:]


def augmented_jacobian(problem: ImplicitProblem, x, y) -> np.ndarray:
    """Jacobian of ``Phi(x, y) = (x, F(x, y))``: ``[[I, 0], [dF/dx, dF/dy]]``."""
    _, Fx, Fy = problem.blocks(x, y)
    n, m = problem.n, problem.m
    top = np.hstack([np.eye(n), np.zeros((n, m))])
    return np.vstack([top, np.hstack([Fx, Fy])])


@dataclass(frozen=True)
class Normalization:
    """``G(x, z) = F(x, b + M^{-1}(z - b))`` and the data that defines it."""

    M: np.ndarray
    M_inv: np.ndarray
    perm: np.ndarray
    det: float
    base_jacobian: np.ndarray  # dG/dz(a, b)
    problem: ImplicitProblem = field(repr=False)

    def to_y(self, z) -> np.ndarray:
        b = self.problem.b
        return b + self.M_inv @ (np.asarray(z, dtype=float) - b)

    def to_z(self, y) -> np.ndarray:
        b = self.problem.b
        return b + self.M @ (np.asarray(y, dtype=float) - b)

    def G(self, x, z) -> np.ndarray:
        return self.problem.residual(x, self.to_y(z))

    def z_half(self) -> np.ndarray:
        """Largest z half-widths whose box maps into the y box.

        Row ``i`` of ``M^{-1}`` spreads ``y_half[i]`` evenly over its nonzero
        entries, so ``|M^{-1}| z_half <= y_half`` holds entrywise.
        """
        A = np.abs(self.M_inv)
        y_half = self.problem.y_half
        nnz = np.count_nonzero(A, axis=1)
        out = np.full(A.shape[1], np.inf)
        for i in range(A.shape[0]):
            for j in range(A.shape[1]):
                if A[i, j] > 0:
                    out[j] = min(out[j], y_half[i] / (A[i, j] * nnz[i]))
        return np.where(np.isfinite(out), out, y_half)


def normalize(p: ImplicitProblem) -> Normalization:
    """Build ``M = dF/dy(a, b)`` and the normalized system ``G``."""
    _, _, M = p.blocks(p.a, p.b)
    scale = np.abs(M).max(axis=1)
    scaled = M / np.where(scale > 0, scale, 1.0)[:, None]
    det_scaled = densela.det(scaled) if np.all(scale > 0) else 0.0
    det_M = densela.det(M)
    if not abs(det_scaled) > DET_FLOOR:
        raise SingularBase(f"det dF/dy(a, b) = {det_M!r} vanishes", det=det_M)
    try:
        M_inv = densela.inverse(M)
    except SingularMatrixError as exc:
        raise SingularBase(f"det dF/dy(a, b) = {det_M!r}: {exc}", det=det_M) from exc
    _, perm, _ = densela.lu_factor(M)
    # dG/dz at the base, propagated through the affine substitution by the AD seed
    seed = np.zeros((p.n + p.m, p.m))
    seed[p.n:] = M_inv
    _, Jz = expr_jacobian(p.F, np.concatenate([p.a, p.b]), seed=seed)
    if np.abs(Jz - np.eye(p.m)).max() > IDENTITY_TOL * max(1.0, np.abs(M).max() * np.abs(M_inv).max()):
        raise SingularBase(f"normalization failed: dG/dz(a, b) deviates from I by "
                           f"{np.abs(Jz - np.eye(p.m)).max():.3g}", det=det_M)
    return Normalization(M, M_inv, perm, det_M, Jz, p)


@dataclass(frozen=True)
class DiniNode:
    """One elimination step: equation ``eq`` solved for variable ``var``.

    ``rest`` lists the variables still free when this level is solved; the
    scalar solution's independents are ``(x, z[rest])``.
    """

    level: int
    eq: int
    var: int
    rest: tuple[int, ...]
    scalar: ScalarSolution


def _schur_step(S: np.ndarray, rows: list, cols: list, e: int, v: int) -> np.ndarray:
    """Reduced base Jacobian after eliminating row ``e`` / column ``v``."""
    i, j = rows.index(e), cols.index(v)
    keep_r = [k for k in range(len(rows)) if k != i]
    keep_c = [k for k in range(len(cols)) if k != j]
    return S[np.ix_(keep_r, keep_c)] - np.outer(S[keep_r, j], S[i, keep_c]) / S[i, j]


class ImplicitSolution:
    """The implicit function ``g`` on the validated box ``X``.

    Build with :func:`build`. Instances are immutable after construction and
    safe to evaluate concurrently at distinct points.
    """

    def __init__(self, problem: ImplicitProblem, normalization: Normalization,
                 nodes: tuple[DiniNode, ...], x_half: np.ndarray, z_half: np.ndarray):
        self.problem = problem
        self.normalization = normalization
        self.nodes = nodes
        self.x_half = x_half
        self.z_half = z_half
        self.tol_y = problem.tol_y
        self.tol_residual = problem.tol_residual

    def __repr__(self):
        order = [(nd.eq + 1, nd.var + 1) for nd in self.nodes]
        return f"<ImplicitSolution n={self.problem.n} m={self.problem.m} order={order} X half-widths={self.x_half.tolist()}>"

    @property
    def order(self) -> list[int]:
        """Dependent variables in elimination order (0-based)."""
        return [nd.var for nd in self.nodes]

    # -- plumbing shared with build -------------------------------------------------

    def _fiber(self, k: int, x: np.ndarray, z: np.ndarray, t: float) -> float:
        node = self.nodes[k]
        zz = z.copy()
        zz[node.var] = t
        self._complete(k, x, zz)
        return self.normalization.G(x, zz)[node.eq]

    def _complete(self, k: int, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Fill in the variables eliminated at levels ``k-1, ..., 0``."""
        for j in range(k - 1, -1, -1):
            node = self.nodes[j]
            sol = node.scalar
            lo, hi = sol.y_interval
            try:
                z[node.var] = _solve_level(self, j, x, z, lo, hi)
            except BracketFailure as exc:
                if exc.level is None:
                    exc.level = j + 1
                raise
        return z

    # -- public API ----------------------------------------------------------------

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != self.problem.a.shape:
            raise ValueError(f"expected {self.problem.n} independents, got {x.size}")
        return bool(np.all(np.abs(x - self.problem.a) < self.x_half))

    def contains_y(self, y) -> bool:
        z = self.normalization.to_z(np.atleast_1d(np.asarray(y, dtype=float)))
        return bool(np.all(np.abs(z - self.problem.b) <= self.z_half * (1 + 1e-12)))

    def evaluate(self, x) -> np.ndarray:
        """``g(x)`` with ``F(x, g(x)) = 0``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not self.contains(x):
            raise OutsideDomain(f"x={x.tolist()} lies outside the validated box")
        z = np.array(self.problem.b, dtype=float)
        self._complete(len(self.nodes), x, z)
        return self.normalization.to_y(z)

    __call__ = evaluate

    def jacobian(self, x) -> np.ndarray:
        """``Jg(x) = -[dF/dy]^{-1} dF/dx`` at ``(x, g(x))``, via a linear solve."""
        y = self.evaluate(x)
        _, Fx, Fy = self.problem.blocks(x, y)
        try:
            return densela.solve(Fy, -Fx)
        except SingularMatrixError as exc:
            d = densela.det(Fy)
            raise SingularFiber(f"dF/dy(x, g(x)) is singular (det={d!r})", det=d) from exc

    def check_unique(self, x, y_candidate, tol: float | None = None) -> bool:
        """Whether a claimed solution at ``x`` is the one ``g`` returns.

        True iff ``y_candidate`` solves the system to ``tol`` and sits within
        ``10 * tol_y`` of ``g(x)``. Any other zero inside ``X x Y`` would
        contradict injectivity of ``(x, y) -> (x, F(x, y))``.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y_candidate = np.atleast_1d(np.asarray(y_candidate, dtype=float))
        if not self.contains(x) or not self.contains_y(y_candidate):
            raise OutsideDomain(f"({x.tolist()}, {y_candidate.tolist()}) lies outside X x Y")
        tol = self.problem.m * 1e-10 if tol is None else tol
        if np.abs(self.problem.residual(x, y_candidate)).max() > tol:
            return False
        return bool(np.abs(y_candidate - self.evaluate(x)).max() <= 10 * self.tol_y * max(1.0, np.abs(y_candidate).max()))

    def base_check(self) -> list[float]:
        """``|phi_k(a, b_rest) - b_var|`` for every level."""
        out = []
        x = self.problem.a
        for k, node in enumerate(self.nodes):
            z = np.array(self.problem.b, dtype=float)
            lo, hi = node.scalar.y_interval
            out.append(abs(_solve_level(self, k, x, z, lo, hi) - self.problem.b[node.var]))
        return out


def _solve_level(sol: ImplicitSolution, k: int, x, z, lo, hi) -> float:
    node = sol.nodes[k]
    scalar = node.scalar
    f = lambda t: sol._fiber(k, x, z, t)
    f_lo = f(lo)
    f_hi = f(hi)
    if not scalar.sigma * f_lo < 0.0 < scalar.sigma * f_hi:
        bad, val = (lo, f_lo) if not scalar.sigma * f_lo < 0.0 else (hi, f_hi)
        raise BracketFailure(f"fiber has the wrong sign at z{node.var + 1}={bad!r}: value {val!r}",
                             value=val, level=k + 1)
    return bisect(f, lo, hi, scalar.sigma, scalar.tol_y, f_lo, f_hi)[0]


def build(p: ImplicitProblem, order: Sequence[int] | None = None) -> ImplicitSolution:
    """Construct ``g`` by normalization and successive elimination.

    Parameters
    ----------
    order : sequence of int, optional
        Dependent variables (0-based) in the order they are eliminated. Each
        is paired with the remaining equation of largest base sensitivity.
        By default the (equation, variable) pair with the largest entry of
        the reduced base Jacobian is taken at every level.
    """
    base_res = np.abs(p.residual(p.a, p.b)).max()
    if base_res > BASE_TOL:
        raise BaseResidualError(f"||F(a, b)||_max = {base_res!r} exceeds {BASE_TOL!r}")
    norm = normalize(p)
    n, m = p.n, p.m
    if order is not None:
        order = [int(v) for v in order]
        if sorted(order) != list(range(m)):
            raise ValueError(f"order must be a permutation of 0..{m - 1}")

    x_half = p.x_half.copy()
    z_half = norm.z_half()
    S = norm.base_jacobian.copy()
    rows, cols = list(range(m)), list(range(m))
    nodes: list[DiniNode] = []
    sol = ImplicitSolution(p, norm, (), x_half, z_half)

    for level in range(m):
        if order is None:
            i, j = np.unravel_index(int(np.argmax(np.abs(S))), S.shape)
        else:
            j = cols.index(order[level])
            i = int(np.argmax(np.abs(S[:, j])))
        e, v = rows[i], cols[j]
        pivot = float(S[i, j])
        rest = tuple(c for c in cols if c != v)

        def fiber(u, t, k=level, rest=rest):
            z = np.array(p.b, dtype=float)
            z[list(rest)] = u[n:]
            return sol._fiber(k, u[:n], z, t)

        sp = ScalarProblem(fiber, np.concatenate([p.a, p.b[list(rest)]]), p.b[v],
                           np.concatenate([x_half, z_half[list(rest)]]), z_half[v],
                           dFdy_base=pivot, base_tol=LEVEL_BASE_TOL)
        # the level's fiber refers to sol.nodes[level], so publish a placeholder first
        placeholder = DiniNode(level, e, v, rest, ScalarSolution(sp, sp.x_half, sp.r, 1 if pivot > 0 else -1,
                                                                 p.tol_y, p.tol_residual))
        sol.nodes = tuple(nodes) + (placeholder,)
        try:
            scalar = prepare(sp, p.tol_y, p.tol_residual)
        except BracketFailure as exc:
            if exc.level is None:
                exc.level = level + 1
            raise
        except (DegenerateBase, BaseResidualError) as exc:
            raise type(exc)(f"level {level + 1} (equation {e + 1}, variable {v + 1}): {exc}") from exc
        nodes.append(DiniNode(level, e, v, rest, scalar))
        sol.nodes = tuple(nodes)
        x_half = scalar.x_half[:n].copy()
        z_half = z_half.copy()
        z_half[list(rest)] = scalar.x_half[n:]
        z_half[v] = scalar.r
        S = _schur_step(S, rows, cols, e, v)
        rows.remove(e)
        cols.remove(v)

    sol.x_half = SAFETY * x_half
    sol.z_half = z_half
    return sol
