"""
Sampling probes for the hypotheses behind the solvers.

None of these certify anything. They estimate, from seeded random samples:

* whether mixed-row Jacobian determinants stay away from zero on a ball
  (the injectivity argument evaluates row ``i`` of the Jacobian at its own
  point ``c_i``),
* how far ``dF/dy`` moves from its base value on shrinking balls
  (continuity at the base point),
* how fast the first-order remainder ``|F(p+h) - F(p) - <v, h>| / |h|``
  decays (differentiability at a point).

Every random draw comes from a generator seeded with ``(seed, sample index)``,
so reports are reproducible byte for byte and independent of sample order.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import densela
from .errors import DomainError, RadiusCollapse, SingularBase
from .exprlang import Expr, eval_dual, jacobian as expr_jacobian

__all__ = ["ProbeReport", "unit_ball_samples", "mixed_determinant",
           "probe_injectivity_radius", "probe_continuity", "probe_differentiability",
           "continuity_verdict", "decay_verdict", "DET_THRESHOLD"]

DET_THRESHOLD = 1e-12

# stream tags keep the draws of different probes apart for the same seed
_INJECTIVITY, _CONTINUITY, _DIFFERENTIABILITY = 1, 2, 3


def unit_ball_samples(dim: int, count: int, seed: int, stream: int = 0, points: int = 1) -> np.ndarray:
    """``count`` draws of ``points`` uniform points in the unit ball of R^dim.

    Shape ``(count, points, dim)``. Draw ``i`` depends only on
    ``(seed, stream, i)``.
    """
    out = np.empty((count, points, dim))
    for i in range(count):
        rng = np.random.default_rng([seed, stream, i])
        g = rng.standard_normal((points, dim))
        u = rng.random(points)
        norms = np.linalg.norm(g, axis=1)
        norms[norms == 0] = 1.0
        out[i] = g / norms[:, None] * (u ** (1.0 / dim))[:, None]
    return out


def _row_scaled_det(A: np.ndarray) -> float:
    scale = np.abs(A).max(axis=1)
    if np.any(scale == 0):
        return 0.0
    return densela.det(A / scale[:, None])


def mixed_determinant(F: Sequence[Expr], points: np.ndarray) -> float:
    """Row-scaled det of the matrix whose row ``i`` is ``grad F_i(points[i])``."""
    rows = [eval_dual(f, pt).partials for f, pt in zip(F, points)]
    return _row_scaled_det(np.array(rows))


def probe_injectivity_radius(F: Sequence[Expr], p, r_init: float, samples: int = 200,
                             seed: int = 0) -> float:
    """Largest ``r_init / 2^k`` whose sampled mixed determinants keep the base sign.

    Each sample draws one independent point per row in ``B(p; r)``. A sample
    passes when its row-scaled determinant exceeds ``DET_THRESHOLD`` in
    magnitude and has the sign of the base determinant (a sign flip means the
    determinant vanishes somewhere on the ball). The same unit-ball draws are
    rescaled at every radius, so more samples can only shrink the answer.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    N = p.size
    if len(F) != N or any(f.nvars != N for f in F):
        raise ValueError("injectivity probe needs a square map")
    base_det = _row_scaled_det(expr_jacobian(F, p)[1])
    if not abs(base_det) > DET_THRESHOLD:
        raise SingularBase(f"det JF(p) = {base_det!r} vanishes", det=base_det)
    sign = np.sign(base_det)
    draws = unit_ball_samples(N, samples, seed, _INJECTIVITY, points=N)
    r = float(r_init)
    while r >= 1e-12 * r_init:
        ok = True
        for u in draws:
            try:
                d = mixed_determinant(F, p + r * u)
            except DomainError:
                ok = False
                break
            if not (abs(d) > DET_THRESHOLD and np.sign(d) == sign):
                ok = False
                break
        if ok:
            return r
        r *= 0.5
    raise RadiusCollapse(f"no accepted radius down to {r!r}")


def probe_continuity(F: Sequence[Expr], base, radii: Sequence[float], samples: int = 1000,
                     seed: int = 0) -> list[tuple[float, float]]:
    """Sampled modulus of continuity of ``dF/dy`` at ``base = (a, b)``.

    For each radius ``rho`` (increasing) returns the largest entrywise
    deviation of ``dF/dy`` from its base value over the samples drawn in the
    ``rho``-ball, including those already drawn for smaller radii, so the
    table never decreases.
    """
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and increasing")
    base = np.atleast_1d(np.asarray(base, dtype=float))
    n = F[0].n
    ref = expr_jacobian(F, base)[1][:, n:]
    draws = unit_ball_samples(base.size, samples, seed, _CONTINUITY)[:, 0, :]
    table = []
    running = 0.0
    for rho in radii:
        worst = 0.0
        for u in draws:
            J = expr_jacobian(F, base + rho * u)[1][:, n:]
            worst = max(worst, float(np.abs(J - ref).max()))
        running = max(running, worst)
        table.append((rho, running))
    return table


def probe_differentiability(F: Expr, p, h_scales: Sequence[float], directions: int = 64,
                            seed: int = 0) -> list[tuple[float, float]]:
    """Sup over random unit directions of ``|F(p+h) - F(p) - <v, h>| / |h|``.

    ``v`` is the gradient from forward differentiation at ``p``. The table
    should head to zero as ``|h|`` shrinks when ``F`` is differentiable at p.
    """
    h_scales = [float(h) for h in h_scales]
    if any(h <= 0 for h in h_scales) or any(b >= a for a, b in zip(h_scales, h_scales[1:])):
        raise ValueError("h_scales must be positive and decreasing")
    p = np.atleast_1d(np.asarray(p, dtype=float))
    d = eval_dual(F, p)
    f0, v = d.value, d.partials
    dirs = unit_ball_samples(p.size, directions, seed, _DIFFERENTIABILITY)[:, 0, :]
    norms = np.linalg.norm(dirs, axis=1)
    norms[norms == 0] = 1.0
    dirs = dirs / norms[:, None]
    fn = F.fn
    table = []
    for h in h_scales:
        worst = 0.0
        for u in dirs:
            step = h * u
            rem = fn((p + step).tolist()) - f0 - float(v @ step)
            worst = max(worst, abs(rem) / h)
        table.append((h, worst))
    return table


def continuity_verdict(table, ratio: float = 0.1, floor: float = 1e-8) -> bool:
    """Moduli consistent with continuity: the smallest-radius entry is tiny or
    has dropped by ``ratio`` relative to the largest radius."""
    small, large = table[0][1], table[-1][1]
    return small <= floor or small <= ratio * large


def decay_verdict(table, ratio: float = 0.1, floor: float = 1e-8) -> bool:
    """Remainders consistent with differentiability (largest ``h`` first)."""
    first, last = table[0][1], table[-1][1]
    return last <= floor or last <= ratio * first


@dataclass
class ProbeReport:
    base_det: float | None
    radius: float | None
    modulus_table: list = field(default_factory=list)
    remainder_table: list = field(default_factory=list)
    seed: int = 0
    samples: int = 0
    verdicts: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2, allow_nan=False, default=float)
