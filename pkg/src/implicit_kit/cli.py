"""
Command-line front end.

Usage::

    implicit-kit check    problem.json
    implicit-kit solve    problem.json --at 0.6 [--at ...] | --grid -0.5:0.5:11[,...]
    implicit-kit jacobian problem.json --at 2 [--fd-check]
    implicit-kit invert   problem.json --at 0.8,0.6 [--roundtrip]

Exit codes: 0 success, 1 usage or file error, 2 hypothesis check failed,
3 solve failure. ``IMPLICIT_KIT_SEED`` overrides the seed in the file.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import densela
from .errors import (BracketFailure, DomainError, ImplicitKitError, OutsideDomain, ParseError,
                     RadiusCollapse, SingularBase, SingularFiber)
from .exprlang import Expr, Var, parse
from .inverse_map import InverseProblem, InverseSolution, build_inverse, implicit_form
from .probes import (ProbeReport, continuity_verdict, decay_verdict, probe_continuity,
                     probe_differentiability, probe_injectivity_radius)
from .scalar_implicit import TOL_RESIDUAL, TOL_Y
from .system_implicit import BASE_TOL, DET_FLOOR, ImplicitProblem, ImplicitSolution, build

EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS, EXIT_SOLVE = 0, 1, 2, 3
SEED_ENV = "IMPLICIT_KIT_SEED"
FD_STEP = 1e-6


class ProblemFileError(ImplicitKitError):
    pass


@dataclass
class ProblemFile:
    kind: str
    n: int
    m: int
    F: list
    base_x: list
    base_y: list | None
    box_x: list
    box_y: list
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    samples: int = 200

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemFile":
        try:
            kind = d["kind"]
            n, m = int(d["n"]), int(d["m"])
            F = list(d["F"])
            base_x = [float(v) for v in d["base_x"]]
            box = d["box"]
            box_x = [float(v) for v in box["x"]]
            box_y = [float(v) for v in box["y"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemFileError(f"malformed problem file: {exc!r}") from exc
        if kind not in ("implicit", "inverse"):
            raise ProblemFileError(f"unknown kind {kind!r}")
        base_y = None
        if kind == "implicit":
            if "base_y" not in d:
                raise ProblemFileError("implicit problems need base_y")
            base_y = [float(v) for v in d["base_y"]]
            if len(base_y) != m or len(box_y) != m:
                raise ProblemFileError(f"base_y and box.y need {m} entries")
            if len(F) != m:
                raise ProblemFileError(f"{len(F)} equations for m={m}")
        else:
            if n != m:
                raise ProblemFileError("inverse problems need n == m")
            if "base_y" in d:
                raise ProblemFileError("inverse problems compute y0 = F(x0); omit base_y")
            if len(F) != n or len(box_y) != n:
                raise ProblemFileError(f"inverse problems need {n} components and box.y entries")
        if len(base_x) != n or len(box_x) != n:
            raise ProblemFileError(f"base_x and box.x need {n} entries")
        seed = int(d.get("seed", 0))
        if os.environ.get(SEED_ENV):
            seed = int(os.environ[SEED_ENV])
        return cls(kind, n, m, F, base_x, base_y, box_x, box_y,
                   dict(d.get("tolerances") or {}), seed, int(d.get("samples", 200)))

    @classmethod
    def load(cls, path) -> "ProblemFile":
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ProblemFileError(f"cannot read {path}: {exc}") from exc
        if not isinstance(d, dict):
            raise ProblemFileError("problem file must hold a JSON object")
        return cls.from_dict(d)

    def exprs(self) -> list[Expr]:
        m = self.m if self.kind == "implicit" else 0
        return [parse(s, self.n, m) for s in self.F]

    def implicit_problem(self) -> ImplicitProblem:
        tol = {k: float(v) for k, v in self.tolerances.items() if k in ("tol_y", "tol_residual")}
        return ImplicitProblem(tuple(self.exprs()), self.base_x, self.base_y, self.box_x, self.box_y, **tol)

    def inverse_problem(self) -> InverseProblem:
        return InverseProblem(tuple(self.exprs()), self.base_x, self.box_x, self.box_y)


def fmt(v) -> str:
    return "%.17g" % v


def _parse_point(text: str, dim: int) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise ProblemFileError(f"bad point {text!r}") from exc
    if len(vals) != dim:
        raise ProblemFileError(f"point {text!r} needs {dim} coordinates")
    return np.array(vals)


def _grid_points(text: str, dim: int):
    axes = []
    for part in text.split(","):
        try:
            lo, hi, steps = part.split(":")
            axes.append(np.linspace(float(lo), float(hi), int(steps)))
        except ValueError as exc:
            raise ProblemFileError(f"bad grid axis {part!r}; expected from:to:steps") from exc
    if len(axes) != dim:
        raise ProblemFileError(f"grid needs {dim} axes, got {len(axes)}")
    return [np.array(p) for p in itertools.product(*axes)]


def _requested_points(args, dim):
    points = [_parse_point(t, dim) for t in (args.at or [])]
    if getattr(args, "grid", None):
        points += _grid_points(args.grid, dim)
    if not points:
        raise ProblemFileError("no points requested (use --at or --grid)")
    return points


# -- check ----------------------------------------------------------------------

def run_check(pf: ProblemFile) -> tuple[ProbeReport, int]:
    exprs = pf.exprs()
    seed, samples = pf.seed, pf.samples
    verdicts = {}
    if pf.kind == "implicit":
        a, b = np.array(pf.base_x), np.array(pf.base_y)
        system = exprs
        base = np.concatenate([a, b])
        residual = max(abs(e.fn(base.tolist())) for e in exprs)
        problem = pf.implicit_problem()
        _, _, block = problem.blocks(a, b)
        # Phi(x, y) = (x, F(x, y)) is the map whose injectivity gives uniqueness
        inj_map = [Expr(Var("x", k), pf.n, pf.m) for k in range(1, pf.n + 1)] + exprs
        inj_point = base
        r_init = max(pf.box_x + pf.box_y)
    else:
        x0 = np.array(pf.base_x)
        y0 = np.array([e.fn(x0.tolist()) for e in exprs])
        system = list(implicit_form(exprs))
        base = np.concatenate([y0, x0])
        residual = 0.0
        block = InverseProblem(tuple(exprs), x0, pf.box_x, pf.box_y).jacobian(x0)
        inj_map = exprs
        inj_point = x0
        r_init = max(pf.box_x)

    base_det = densela.det(block)
    scale = np.abs(block).max(axis=1)
    scaled_det = densela.det(block / scale[:, None]) if np.all(scale > 0) else 0.0
    verdicts["base_residual"] = bool(residual <= BASE_TOL)
    verdicts["base_nonsingular"] = bool(abs(scaled_det) > DET_FLOOR)

    try:
        radius = probe_injectivity_radius(inj_map, inj_point, r_init, samples, seed)
    except (SingularBase, RadiusCollapse, DomainError):
        radius = None
    verdicts["injectivity"] = radius is not None

    radii = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1]
    try:
        modulus = probe_continuity(system, base, radii, samples, seed)
        verdicts["continuity"] = continuity_verdict(modulus)
    except DomainError:
        modulus = []
        verdicts["continuity"] = False

    remainders = []
    decays = []
    point = base if pf.kind == "implicit" else np.array(pf.base_x)
    for i, e in enumerate(exprs):
        try:
            table = probe_differentiability(e, point, [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6], 64, seed)
        except DomainError:
            decays.append(False)
            continue
        decays.append(decay_verdict(table))
        remainders += [{"component": i + 1, "h": h, "remainder": r} for h, r in table]
    verdicts["differentiability"] = all(decays)

    report = ProbeReport(
        base_det=base_det,
        radius=radius,
        modulus_table=[{"radius": r, "modulus": v} for r, v in modulus],
        remainder_table=remainders,
        seed=seed,
        samples=samples,
        verdicts=verdicts,
    )
    ok = verdicts["base_residual"] and verdicts["base_nonsingular"]
    return report, EXIT_OK if ok else EXIT_HYPOTHESIS


def cmd_check(args, out) -> int:
    report, code = run_check(ProblemFile.load(args.problem))
    out.write(report.to_json() + "\n")
    return code


# -- solve / jacobian -------------------------------------------------------------

def _build_implicit(pf: ProblemFile) -> ImplicitSolution:
    if pf.kind != "implicit":
        raise ProblemFileError("this command needs an implicit problem")
    return build(pf.implicit_problem())


def cmd_solve(args, out) -> int:
    pf = ProblemFile.load(args.problem)
    sol = _build_implicit(pf)
    n, m = pf.n, pf.m
    header = [f"x{k}" for k in range(1, n + 1)] + [f"g{k}" for k in range(1, m + 1)]
    out.write(",".join(header + ["residual_max", "fiber_det", "status"]) + "\n")
    code = EXIT_OK
    for x in _requested_points(args, n):
        xs = [fmt(v) for v in x]
        try:
            y = sol.evaluate(x)
        except OutsideDomain:
            out.write(",".join(xs + [""] * (m + 2) + ["OUTSIDE"]) + "\n")
            continue
        except (BracketFailure, DomainError) as exc:
            print(f"x={x.tolist()}: {exc}", file=sys.stderr)
            out.write(",".join(xs + [""] * (m + 2) + ["FAIL"]) + "\n")
            code = EXIT_SOLVE
            continue
        res = float(np.abs(sol.problem.residual(x, y)).max())
        _, _, Fy = sol.problem.blocks(x, y)
        out.write(",".join(xs + [fmt(v) for v in y] + [fmt(res), fmt(densela.det(Fy)), "OK"]) + "\n")
    return code


def fd_jacobian(func, x, step: float = FD_STEP) -> np.ndarray:
    """Central differences of a vector function, one column per coordinate."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        h = step * max(1.0, abs(x[k]))
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        cols.append((np.atleast_1d(func(xp)) - np.atleast_1d(func(xm))) / (2 * h))
    return np.column_stack(cols)


def max_rel_err(J, ref) -> float:
    """Entrywise ``|J - ref| / max(1, |ref|)``, maximized."""
    J, ref = np.asarray(J), np.asarray(ref)
    return float((np.abs(J - ref) / np.maximum(1.0, np.abs(ref))).max())


def cmd_jacobian(args, out) -> int:
    pf = ProblemFile.load(args.problem)
    sol = _build_implicit(pf)
    x = _parse_point(args.at, pf.n)
    result = {"x": x.tolist()}
    try:
        J = sol.jacobian(x)
        result["Jg"] = J.tolist()
        if args.fd_check:
            fd = fd_jacobian(sol.evaluate, x)
            result["fd_Jg"] = fd.tolist()
            result["max_rel_err"] = max_rel_err(J, fd)
        result["status"] = "OK"
        code = EXIT_OK
    except OutsideDomain:
        result["status"] = "OUTSIDE"
        code = EXIT_OK
    except (BracketFailure, DomainError, SingularFiber) as exc:
        print(str(exc), file=sys.stderr)
        result["status"] = "FAIL"
        code = EXIT_SOLVE
    out.write(json.dumps(result, sort_keys=True) + "\n")
    return code


# -- invert ---------------------------------------------------------------------

def cmd_invert(args, out) -> int:
    pf = ProblemFile.load(args.problem)
    if pf.kind != "inverse":
        raise ProblemFileError("invert needs an inverse problem")
    sol: InverseSolution = build_inverse(pf.inverse_problem())
    n = pf.n
    cols = [f"y{k}" for k in range(1, n + 1)] + [f"G{k}" for k in range(1, n + 1)] + ["forward_residual"]
    if args.roundtrip:
        cols.append("roundtrip_err")
    out.write(",".join(cols + ["status"]) + "\n")
    extra = 2 if args.roundtrip else 1
    code = EXIT_OK
    for y in _requested_points(args, n):
        ys = [fmt(v) for v in y]
        try:
            x = sol.invert_at(y)
            row = ys + [fmt(v) for v in x]
            row.append(fmt(np.abs(sol.problem.forward(x) - y).max()))
            if args.roundtrip:
                again = sol.invert_at(sol.problem.forward(x))
                row.append(fmt(np.abs(again - x).max()))
            out.write(",".join(row + ["OK"]) + "\n")
        except OutsideDomain:
            out.write(",".join(ys + [""] * (n + extra) + ["OUTSIDE"]) + "\n")
        except (BracketFailure, DomainError) as exc:
            print(f"y={y.tolist()}: {exc}", file=sys.stderr)
            out.write(",".join(ys + [""] * (n + extra) + ["FAIL"]) + "\n")
            code = EXIT_SOLVE
    return code


# -- entry point ----------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="implicit-kit", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="probe the hypotheses at the base point; JSON report")
    p.add_argument("problem")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="evaluate g at points; CSV rows")
    p.add_argument("problem")
    p.add_argument("--at", action="append", help="comma-separated x (repeatable)")
    p.add_argument("--grid", help="from:to:steps per axis, axes separated by commas")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("jacobian", help="Jg at a point; JSON")
    p.add_argument("problem")
    p.add_argument("--at", required=True)
    p.add_argument("--fd-check", action="store_true", help="compare with central differences")
    p.set_defaults(func=cmd_jacobian)

    p = sub.add_parser("invert", help="evaluate the local inverse G at points; CSV rows")
    p.add_argument("problem")
    p.add_argument("--at", action="append", help="comma-separated y (repeatable)")
    p.add_argument("--roundtrip", action="store_true", help="also report |G(F(G(y))) - G(y)|")
    p.set_defaults(func=cmd_invert)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except (ProblemFileError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ImplicitKitError as exc:
        print(f"solve failed: {exc}", file=sys.stderr)
        return EXIT_SOLVE


if __name__ == "__main__":
    sys.exit(main())
