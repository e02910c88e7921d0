"""
Implicit and inverse functions evaluated the way the classical existence
proofs build them: bracketing and bisection, one dependent variable at a
time.

>>> from implicit_kit import ImplicitProblem, build
>>> p = ImplicitProblem.from_strings(["x1^2 + y1^2 - 1"], [0.0], [1.0], [0.9], [0.9])
>>> g = build(p)
>>> round(float(g.evaluate([0.6])[0]), 12)
0.8
"""

from .errors import (BaseResidualError, BracketFailure, DegenerateBase, DegenerateFiber, DomainError,
                     ImplicitKitError, NoConvergence, OutsideDomain, ParseError, RadiusCollapse,
                     SingularBase, SingularFiber, SingularMatrixError, UndeclaredVariable)
from .exprlang import Expr, eval_dual, evaluate, gradient, jacobian, parse, parse_system
from .inverse_map import InverseProblem, InverseSolution, build_inverse
from .oracle import fiber_scan, newton_solve
from .probes import (ProbeReport, probe_continuity, probe_differentiability,
                     probe_injectivity_radius)
from .scalar_implicit import ScalarProblem, ScalarSolution, prepare
from .system_implicit import ImplicitProblem, ImplicitSolution, build

__version__ = "0.1.0"

__all__ = [
    "Expr", "parse", "parse_system", "evaluate", "eval_dual", "gradient", "jacobian",
    "ScalarProblem", "ScalarSolution", "prepare",
    "ImplicitProblem", "ImplicitSolution", "build",
    "InverseProblem", "InverseSolution", "build_inverse",
    "newton_solve", "fiber_scan",
    "ProbeReport", "probe_injectivity_radius", "probe_continuity", "probe_differentiability",
    "ImplicitKitError", "ParseError", "UndeclaredVariable", "DomainError", "SingularMatrixError",
    "BaseResidualError", "DegenerateBase", "BracketFailure", "OutsideDomain", "DegenerateFiber",
    "SingularBase", "SingularFiber", "RadiusCollapse", "NoConvergence",
]
