"""Reference problems with known solutions, used by the tests and the demos."""

from __future__ import annotations

import math

import numpy as np

from .exprlang import parse
from .inverse_map import InverseProblem
from .scalar_implicit import ScalarProblem
from .system_implicit import ImplicitProblem

# -- scalar ------------------------------------------------------------------

def circle() -> ScalarProblem:
    """x^2 + y^2 = 1 around (0, 1); g(x) = sqrt(1 - x^2)."""
    return ScalarProblem(parse("x1^2 + y1^2 - 1", 1, 1), [0.0], 1.0, [0.95], 0.9)


def weak() -> ScalarProblem:
    """y + w(y)/2 = x around (0, 0). dF/dy = 1 + w'(y)/2 never vanishes near 0
    but is discontinuous there."""
    return ScalarProblem(parse("y1 + w(y1)/2 - x1", 1, 1), [0.0], 0.0, [0.3], 0.4)


def line() -> ScalarProblem:
    return ScalarProblem(parse("y1 - x1", 1, 1), [0.0], 0.0, [1.0], 1.0)


def circle_exact(x):
    return math.sqrt(1.0 - x * x)


# -- systems -----------------------------------------------------------------

def circle_system() -> ImplicitProblem:
    return ImplicitProblem.from_strings(["x1^2 + y1^2 - 1"], [0.0], [1.0], [0.9], [0.9])


def weak_system() -> ImplicitProblem:
    return ImplicitProblem.from_strings(["y1 + w(y1)/2 - x1"], [0.0], [0.0], [0.3], [0.4])


def linear() -> ImplicitProblem:
    """y1 + y2 = x, y1 - y2 = x^3; g(x) = ((x + x^3)/2, (x - x^3)/2)."""
    return ImplicitProblem.from_strings(["y1 + y2 - x1", "y1 - y2 - x1^3"],
                                        [0.0], [0.0, 0.0], [1.2], [2.0, 2.0])


def linear_exact(x):
    return np.array([(x + x ** 3) / 2, (x - x ** 3) / 2])


def linear_exact_jacobian(x):
    return np.array([[(1 + 3 * x ** 2) / 2], [(1 - 3 * x ** 2) / 2]])


def coupled() -> ImplicitProblem:
    """y1^2 + y2 = x, y1 + y2^2 = x around x = 2, y = (1, 1)."""
    return ImplicitProblem.from_strings(["y1^2 + y2 - x1", "y1 + y2^2 - x1"],
                                        [2.0], [1.0, 1.0], [0.15], [0.3, 0.3])


def mixed() -> ImplicitProblem:
    """Two independents, two dependents, transcendental coupling."""
    return ImplicitProblem.from_strings(
        ["y1 + 0.3*sin(y2) - x1 - 0.2*x2^2", "y2 + 0.2*exp(y1) - 0.2 - x2 + 0.1*x1*y1"],
        [0.0, 0.0], [0.0, 0.0], [0.2, 0.2], [0.5, 0.5])


SYSTEMS = {
    "circle": circle_system,
    "weak": weak_system,
    "linear": linear,
    "coupled": coupled,
    "mixed": mixed,
}

SMOOTH_SYSTEMS = ("circle", "linear", "coupled", "mixed")


# -- inverse maps ------------------------------------------------------------

def polar() -> InverseProblem:
    """(r, theta) -> (r cos theta, r sin theta) around (1, 0)."""
    return InverseProblem.from_strings(["x1*cos(x2)", "x1*sin(x2)"], [1.0, 0.0], [2.5, 1.0], [0.5, 0.85])


AFFINE_A = np.array([[2.0, 1.0], [1.0, 3.0]])
AFFINE_C = np.array([1.0, -1.0])


def affine() -> InverseProblem:
    return InverseProblem.from_strings(["2*x1 + x2 + 1", "x1 + 3*x2 - 1"], [0.0, 0.0], [2.0, 2.0], [1.0, 1.0])


# -- problem files -----------------------------------------------------------

PROBLEM_FILES = {
    "circle": {
        "kind": "implicit", "n": 1, "m": 1, "F": ["x1^2 + y1^2 - 1"],
        "base_x": [0.0], "base_y": [1.0], "box": {"x": [0.9], "y": [0.9]}, "seed": 7,
    },
    "weak": {
        "kind": "implicit", "n": 1, "m": 1, "F": ["y1 + w(y1)/2 - x1"],
        "base_x": [0.0], "base_y": [0.0], "box": {"x": [0.3], "y": [0.4]}, "seed": 7,
    },
    "linear": {
        "kind": "implicit", "n": 1, "m": 2, "F": ["y1 + y2 - x1", "y1 - y2 - x1^3"],
        "base_x": [0.0], "base_y": [0.0, 0.0], "box": {"x": [1.2], "y": [2.0, 2.0]}, "seed": 7,
    },
    "coupled": {
        "kind": "implicit", "n": 1, "m": 2, "F": ["y1^2 + y2 - x1", "y1 + y2^2 - x1"],
        "base_x": [2.0], "base_y": [1.0, 1.0], "box": {"x": [0.15], "y": [0.3, 0.3]}, "seed": 7,
    },
    "singular": {
        "kind": "implicit", "n": 1, "m": 1, "F": ["y1^2"],
        "base_x": [0.0], "base_y": [0.0], "box": {"x": [1.0], "y": [1.0]}, "seed": 7,
    },
    "polar": {
        "kind": "inverse", "n": 2, "m": 2, "F": ["x1*cos(x2)", "x1*sin(x2)"],
        "base_x": [1.0, 0.0], "box": {"x": [2.5, 1.0], "y": [0.5, 0.85]}, "seed": 7,
    },
}
