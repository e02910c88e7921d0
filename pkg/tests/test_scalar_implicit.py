import math

import numpy as np
import pytest

from implicit_kit import fixtures
from implicit_kit.errors import (BaseResidualError, BracketFailure, DegenerateBase, DegenerateFiber,
                                 OutsideDomain)
from implicit_kit.exprlang import parse
from implicit_kit.oracle import fiber_scan
from implicit_kit.scalar_implicit import TOL_Y, ScalarProblem, bisect, prepare


@pytest.fixture(scope="module")
def circle():
    return prepare(fixtures.circle())


@pytest.fixture(scope="module")
def weak():
    return prepare(fixtures.weak())


def test_circle_prepare_spec_box():
    sol = prepare(ScalarProblem(parse("x1^2 + y1^2 - 1", 1, 1), [0.0], 1.0, [0.9], 0.9))
    assert sol.sigma == 1
    assert sol.r <= 0.9 and sol.x_half[0] <= 0.9
    lo, hi = sol.y_interval
    for x in np.linspace(-sol.x_half[0], sol.x_half[0], 41)[1:-1]:
        assert x * x + lo * lo - 1 < 0 < x * x + hi * hi - 1


def test_line_needs_no_shrinking():
    sol = prepare(fixtures.line())
    assert sol.sigma == 1
    assert sol.r == 1.0 and sol.x_half.tolist() == [1.0]
    assert sol.diagnostics["halvings_r"] == 0 and sol.diagnostics["halvings_x"] == 0


def test_negative_orientation():
    sol = prepare(ScalarProblem(parse("x1 - y1", 1, 1), [0.0], 0.0, [1.0], 1.0))
    assert sol.sigma == -1
    assert sol.solve_at([0.25]) == pytest.approx(0.25, abs=1e-14)


def test_degenerate_base():
    with pytest.raises(DegenerateBase):
        prepare(ScalarProblem(parse("y1^2", 1, 1), [0.0], 0.0, [1.0], 1.0))


def test_base_residual_checked():
    with pytest.raises(BaseResidualError):
        prepare(ScalarProblem(parse("x1^2 + y1^2 - 1", 1, 1), [0.0], 0.9, [0.5], 0.5))


def test_box_shrinks_when_needed():
    # the y interval [0.1, 1.9] stays valid only for |x| < sqrt(1 - 0.01)
    sol = prepare(ScalarProblem(parse("x1^2 + y1^2 - 1", 1, 1), [0.0], 1.0, [4.0], 0.9))
    assert sol.diagnostics["halvings_x"] > 0
    assert sol.x_half[0] < 1.0


def test_circle_values(circle):
    assert circle.solve_at([0.6]) == pytest.approx(0.8, abs=1e-10)
    assert abs(circle.solve_at([0.0]) - 1.0) <= TOL_Y


def test_weak_base(weak):
    assert weak.solve_at([0.0]) == 0.0


def test_circle_gradient(circle):
    assert circle.grad_at([0.6])[0] == pytest.approx(-0.75, abs=1e-12)
    assert circle.grad_at([0.0])[0] == pytest.approx(0.0, abs=1e-14)


def test_weak_gradient_at_base(weak):
    assert weak.grad_at([0.0])[0] == 1.0


def test_outside_domain(circle):
    with pytest.raises(OutsideDomain):
        circle.solve_at([0.99])
    with pytest.raises(OutsideDomain):
        circle.solve_at([circle.x_half[0]])


def test_orientation_invariant(circle, weak):
    for sol in (circle, weak):
        lo, hi = sol.y_interval
        for x in np.linspace(-sol.x_half[0], sol.x_half[0], 101)[1:-1]:
            assert sol.sigma * sol.problem.fiber([x], lo) < 0 < sol.sigma * sol.problem.fiber([x], hi)


def test_residual_and_unique_root(circle, weak):
    for sol in (circle, weak):
        lo, hi = sol.y_interval
        for x in np.linspace(-0.9, 0.9, 19) * sol.x_half[0]:
            y = sol.solve_at([x])
            assert abs(sol.problem.fiber([x], y)) <= 1e-12
            intervals = fiber_scan(sol.problem.F, [x], lo, hi, 2001)
            assert len(intervals) == 1
            assert intervals[0][0] <= y <= intervals[0][1]


def test_grad_matches_central_differences(circle, weak):
    h = 1e-6
    for sol, xs in ((circle, np.linspace(-0.85, 0.85, 35)), (weak, [-0.25, -0.1, 0.1, 0.25])):
        for x in xs:
            g = sol.grad_at([x])[0]
            fd = (sol.solve_at([x + h]) - sol.solve_at([x - h])) / (2 * h)
            assert abs(g - fd) <= 1e-5 * max(1.0, abs(g))


def test_two_independents():
    F = parse("y1^3 + y1 - x1 - 2*x2", 2, 1)
    sol = prepare(ScalarProblem(F, [0.0, 0.0], 0.0, [0.5, 0.5], 2.0))
    y = sol.solve_at([0.3, 0.1])
    assert abs(F([0.3, 0.1, y])) <= 1e-12
    d = 3 * y * y + 1
    np.testing.assert_allclose(sol.grad_at([0.3, 0.1]), [1 / d, 2 / d], rtol=1e-10)


def test_degenerate_fiber_in_grad():
    # y^3 = x: the fiber derivative vanishes at x = 0, but the base is elsewhere
    F = parse("y1^3 - x1", 1, 1)
    sol = prepare(ScalarProblem(F, [1.0], 1.0, [1.2], 2.0))
    assert sol.contains([0.0])
    with pytest.raises(DegenerateFiber):
        sol.grad_at([0.0])


def test_callable_problem():
    p = ScalarProblem(lambda x, y: y - math.sin(x[0]), [0.0], 0.0, [1.0], 1.5, dFdy_base=1.0)
    sol = prepare(p)
    assert sol.solve_at([0.5]) == pytest.approx(math.sin(0.5), abs=1e-14)
    with pytest.raises(ValueError):
        ScalarProblem(lambda x, y: y, [0.0], 0.0, [1.0], 1.0)


def test_bisect_requires_bracket():
    with pytest.raises(BracketFailure):
        bisect(lambda t: t * t + 1, -1.0, 1.0)
    y, fy, its = bisect(lambda t: t - 0.3, 0.0, 1.0)
    assert abs(y - 0.3) <= 1e-14 and its <= 60


def test_bisect_exact_midpoint_zero():
    y, fy, its = bisect(lambda t: t, -1.0, 1.0)
    assert y == 0.0 and fy == 0.0 and its == 1
