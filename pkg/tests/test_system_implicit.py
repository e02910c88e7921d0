import numpy as np
import pytest

from implicit_kit import densela, fixtures
from implicit_kit.errors import BaseResidualError, BracketFailure, OutsideDomain, SingularBase
from implicit_kit.oracle import first_order_guess, newton_solve
from implicit_kit.system_implicit import ImplicitProblem, _solve_level, augmented_jacobian, build, normalize

from reference_values import COUPLED_JG_2, COUPLED_ROOT_2_2


@pytest.fixture(scope="module")
def solutions():
    return {name: build(make()) for name, make in fixtures.SYSTEMS.items()}


def interior(sol, count, seed, frac=0.95):
    rng = np.random.default_rng(seed)
    return sol.problem.a + frac * sol.x_half * rng.uniform(-1, 1, (count, sol.problem.n))


def test_normalization_linear():
    norm = normalize(fixtures.linear())
    np.testing.assert_array_equal(norm.M, [[1, 1], [1, -1]])
    assert norm.det == pytest.approx(-2.0, rel=1e-15)
    np.testing.assert_allclose(norm.base_jacobian, np.eye(2), atol=1e-10)


def test_normalization_identity_when_already_normal():
    p = ImplicitProblem.from_strings(["y1 - x1^2", "y2 + sin(x1)"], [0.0], [0.0, 0.0], [0.5], [1.0, 1.0])
    norm = normalize(p)
    np.testing.assert_array_equal(norm.M, np.eye(2))
    x, z = np.array([0.3]), np.array([0.2, -0.1])
    np.testing.assert_array_equal(norm.G(x, z), p.residual(x, z))


def test_normalization_singular():
    p = ImplicitProblem.from_strings(["y1 + y2", "2*y1 + 2*y2"], [0.0], [0.0, 0.0], [1.0], [1.0, 1.0])
    with pytest.raises(SingularBase) as info:
        normalize(p)
    assert info.value.det == 0.0


@pytest.mark.parametrize("name", list(fixtures.SYSTEMS))
def test_normalized_base_jacobian_is_identity(solutions, name):
    np.testing.assert_allclose(solutions[name].normalization.base_jacobian,
                               np.eye(solutions[name].problem.m), atol=1e-10)


def test_base_residual_rejected():
    p = ImplicitProblem.from_strings(["y1 + y2 - x1 - 1", "y1 - y2"], [0.0], [0.0, 0.0], [1.0], [1.0, 1.0])
    with pytest.raises(BaseResidualError):
        build(p)


def test_coupled_base_data():
    p = fixtures.coupled()
    assert np.abs(p.residual(p.a, p.b)).max() == 0.0
    assert densela.det(p.blocks(p.a, p.b)[2]) == pytest.approx(3.0, rel=1e-15)


def test_scalar_case_delegates():
    sol = build(fixtures.circle_system())
    assert len(sol.nodes) == 1
    assert sol.evaluate([0.6])[0] == pytest.approx(0.8, abs=1e-10)


@pytest.mark.parametrize("name", list(fixtures.SYSTEMS))
def test_base_point_reproduced(solutions, name):
    sol = solutions[name]
    p = sol.problem
    assert np.abs(sol.evaluate(p.a) - p.b).max() <= p.m * p.tol_y * max(1.0, np.abs(p.b).max())
    assert max(sol.base_check()) <= 10 * p.tol_y


def test_linear_values(solutions):
    sol = solutions["linear"]
    np.testing.assert_allclose(sol.evaluate([1.0]), [1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(sol.jacobian([1.0]), [[2.0], [-1.0]], atol=1e-12)


def test_coupled_values(solutions):
    sol = solutions["coupled"]
    np.testing.assert_allclose(sol.evaluate([2.0]), [1.0, 1.0], atol=1e-13)
    np.testing.assert_allclose(sol.jacobian([2.0])[:, 0], COUPLED_JG_2, atol=1e-12)
    np.testing.assert_allclose(sol.evaluate([2.1]), newton_solve(sol.problem.F, [2.1], [1.0, 1.0]), atol=1e-12)


def test_coupled_matches_frozen_root():
    p = ImplicitProblem.from_strings(["y1^2 + y2 - x1", "y1 + y2^2 - x1"], [2.0], [1.0, 1.0], [0.5], [0.8, 0.8])
    sol = build(p)
    assert sol.contains([2.2])
    np.testing.assert_allclose(sol.evaluate([2.2]), COUPLED_ROOT_2_2, atol=1e-12)


def test_circle_jacobian_is_quotient(solutions):
    sol = solutions["circle"]
    for x in (-0.7, -0.2, 0.0, 0.5):
        y = sol.evaluate([x])[0]
        assert sol.jacobian([x])[0, 0] == pytest.approx(-x / y, abs=1e-12)


def test_check_unique(solutions):
    sol = solutions["linear"]
    assert sol.check_unique([1.0], [1.0, 0.0])
    assert not sol.check_unique([1.0], [0.0, 1.0])
    assert sol.check_unique(sol.problem.a, sol.problem.b)


def test_outside_domain(solutions):
    sol = solutions["coupled"]
    with pytest.raises(OutsideDomain):
        sol.evaluate([2.0 + 1.01 * sol.x_half[0]])
    with pytest.raises(ValueError):
        sol.evaluate([2.0, 2.0])


def test_residual_small_inside(solutions):
    for name, sol in solutions.items():
        for x in interior(sol, 15, 1):
            y = sol.evaluate(x)
            assert np.abs(sol.problem.residual(x, y)).max() <= 1e-10, name


@pytest.mark.parametrize("name", ["linear", "coupled", "mixed"])
def test_elimination_orders_agree(solutions, name):
    p = fixtures.SYSTEMS[name]()
    other = build(p, order=list(reversed(solutions[name].order)))
    assert other.order != solutions[name].order
    for x in interior(solutions[name], 10, 2, frac=0.5):
        if other.contains(x):
            np.testing.assert_allclose(other.evaluate(x), solutions[name].evaluate(x), atol=1e-9)


@pytest.mark.parametrize("name", ["linear", "coupled", "mixed"])
def test_agrees_with_newton(solutions, name):
    sol = solutions[name]
    p = sol.problem
    for x in interior(sol, 10, 3):
        y_newton = newton_solve(p.F, x, first_order_guess(p.F, p.a, p.b, x))
        np.testing.assert_allclose(sol.evaluate(x), y_newton, atol=1e-9)


@pytest.mark.parametrize("name", list(fixtures.SMOOTH_SYSTEMS))
def test_jacobian_matches_central_differences(solutions, name):
    sol = solutions[name]
    for x in interior(sol, 6, 4, frac=0.8):
        J = sol.jacobian(x)
        for k in range(sol.problem.n):
            h = 1e-6 * max(1.0, abs(x[k]))
            up, down = x.copy(), x.copy()
            up[k] += h
            down[k] -= h
            fd = (sol.evaluate(up) - sol.evaluate(down)) / (2 * h)
            assert np.all(np.abs(J[:, k] - fd) <= 1e-5 * np.maximum(1.0, np.abs(J[:, k])))


def test_augmented_determinant_identity(solutions):
    rng = np.random.default_rng(5)
    for name, sol in solutions.items():
        p = sol.problem
        for _ in range(50):
            x = p.a + sol.x_half * rng.uniform(-1, 1, p.n)
            y = sol.normalization.to_y(p.b + sol.z_half * rng.uniform(-1, 1, p.m))
            d_phi = densela.det(augmented_jacobian(p, x, y))
            d_fy = densela.det(p.blocks(x, y)[2])
            assert abs(d_phi - d_fy) <= 1e-12 * max(1.0, abs(d_fy)), name


def test_bracket_failure_reports_level():
    p = ImplicitProblem.from_strings(["y1 - x1", "y2 - x1^2"], [0.0], [0.0, 0.0], [0.5], [0.5, 0.5])
    sol = build(p)
    # at x = 0 the second level's root is 0, outside [0.1, 0.4]
    with pytest.raises(BracketFailure) as info:
        _solve_level(sol, 1, np.array([0.0]), np.zeros(2), 0.1, 0.4)
    assert info.value.level == 2
    assert str(info.value).startswith("level 2:")


def test_solution_repr_mentions_order(solutions):
    assert "order=" in repr(solutions["coupled"])
