"""
Local inverse of the polar map (r, theta) -> (r cos theta, r sin theta) near (1, 0).

The inverse G is the implicit function of Phi(y, x) = F(x) - y with the
target y as the independent variable, so every point is a call into the
system solver. Its Jacobian is JF(G(y))^{-1}.
"""

import math

import numpy as np

from implicit_kit import fixtures
from implicit_kit.errors import OutsideDomain
from implicit_kit.inverse_map import build_inverse

sol = build_inverse(fixtures.polar())
print(sol)
for y in ([1.0, 0.0], [0.8, 0.6], [1.2, -0.3]):
    x = sol.invert_at(y)
    exact = (math.hypot(*y), math.atan2(y[1], y[0]))
    print(f"G({y}) = {x}   closed form {exact}")
print(f"JG at (0.8, 0.6):\n{sol.inverse_jacobian([0.8, 0.6])}")
try:
    sol.invert_at([0.0, 0.0])
except OutsideDomain as exc:
    print(f"origin: {exc}")

rng = np.random.default_rng(0)
worst = 0.0
for _ in range(100):
    x = np.array([rng.uniform(0.7, 1.3), rng.uniform(-0.6, 0.6)])
    worst = max(worst, np.abs(sol.invert_at(sol.problem.forward(x)) - x).max())
print(f"max round-trip error |G(F(x)) - x| over 100 points: {worst:.2e}")
