"""
The unit circle x^2 + y^2 = 1 near its top point (0, 1).

The fiber F(x, .) is oriented by the sign of dF/dy(0, 1) = 2, a box is shrunk
until the fiber is negative at the bottom of the y interval and positive at
the top, and g(x) is found by bisection. The gradient comes from the quotient
-dF/dx / dF/dy at (x, g(x)).
"""

import math

import numpy as np

from implicit_kit import fixtures
from implicit_kit.scalar_implicit import prepare

sol = prepare(fixtures.circle())
lo, hi = sol.y_interval
print(f"orientation sigma = {sol.sigma}")
print(f"validated box: |x| < {sol.x_half[0]}, y in [{lo}, {hi}]")
print(f"halvings: {sol.diagnostics}")
print()
print(f"{'x':>6} {'g(x)':>20} {'sqrt(1-x^2)':>20} {'grad':>12}")
for x in np.linspace(-0.9, 0.9, 7):
    g = sol.solve_at([x])
    print(f"{x:6.2f} {g:20.16f} {math.sqrt(1 - x * x):20.16f} {sol.grad_at([x])[0]:12.8f}")
