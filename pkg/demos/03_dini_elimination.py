"""
Two equations, two unknowns: y1^2 + y2 = x, y1 + y2^2 = x around x = 2, y = (1, 1).

The system is first normalized so its y-Jacobian at the base is the identity,
then one equation is solved for one variable (a scalar problem whose
independents are x and the remaining variable), the solution is substituted
into the other equation, and the reduced scalar problem is solved in turn.
Both elimination orders define the same g; Newton's method, which the
construction never uses, is the independent check.
"""

import numpy as np

from implicit_kit import fixtures
from implicit_kit.oracle import first_order_guess, newton_solve
from implicit_kit.system_implicit import build

p = fixtures.coupled()
sol = build(p)
other = build(p, order=list(reversed(sol.order)))
print(sol)
print(other)
for node in sol.nodes:
    print(f"  level {node.level + 1}: equation {node.eq + 1} solved for variable {node.var + 1}, "
          f"free variables {[v + 1 for v in node.rest]}")
print()
print(f"Jg(2) = {sol.jacobian([2.0])[:, 0]}  (by hand: 1/3, 1/3)")
print()
print(f"{'x':>6} {'g1':>19} {'g2':>19} {'|order gap|':>12} {'|newton gap|':>12}")
for x in np.linspace(2 - 0.12, 2 + 0.12, 7):
    y = sol.evaluate([x])
    y_other = other.evaluate([x])
    y_newton = newton_solve(p.F, [x], first_order_guess(p.F, p.a, p.b, [x]))
    print(f"{x:6.3f} {y[0]:19.16f} {y[1]:19.16f} {np.abs(y - y_other).max():12.1e} "
          f"{np.abs(y - y_newton).max():12.1e}")
