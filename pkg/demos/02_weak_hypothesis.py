"""
F(x, y) = y + w(y)/2 - x with w(t) = t^2 sin(1/t), w(0) = 0.

dF/dy = 1 + w'(y)/2 never vanishes near 0 but jumps around between 1/2 and
3/2 on every neighbourhood of y = 0: it is not continuous there. The
continuity probe sees this (its modulus table plateaus near 1/2), yet the
bracketing construction needs only a nonvanishing fiber derivative and still
produces g with F(x, g(x)) = 0.
"""

import numpy as np

from implicit_kit import fixtures
from implicit_kit.probes import continuity_verdict, probe_continuity
from implicit_kit.scalar_implicit import prepare

p = fixtures.weak()
table = probe_continuity([p.F], [0.0, 0.0], [1e-5, 1e-4, 1e-3, 1e-2, 1e-1], samples=1000, seed=0)
print("sampled modulus of continuity of dF/dy at the origin:")
for rho, mod in table:
    print(f"  rho = {rho:7.0e}   sup |dF/dy - 1| = {mod:.6f}")
print(f"continuity verdict: {continuity_verdict(table)}")
print()

sol = prepare(p)
worst = 0.0
for x in np.linspace(-0.2, 0.2, 101):
    worst = max(worst, abs(p.fiber([x], sol.solve_at([x]))))
print(f"max |F(x, g(x))| over 101 points in [-0.2, 0.2]: {worst:.2e}")
print(f"g'(0) = {sol.grad_at([0.0])[0]}  (w'(0) = 0, so the quotient gives 1)")
