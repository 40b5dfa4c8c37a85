#!/usr/bin/env python3
"""Maximal subminorants of obstacles and the lambda characteristic.

The largest subfunction below an obstacle solves the complementarity
problem v <= m, residual >= 0, residual = 0 off the contact set.
Existence is governed by lambda(E+) = 1/rho(E+) of the positivity set:
above the critical exponent of a supporting component a nonzero
minorant exists; a positivity set that is not connected on spirals
supports none.
"""

import numpy as np

from logtorus import (Grid, GridField, Strip, TorusSpec, existence_test,
                      integral_condition, lambda_value, maximal_subminorant,
                      minimality_test)

P = np.log(2.0)
grid = Grid(TorusSpec(P), 96, 96)
X, Y = grid.meshgrid()

prof = np.where(np.abs(Y) < np.pi / 4, np.cos(2 * Y) ** 2, 0.0)
m = GridField(grid, prof * (1.0 + 0.2 * np.cos(2 * np.pi * X / P)))

print("obstacle: bump over the strip |y| < pi/4 (rho of the strip = 2)\n")
lam = lambda_value(m.values > 0, grid=grid)
print(f"lambda of the positivity set: {lam.value:.4f} "
      f"(inner {lam.inner:.4f}, outer {lam.outer:.4f})\n")

for rho in (1.0, 2.0, 3.0):
    ex = existence_test(m, rho)
    print(f"rho = {rho}: existence verdict '{ex.verdict}'")
print()

res = maximal_subminorant(m, rho=3.0)
print(f"maximal subminorant at rho = 3: status {res.status}, "
      f"{res.iterations} active-set steps")
print(f"  max v = {res.minorant.values.max():.4f}, contact cells "
      f"{int(res.contact.sum())}")
print(f"  complementarity residual {res.complementarity_residual:.1e}\n")

band = np.where((X > P / 4) & (X < 3 * P / 4),
                np.sin(np.pi * (X - P / 4) / (P / 2)) ** 2, 0.0)
res_band = maximal_subminorant(GridField(grid, band), rho=2.0)
print(f"band-supported obstacle: status {res_band.status} "
      f"(no spiral-connected support)\n")

neg = GridField(grid, -np.ones(grid.shape))
ic = integral_condition(neg)
print(f"obstacle m = -1: slice integrals all {ic.min_integral:.4f} < 0, "
      f"refuted = {ic.refuted}\n")

zero = GridField(grid, np.zeros(grid.shape))
rep = minimality_test(zero, rho=3.0, witnesses=[Strip(-np.pi / 4, np.pi / 4)])
print(f"v = 0 at rho = 3: {rep.verdict} "
      f"(witness rho = {rep.details['witness']['rho']:.4f} < 3)")
one = GridField(grid, np.ones(grid.shape))
print(f"v = 1 at rho = 2: {minimality_test(one, 2.0).verdict}")
