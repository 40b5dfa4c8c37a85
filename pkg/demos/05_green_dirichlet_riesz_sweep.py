#!/usr/bin/env python3
"""The subfunction toolkit on a strip: Green function, Dirichlet
problem, Riesz decomposition, sweeping, and the 1-D majorant formula.

Below the critical value the Green function of the strip is nonpositive
and matches the shift series over the sector Green function of its
lift.  Sweeping a field over a subdomain replaces it by its least
majorant there; for y-only data on a strip this reduces to the
two-endpoint sine formula of trigonometric convexity.
"""

import numpy as np

from logtorus import (Disc, Grid, GridMeasure, Strip, TorusSpec,
                      build_domain, dirichlet_lrho, discrete_kernel,
                      green_lrho, is_subfunction, potential, riesz_decompose,
                      sweep)
from logtorus.oracles import strip_green_series

P = np.log(2.0)
spec = TorusSpec(P)
n = 96
grid = Grid(spec, n, n)
alpha, beta = -np.pi / 2, np.pi / 2
mask = build_domain(spec, n, n, Strip(alpha, beta))
rho = 0.5                                  # rho(D) = 1

g = green_lrho(mask, rho, [(0.35, 0.25)])
col = g.columns[0]
print(f"green column at rho = {rho} (critical value 1):")
print(f"  max value {col.values.max():.2e} (nonpositive), "
      f"min {col.values.min():.3f}")
jz, iz = mask.grid.cell_of(0.35, 0.25)
zeta = complex(grid.x_centers()[iz], grid.y_centers()[jz])
X, Y = grid.meshgrid()
dx = np.minimum(np.abs(X - zeta.real), P - np.abs(X - zeta.real))
dy = np.abs(Y - zeta.imag)
far = mask.inside & (np.hypot(dx, dy) > 0.4)
oracle = strip_green_series((X + 1j * Y)[far], zeta, rho, alpha, beta, P)
print(f"  vs sector shift series: max deviation "
      f"{np.max(np.abs(col.values[far] - oracle)):.2e}\n")

q = dirichlet_lrho(mask, 0.6, np.ones(grid.shape))
exact = np.cos(0.6 * Y) / np.cos(0.6 * np.pi / 2)
print("dirichlet problem, data 1 on the strip boundary, rho = 0.6:")
print(f"  max error vs cos profile "
      f"{np.max(np.abs(q.values - exact)[mask.inside]):.2e}\n")

dens = (1.0 + np.cos(Y)) * (1.5 + np.sin(2 * np.pi * X / P))
v = potential(GridMeasure(grid, dens * grid.cell_area),
              discrete_kernel(rho, grid))
qq, pi = riesz_decompose(v, mask, rho)
rec = np.max(np.abs(v.values - qq.values - pi.values)[mask.inside])
print("riesz decomposition of a certified subfunction over the strip:")
print(f"  reconstruction error {rec:.2e}; potential part <= "
      f"{pi.values.max():.2e} (nonpositive)\n")

disc = build_domain(spec, n, n, Disc(0.35, 1.0, 0.3), classify=False)
s1 = sweep(v, disc, rho)
s2 = sweep(s1, disc, rho)
print("sweeping over a disc:")
print(f"  output >= input: {np.all(s1.values >= v.values - 1e-10)}")
print(f"  idempotence error {np.max(np.abs(s2.values - s1.values)):.2e}")
print(f"  output certificate: {is_subfunction(s1, rho).verdict}")
