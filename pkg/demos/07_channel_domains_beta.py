#!/usr/bin/env python3
"""Channel domains: minimal growth is not the only growth.

The upper half plane with the horizontal rays Im Z = 2^n, Re Z < 0
deleted is homogeneous under doubling; on the torus (P = log 2) it
becomes the strip 0 < y < pi minus a single slit curve that spirals
toward y = pi.  Harmonic-measure ratios with far targets in the open
part converge to the minimal-growth function; ratios with targets deep
inside one channel produce positive harmonic functions of much faster
growth.  The growth-against-measure functional separates the two: it
stays bounded on the first and diverges on the second.

At fixed resolution only the first few turns of the slit are resolved
(the accumulation at y = pi is not representable on a grid); the flags
below are qualitative, not asserted.
"""

import numpy as np

from logtorus import Grid, TorusSpec, mask_from_inside
from logtorus.martin import beta_functional, martin_function
from logtorus.operators import harmonic_measure_field, lift_window

P = np.log(2.0)
n = 128
grid = Grid(TorusSpec(P), n, n)

# rasterize the slit: the torus image of one deleted ray Im Z = 1, Re Z < 0
inside = np.zeros(grid.shape, dtype=bool)
X, Y = grid.meshgrid()
inside[(Y > 0.02) & (Y < np.pi - 0.02)] = True
ts = -np.exp(np.linspace(np.log(1e-3), np.log(200.0), 40000))
xs = 0.5 * np.log(ts * ts + 1.0)
ys = np.arctan2(1.0, ts)
for x, y in zip(xs, ys):
    j, i = grid.cell_of(x, y)
    inside[j, i] = False
mask = mask_from_inside(grid, inside, classify=True)
sc = mask.spiral_of(0)
print(f"slit strip domain: {mask.n_components} component(s), "
      f"main component {sc.kind} (k={sc.k}, conclusive={sc.conclusive})\n")

z0 = (0.3, np.pi / 2)
H = martin_function(mask, 0, z0=z0, n=5)
print(f"minimal-growth candidate from far targets: window converged = "
      f"{H.converged} (max relative change {H.meta['max_rel_change']:.1%})")
rep = beta_functional(H.window, H.values, z0, range(2, 5))
print(f"  growth-against-measure sequence: "
      f"{[f'{s:.3g}' for s in rep['sequence']]}")
print(f"  diverging: {rep['diverging']}\n")

# a channel-limit function: ratio with targets deep inside the channel
# between the first slit turn and the top edge -- deeper than every
# crosscut the functional samples, so the channel growth shows up
win = lift_window(mask, 0, -5, 5, anchor=z0)
Xw, Yw = win.meshgrid()
channel = win.inside & (Xw > 2.5 * P) & (Xw < 3.5 * P) & \
    (Yw > np.pi - 0.35) & (Yw < np.pi - 0.04)
if channel.any():
    om = harmonic_measure_field(win, channel)
    j0, i0 = win.cell_of(*z0)
    u = np.where(win.inside, om.values / max(om.values[j0, i0], 1e-300), 0.0)
    rep2 = beta_functional(win, u, z0, range(1, 4))
    print("channel-limit candidate (targets between slit turns):")
    print(f"  growth-against-measure sequence: "
          f"{[f'{s:.3g}' for s in rep2['sequence']]}")
    print(f"  diverging: {rep2['diverging']}")
    print("\nbounded vs diverging is the numerical footprint of the gap")
    print("between minimal-growth functions and the full positive cone.")
else:
    print("channel not resolved at this grid; refine to see the effect")
