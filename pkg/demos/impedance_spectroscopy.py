"""One impedance curve computed three unrelated ways.

A grounded circle of radius R feeds walkers toward a semi-permeable unit
circle. Because the source is rotation invariant only the flat boundary mode
is driven, and the interface impedance collapses to Z_sp = Lambda/(2 pi D)
exactly, for every R. That makes the annulus a sharp cross-check: the exact
eigenmode series, and both impedance routes on a rasterized lattice, must
all land on the same straight line in Lambda.
"""

import math

import numpy as np

from prbm import (
    annulus_spectrum,
    build_M,
    build_Q,
    circle_polyline,
    hitting_distribution,
    impedance_curve,
    impedance_from_spectrum,
    rasterize,
    spectrum,
)

R = 2.0
D = 1.0
grid = np.geomspace(0.01, 100.0, 7)

spec = annulus_spectrum(R, 64)
weights = np.zeros_like(spec.mu)
weights[0] = 1.0 / (2.0 * math.pi)  # uniform unit source drives mode 0 only
z_cell0 = math.log(R) / (2.0 * math.pi * D)

print("exact series:   Z_sp * 2 pi D / Lambda  (should be 1.0)")
for lam in grid:
    z = impedance_from_spectrum(spec.mu, weights, lam, D, z_cell0=z_cell0)
    print(f"  Lambda = {lam:8.2f}: {z['Z_sp'] * 2.0 * math.pi * D / lam:.12f}")

print("\nlattice at mesh 1/32, working circle r=1, source circle R=2:")
dom = rasterize(circle_polyline(1.0, 512), circle_polyline(R, 1024), 1.0 / 32.0)
qm = build_Q(dom)
dspec = spectrum(build_M(qm), hitting_distribution(dom).density, qm.measure, qm.weight)
rows = impedance_curve(dspec, grid, D=D)
print(f"  {'Lambda':>8} {'spectral route':>14} {'difference route':>16} {'exact':>9}")
for row in rows:
    print(f"  {row['Lambda']:8.2f} {row['Z_sp']:14.6f} {row['Z_sp_diff']:16.6f} "
          f"{row['Lambda'] / (2.0 * math.pi * D):9.6f}")
print("the two lattice routes agree to solver precision; their offset from")
print("the exact line is pure discretization error at this mesh")
