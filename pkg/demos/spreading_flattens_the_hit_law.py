"""Where a walker finally sticks on a flat interface, with and without budget.

With no reflection budget the arrival law on the boundary of a half-plane is
the Cauchy kernel of the starting height. A positive Lambda lets the walker
wander along the interface before it commits, so the final-absorption law is
wider and lower at the peak. The two are linked pointwise by the correction
factor eta, which this script checks numerically.
"""

import numpy as np
from scipy import integrate

from prbm import (
    eta,
    harmonic_density_halfspace,
    spread_density_halfspace,
    spread_kernel_t,
)

start = np.array([0.0, 1.0])  # lateral position 0, height 1

print("arrival density on the line, start height 1:")
header = f"{'s':>5} {'Lambda=0':>10}"
lambdas = (0.5, 2.0, 8.0)
for lam in lambdas:
    header += f" {'Lambda=' + str(lam):>11}"
print(header)
for s in (0.0, 0.5, 1.0, 2.0, 4.0):
    row = f"{s:5.1f} {harmonic_density_halfspace(start, s, 2):10.5f}"
    for lam in lambdas:
        row += f" {spread_density_halfspace(start, s, lam):11.5f}"
    print(row)

print("\neach column still carries unit mass:")
for lam in lambdas:
    mass, _ = integrate.quad(
        lambda s: spread_density_halfspace(start, s, lam), -np.inf, np.inf
    )
    print(f"  Lambda = {lam:4.1f}: integral = {mass:.8f}")

print("\nfactorization check: the kernel started ON the interface is the")
print("height-Lambda harmonic density times eta(|s|/Lambda):")
lam = 1.3
for s in (0.2, 1.0, 5.0):
    direct = spread_kernel_t(s, lam, 2)
    via_eta = eta(s / lam, 2) * harmonic_density_halfspace(
        np.array([0.0, lam]), s, 2
    )
    print(f"  s = {s:4.1f}: kernel {direct:.10f}   eta * harmonic {via_eta:.10f}")
