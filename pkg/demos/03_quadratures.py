"""Motional quadratures from red-sideband slopes.

With F1(n) flat the red-sideband slope is <X_phi> = Re(e^{-i phi} <a>).
A single laser at eta = 0.05 is nearly flat; three or four lasers can
flatten F1 to high order.
"""

import numpy as np

from phononprobe import fock, protocols
from phononprobe.dynamics import DriveSet

alpha = np.exp(1j * np.pi / 3)
rho = fock.coherent_state(alpha, 24)
phis = np.linspace(0, 2 * np.pi, 8, endpoint=False)

ld = DriveSet.single("red_sideband", 0.05)
flat = protocols.engineered_flat_sideband([0.1, 0.2, 0.3, 0.4])
print(f"flatness of the engineered F1 over populated levels: "
      f"{protocols.sideband_flatness(rho, flat):.2e}")

print("\nphi      single LD laser   engineered      cos(pi/3 - phi)")
single, eng = [], []
for phi in phis:
    a = protocols.quadrature_measure(rho, phi, ld).value
    b = protocols.quadrature_measure(rho, phi, flat).value
    single.append(a)
    eng.append(b)
    print(f"{phi:6.4f}   {a:+.8f}       {b:+.8f}     {np.cos(np.pi / 3 - phi):+.8f}")

for label, vals in (("single laser", single), ("engineered", eng)):
    amp, theta, resid = protocols.fit_quadrature_sweep(phis, vals)
    print(f"{label:13s}: A = {amp:.7f}, theta = {theta:.6f}, residual {resid:.1e}")

x, p = protocols.position_momentum(rho, flat)
print(f"\n<x>/x0 = {x:.6f} (2 Re alpha = {2 * alpha.real:.6f}), "
      f"<p>/p0 = {p:.6f} (2 Im alpha = {2 * alpha.imag:.6f})")
