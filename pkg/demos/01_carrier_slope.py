"""Reading <f0(n; eta)> off the first instant of a carrier pulse.

Prepare the ion in (|g> + e^{i phi}|e>)/sqrt(2), switch on a resonant
carrier and watch the excited population.  Its slope at tau = 0 is
-sin(phi) <f0(n; eta)>, whatever the motional state.
"""

import numpy as np

from phononprobe import couplings, dynamics, fock
from phononprobe.dynamics import DriveSet

d = 20
eta = 0.3
rho_f = fock.thermal_state(0.8, d)
drives = DriveSet.single("carrier", eta)
h = dynamics.build_carrier(drives, d)

mean_f0 = float(np.dot(rho_f.populations, couplings.f0_diag(eta, d).values))
print(f"thermal nbar = 0.8, eta = {eta}: <f0> = {mean_f0:.10f}")

print("\nphi      analytic slope   finite difference   slope / sin(phi)")
for phi in (np.pi / 6, np.pi / 4, np.pi / 2, 3 * np.pi / 4):
    probe = fock.ProbeState(+1, phi)
    rho0 = fock.hybrid_product(probe, rho_f)
    a = dynamics.analytic_slope(probe, rho_f, drives)
    fd = dynamics.finite_difference_slope(h, rho0, 1e-4)
    print(f"{phi:6.4f}   {a:+.10f}    {fd:+.10f}       {a / np.sin(phi):+.10f}")

print("\nThe contrast is tuned by phi; the ratio stays -<f0>.  The carrier never")
print("changes phonon populations, so the whole P_e(tau) curve is available:")
probe = fock.ProbeState(+1, np.pi / 2)
rho0 = fock.hybrid_product(probe, rho_f)
for tau in (0.0, 0.05, 0.1, 0.5, 1.0):
    print(f"  tau = {tau:4.2f}: P_e = {fock.excited_population(dynamics.evolve(h, rho0, tau)):.6f}")
