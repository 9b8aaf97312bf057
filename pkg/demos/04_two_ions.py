"""Collective readout in a two-ion chain.

A carrier drives both ions; only ion 1 is prepared in the probe state and
read out.  Its initial slope gives <f0(n1; eta1) f0(n2; eta2)> and does not
depend on what the other ion is doing.
"""

import numpy as np

from phononprobe import fock, multi_ion

cfg = multi_ion.ChainConfig(2, [6, 6], [0.3, 0.5], mode_frequencies=[1.0, 1.73])
rho_f = multi_ion.product_modes(fock.fock_state(1, 6), fock.thermal_state(0.2, 6))
probe = fock.ProbeState(+1, np.pi / 2)
h = multi_ion.build_chain_carrier(cfg)
print(f"chain Hilbert space dimension: {cfg.total_dim}")

print("\nstate of ion 0          simulated slope of ion 1")
for label, rho_a in (("|g><g|", np.diag([1.0, 0.0])), ("|e><e|", np.diag([0.0, 1.0])),
                     ("maximally mixed", np.eye(2) / 2),
                     ("random", fock.random_state(2, rng=5).matrix)):
    s = multi_ion.simulated_collective_slope(cfg, 1, probe, rho_a, rho_f, h=h)
    print(f"{label:22s}  {s:+.10f}")
print(f"analytic -<F0>:         {multi_ion.collective_slope(cfg, 1, probe, np.eye(2) / 2, rho_f):+.10f}")
