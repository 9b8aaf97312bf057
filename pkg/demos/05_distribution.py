"""From moments to the phonon distribution on a bounded support.

Moments <n^0> ... <n^K> fix p(0) ... p(K) for a state living on {0..K}.
The Vandermonde system conditioning grows fast, so K is kept small.
"""

import numpy as np

from phononprobe import fock, reconstruction

rho = fock.coherent_state(1.0, 7)
moments = [fock.number_moment(rho, p) for p in range(7)]
est = reconstruction.moments_to_distribution(moments)
print("n   true p(n)     recovered")
for n, (t, r) in enumerate(zip(rho.populations, est.probs)):
    print(f"{n}   {t:.10f}  {r:.10f}")
print(f"condition number {est.condition_number:.3e}, negativity {est.negativity:.1e}")

print("\nconditioning by support size:")
for k in (2, 4, 6, 8, 10, 12):
    print(f"  K = {k:2d}: cond = {np.linalg.cond(reconstruction.moment_matrix(k)):.2e}")
