"""Compressive line spectral estimation with and without a band prior.

Three unit-magnitude sinusoids at 0.22, 0.23 and 0.28 are observed at 16
of 64 samples.  0.22 and 0.23 are closer than 1/N, and for many sample
sets, including this one, the plain atomic norm does not resolve them.
Knowing that every frequency lies in [0.2, 0.3] shrinks the atomic set
enough that the band-limited norm completes the signal exactly.  The
frequencies are then read off in two ways: by decomposing the solved
Toeplitz matrix on the band, and from the unit-modulus points of the dual
polynomial.

Writes the dual polynomial samples to dual_polynomial.csv in the working
directory.
"""

import time
from pathlib import Path

import numpy as np

from fsvd import LSEProblem, fs_anm_complete
from fsvd.spectral import dual_polynomial, max_frequency_error, random_lse_problem, root_finding_retrieval, write_dual_csv

SEED = 1
prob, f_true, s_true = random_lse_problem(SEED)
print(f"seed {SEED}: N = {prob.n}, observed samples {prob.omega.tolist()}")
print(f"true frequencies {f_true.tolist()}, band {prob.bands.to_json()['bands']}")

start = time.perf_counter()
plain = fs_anm_complete(LSEProblem(prob.n, prob.omega, prob.y_obs, None))
print(f"\nno prior ({time.perf_counter() - start:.1f}s): {plain.frequencies.size} atoms, atomic norm {plain.atomic_norm:.4f}")
print(f"  max frequency error {max_frequency_error(plain.frequencies, f_true):.2e}")

start = time.perf_counter()
sol = fs_anm_complete(prob)
print(f"\nband prior ({time.perf_counter() - start:.1f}s): atomic norm {sol.atomic_norm:.8f} (sum of |s| = 3)")
for f, s in zip(sol.frequencies, sol.amplitudes):
    print(f"  f = {f:.10f}  |s| = {abs(s):.6f}")
print(f"  decomposition retrieval error {max_frequency_error(sol.frequencies, f_true):.2e}")
roots = root_finding_retrieval(sol.dual_z, prob.bands)
print(f"  dual polynomial unit-modulus points {np.round(roots, 8).tolist()}")
print(f"  root-finding retrieval error {max_frequency_error(roots, f_true):.2e}")

table = dual_polynomial(sol.dual_z, 2000)
inside = (table[:, 0] >= 0.2) & (table[:, 0] <= 0.3)
print(f"\n|q(f)| peaks at {table[inside, 1].max():.6f} inside the band and reaches {table[~inside, 1].max():.2f} outside;")
print("  the dual constraint only bounds q on the band")
out = Path("dual_polynomial.csv")
write_dual_csv(out, table)
print(f"wrote {out}")
