"""Trigonometric K-moment problem on unions of arcs.

Three moments of mu1 are tested against three band sets.  The first
admits a representing measure with up to three atoms per band.  The second
admits one, and maximising the trace of the first band's Toeplitz block
finds a sparse 4-atom one.  The third admits none, and the solver returns a
polynomial that is nonnegative on K but pairs negatively with the moments.
"""

import numpy as np

from fsvd import AtomicMeasure, BandSet, moments_from_measure, representing_measure
from fsvd.core import real_embedding
from fsvd.moments import certificate_polynomial, verify_measure

mu1 = AtomicMeasure.from_arrays([0.7, 2.0, 1.0], [0.1, 0.25, 0.7])
t = moments_from_measure(mu1, 3)
print("moments t_0..t_2 of mu1:", np.round(t.t, 4))

cases = [
    ("[0.05,0.3] u [0.65,0.75]", [[0.05, 0.3], [0.65, 0.75]], "none"),
    ("[0.2,0.3] u [0.6,0.8]", [[0.2, 0.3], [0.6, 0.8]], "max-trace-first"),
    ("[0.2,0.3] u [0.6,0.75]", [[0.2, 0.3], [0.6, 0.75]], "none"),
]
for label, raw, objective in cases:
    K = BandSet.from_json(raw)
    res = representing_measure(t, K, objective)
    print(f"\nK = {label}, objective {objective}: {res.status.value}")
    if res.feasible:
        for p, f in res.measure.atoms:
            print(f"  atom p = {p:.4f} at f = {f:.4f}")
        print(f"  reproduces t to 1e-6 with all atoms in K: {verify_measure(res.measure, t, K)}")
        print(f"  per-band Toeplitz ranks: {res.info.get('band_ranks')}")
    else:
        alpha = res.certificate
        grid = np.concatenate([np.linspace(b.f_lo, b.f_lo + b.length, 2000) for b in K])
        print(f"  certificate: t_R . alpha = {real_embedding(t) @ alpha:.4e} < 0")
        print(f"  min of its polynomial on K = {certificate_polynomial(alpha, grid).min():.2e} (nonnegative up to rounding)")
        print("  a K-supported measure would pair nonnegatively, so none exists")
