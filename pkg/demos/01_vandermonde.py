"""Standard versus frequency-selective Vandermonde decomposition.

mu1 puts weights 0.7, 2, 1 at 0.1, 0.25, 0.7.  With four moments the
Toeplitz matrix is rank deficient and its decomposition is unique, so both
methods give mu1 back.  With three moments T is full rank: the standard
decomposition then has a free atom, and confining the atoms to an arc picks
one decomposition out of the many.
"""

import numpy as np

from fsvd import AtomicMeasure, TorusInterval, moments_from_measure, toeplitz_from_moments
from fsvd.trigpoly import g_from_interval, toeplitz_g
from fsvd.vandermonde import fs_admissible, fs_vandermonde_decompose, vandermonde_decompose


def show(label, measure):
    atoms = "  ".join(f"({p:.4f}, {f:.4f})" for p, f in measure.atoms)
    print(f"  {label:<28} {atoms}")


mu1 = AtomicMeasure.from_arrays([0.7, 2.0, 1.0], [0.1, 0.25, 0.7])
print("mu1 atoms (weight, frequency):")
show("mu1", mu1)

print("\nN = 4: T is 4x4 of rank 3, so the decomposition is unique")
t4 = moments_from_measure(mu1, 4)
rep = vandermonde_decompose(t4)
show("standard", rep.measure)
print(f"  rank used {rep.rank_used}, unique {rep.unique}, residual {rep.residual:.1e}")

print("\nN = 3: T is full rank; the free atom can be placed anywhere")
t3 = moments_from_measure(mu1, 3)
print(f"  eigenvalues of T: {np.round(np.linalg.eigvalsh(toeplitz_from_moments(t3)), 4)}")
for f_extra in (0.5, 0.9):
    show(f"standard, extra atom at {f_extra}", vandermonde_decompose(t3, f_extra=f_extra).measure)

I = TorusInterval(0.05, 0.75)
g = g_from_interval(I)
print(f"\nArc I = [{I.f_lo}, {I.f_hi}]: selector g(f) = {g.r0:.4f} + 2 Re({g.r1:.4f} e^(-i2pi f)) is >= 0 exactly on I")
print(f"  eigenvalues of T_g: {np.round(np.linalg.eigvalsh(toeplitz_g(t3, g)), 4)}")
psd_t, psd_g, _ = fs_admissible(t3, I)
print(f"  T >= 0: {psd_t}, T_g >= 0: {psd_g}, so an I-supported decomposition exists")
rep = fs_vandermonde_decompose(t3, I)
show("frequency-selective on I", rep.measure)
print("  one atom sits on the arc edge 0.05; the other two moved to stay inside I")

J = TorusInterval(0.2, 0.3)
psd_t, psd_g, mins = fs_admissible(t3, J)
print(f"\nArc [0.2, 0.3]: min eig T_g = {mins[1]:.4f} < 0, so no decomposition confined to it exists")
