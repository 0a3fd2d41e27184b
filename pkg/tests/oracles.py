"""Independent reference computations used by the tests."""

import cvxpy as cp
import numpy as np

from fsvd.core import atom_matrix


def band_grid(bands, points: int = 10_000) -> np.ndarray:
    """``points`` frequencies spread over the bands in proportion to length."""
    total = sum(b.length for b in bands)
    grids = []
    for b in bands:
        k = max(2, int(round(points * b.length / total)))
        grids.append(np.mod(b.f_lo + np.linspace(0.0, b.length, k), 1.0))
    return np.concatenate(grids)


def grid_l1_norm(y, bands, points: int = 10_000) -> float:
    """Atomic norm of ``y`` restricted to a fine grid on the bands.

    Computed through the dual of ``min sum_k |c_k|  s.t.  sum_k c_k a(f_k) = y``:
    ``max Re <y, z>  s.t.  |a(f)^H z| <= 1`` on the grid.  The dual stays
    bounded when the primal coefficients cancel heavily.  The grid value
    upper-bounds the band-limited atomic norm and converges to it as the
    grid is refined.
    """
    y = np.asarray(y, dtype=complex)
    A = atom_matrix(y.size, band_grid(bands, points))
    z = cp.Variable(y.size, complex=True)
    prob = cp.Problem(cp.Maximize(cp.real(np.conj(y) @ z)), [cp.abs(A.conj().T @ z) <= 1])
    for solver in (cp.CLARABEL, cp.CVXOPT):
        try:
            prob.solve(solver=solver)
        except (cp.error.SolverError, ArithmeticError):
            continue
        if prob.status == "optimal":
            return float(prob.value)
    raise RuntimeError(f"grid l1 oracle: {prob.status}")
