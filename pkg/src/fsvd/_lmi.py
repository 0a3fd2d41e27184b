"""Affine Toeplitz LMIs in terms of real moment variables.

A moment variable of length ``n`` occupies ``2n-1`` consecutive real
variables ``[Re t_0, Re t_1..Re t_{n-1}, Im t_1..Im t_{n-1}]``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .core import MomentSequence
from .sdp import HermitianAffine
from .trigpoly import DegOnePoly, theta, theta_g


def moment_dim(n: int) -> int:
    return 2 * n - 1


def moments_from_params(params: np.ndarray, n: int) -> MomentSequence:
    params = np.asarray(params, dtype=float)
    t = params[:n].astype(complex)
    t[1:] += 1j * params[n:]
    return MomentSequence(t)


def _lift(mats_pos, mats_neg, mat0, n_out: int, offset: int, n: int, num_vars: int) -> HermitianAffine:
    # t_j = u_j + i v_j, t_{-j} = u_j - i v_j
    cols = [sp.csc_matrix(mat0.reshape(-1, 1))]
    re_cols, im_cols = [], []
    for j in range(1, n):
        P, M = mats_pos[j - 1], mats_neg[j - 1]
        re_cols.append(sp.csc_matrix((P + M).reshape(-1, 1)))
        im_cols.append(sp.csc_matrix((1j * (P - M)).reshape(-1, 1)))
    block = sp.hstack(cols + re_cols + im_cols, format="csc")
    left = sp.csc_matrix((n_out * n_out, offset), dtype=complex)
    right = sp.csc_matrix((n_out * n_out, num_vars - offset - block.shape[1]), dtype=complex)
    return HermitianAffine(n_out, sp.hstack([left, block, right], format="csc"))


def toeplitz_expr(offset: int, n: int, num_vars: int) -> HermitianAffine:
    """``T(t) = sum_j Theta_j t_j`` as an affine expression."""
    pos = [theta(n, j) for j in range(1, n)]
    neg = [theta(n, -j) for j in range(1, n)]
    return _lift(pos, neg, theta(n, 0), n, offset, n, num_vars)


def toeplitz_g_expr(offset: int, n: int, g: DegOnePoly, num_vars: int) -> HermitianAffine:
    """``T_g(t) = sum_j Theta_gj t_j`` as an affine expression."""
    pos = [theta_g(n, g, j) for j in range(1, n)]
    neg = [theta_g(n, g, -j) for j in range(1, n)]
    return _lift(pos, neg, theta_g(n, g, 0), n - 1, offset, n, num_vars)


def gamma_functionals(n: int, g: DegOnePoly) -> tuple[np.ndarray, np.ndarray]:
    """Row-major linear maps ``Q -> tr(Theta_j Q)`` and ``Q1 -> tr(Theta_gj Q1)``.

    Returns arrays of shape ``(2n-1, n*n)`` and ``(2n-1, (n-1)^2)`` indexed by
    ``j + n - 1`` for ``j = 1-n .. n-1``.  ``tr(A Q) = sum_{mk} A[m,k] Q[k,m]``
    so the functional is ``vec(A^T)``.
    """
    F0 = np.stack([theta(n, j).T.ravel() for j in range(1 - n, n)])
    F1 = np.stack([theta_g(n, g, j).T.ravel() for j in range(1 - n, n)])
    return F0, F1
