"""Degree-one selector polynomials and the Toeplitz matrices they induce.

For an arc ``[f_L, f_H]`` the polynomial

    g(z) = r_1 z^{-1} + r_0 + conj(r_1) z

has simple roots at ``e^{i2pi f_L}`` and ``e^{i2pi f_H}``, is positive on the
open arc and negative on its complement.  Applying the same three-tap stencil
to a moment sequence gives the ``(N-1) x (N-1)`` matrix ``T_g``; ``T_g >= 0``
together with ``T >= 0`` characterises Toeplitz matrices whose Vandermonde
atoms all lie in the arc.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MomentSequence, TorusInterval, atom_matrix

__all__ = [
    "DegOnePoly",
    "g_from_interval",
    "eval_g",
    "toeplitz_g",
    "elementary_matrices",
    "theta",
    "theta_g",
]


@dataclass(frozen=True)
class DegOnePoly:
    """Hermitian trigonometric polynomial ``r1 z^-1 + r0 + conj(r1) z``."""

    r0: float
    r1: complex

    def __post_init__(self):
        object.__setattr__(self, "r0", float(self.r0))
        object.__setattr__(self, "r1", complex(self.r1))

    @property
    def r_minus1(self) -> complex:
        return self.r1.conjugate()

    def __call__(self, f):
        return eval_g(self, f)

    def to_json(self) -> dict:
        return {"r0": self.r0, "r1": [self.r1.real, self.r1.imag]}


def g_from_interval(interval: TorusInterval) -> DegOnePoly:
    """Selector polynomial of an arc.

    The sign factor uses the stored endpoints as given, so arcs that wrap
    through zero (``f_lo > f_hi``) get ``sgn = -1``; this is what makes the
    polynomial positive on the arc in both cases.
    """
    lo, hi = interval.f_lo, interval.f_hi
    if lo == hi:
        raise ValueError("degenerate interval")
    s = 1.0 if hi > lo else -1.0
    r0 = -2.0 * np.cos(np.pi * (hi - lo)) * s
    r1 = np.exp(1j * np.pi * (lo + hi)) * s
    return DegOnePoly(r0, r1)


def eval_g(g: DegOnePoly, f):
    """``g(f) = r0 + 2 Re(r1 e^{-i2pi f})``; vectorised over ``f``."""
    f = np.asarray(f, dtype=float)
    val = g.r0 + 2.0 * np.real(g.r1 * np.exp(-2j * np.pi * f))
    return float(val) if val.ndim == 0 else val


def toeplitz_g(t: MomentSequence, g: DegOnePoly) -> np.ndarray:
    """``[T_g]_{mn} = r1 t_{n-m+1} + r0 t_{n-m} + conj(r1) t_{n-m-1}``."""
    if not isinstance(t, MomentSequence):
        t = MomentSequence(t)
    n = t.n
    if n < 2:
        raise ValueError("T_g needs at least two moments")
    full = t.full()
    idx = np.arange(n - 1)
    d = (idx[None, :] - idx[:, None]) + n - 1
    return g.r1 * full[d + 1] + g.r0 * full[d] + g.r_minus1 * full[d - 1]


def theta(n: int, j: int) -> np.ndarray:
    """``n x n`` matrix with ones where ``col - row == j``."""
    if abs(j) > n - 1:
        raise ValueError(f"diagonal {j} out of range for size {n}")
    return np.eye(n, k=j)


def theta_g(n: int, g: DegOnePoly, j: int) -> np.ndarray:
    """The ``T_g`` stencil applied to the unit moment at lag ``j``.

    Entry ``(m, k)`` collects ``r1`` where ``k-m+1 == j``, ``r0`` where
    ``k-m == j`` and ``conj(r1)`` where ``k-m-1 == j``.
    """
    if abs(j) > n - 1:
        raise ValueError(f"diagonal {j} out of range for size {n}")
    m = n - 1
    return g.r1 * np.eye(m, k=j - 1) + g.r0 * np.eye(m, k=j) + g.r_minus1 * np.eye(m, k=j + 1)


def elementary_matrices(n: int, g: DegOnePoly, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Theta_j, Theta_gj)`` so that ``T = sum_j Theta_j t_j`` and
    ``T_g = sum_j Theta_gj t_j`` over ``j = 1-n .. n-1``."""
    return theta(n, j), theta_g(n, g, j)


def toeplitz_g_from_measure(freqs, weights, n: int, g: DegOnePoly) -> np.ndarray:
    """``sum_k p_k g(f_k) a(n-1, f_k) a(n-1, f_k)^H`` evaluated directly."""
    A = atom_matrix(n - 1, freqs)
    w = np.asarray(weights, dtype=float) * eval_g(g, np.asarray(freqs, dtype=float))
    return (A * w) @ A.conj().T
