"""Vandermonde decomposition of PSD Hermitian Toeplitz matrices.

Rank-deficient matrices are factored through the shift-invariance of a
square-root factor (a matrix-pencil / ESPRIT step).  Full-rank matrices are
first deflated by one atom chosen so that the remainder drops rank by
exactly one.  The frequency-selective variant pins that atom to the lower
endpoint of the arc, which leaves ``T_g`` unchanged because ``g`` vanishes
there.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import (
    AtomicMeasure,
    BandSet,
    MomentSequence,
    NotRepresentableError,
    NumericalFailureError,
    TorusInterval,
    atom_matrix,
    atom_vector,
    moments_from_measure,
    moments_from_toeplitz,
    psd_check,
    toeplitz_from_moments,
    torus_distance,
    wrap_frequency,
)
from .trigpoly import g_from_interval, toeplitz_g

log = logging.getLogger(__name__)

__all__ = [
    "DecompositionReport",
    "numerical_rank",
    "vandermonde_decompose",
    "fs_admissible",
    "fs_vandermonde_decompose",
    "deflate",
    "decomposition_residual",
]

EPS_RANK = 1e-7
PSD_TOL = 1e-8
UNIT_MODULUS_TOL = 1e-3
NEG_WEIGHT_RTOL = 1e-8
PINV_COND = 1e12


@dataclass(frozen=True)
class DecompositionReport:
    measure: AtomicMeasure
    rank_used: int
    unique: bool
    residual: float

    def to_json(self) -> dict:
        return {
            "measure": self.measure.to_json(),
            "rank": self.rank_used,
            "unique": self.unique,
            "residual": self.residual,
        }


def numerical_rank(M: np.ndarray, eps_rank: float = EPS_RANK, scale: float | None = None) -> int:
    """Number of eigenvalues above ``eps_rank * scale``.

    ``scale`` defaults to ``lambda_max(M)``.  Indefinite input raises
    ``ValueError``.
    """
    M = np.asarray(M)
    ok, _ = psd_check(M, tol=max(eps_rank, PSD_TOL), scale=scale)
    if not ok:
        raise ValueError("matrix is indefinite")
    w = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    ref = w[-1] if scale is None else scale
    if ref <= 0:
        return 0
    return int(np.sum(w > eps_rank * ref))


def decomposition_residual(T: np.ndarray, mu: AtomicMeasure) -> float:
    """Relative Frobenius error of ``sum_k p_k a(f_k) a(f_k)^H`` against ``T``."""
    n = T.shape[0]
    A = atom_matrix(n, mu.f)
    R = T - (A * mu.p) @ A.conj().T
    nt = np.linalg.norm(T)
    return float(np.linalg.norm(R) / nt) if nt > 0 else float(np.linalg.norm(R))


def deflate(t: MomentSequence, f: float, p: float) -> MomentSequence:
    """Subtract one atom: ``t'_j = t_j - p e^{-i2pi j f}``."""
    j = np.arange(t.n)
    return MomentSequence(t.t - p * np.exp(-2j * np.pi * j * f))


def _as_moments(T) -> tuple[MomentSequence, np.ndarray]:
    if isinstance(T, MomentSequence):
        return T, toeplitz_from_moments(T)
    T = np.asarray(T, dtype=complex)
    return moments_from_toeplitz(T), 0.5 * (T + T.conj().T)


def _fit_weights(t: MomentSequence, freqs: np.ndarray) -> np.ndarray:
    # real least squares on t_j = sum_k p_k e^{-i2pi j f_k}, j = 0..N-1
    A = np.conj(atom_matrix(t.n, freqs))
    lhs = np.vstack([A.real, A.imag])
    rhs = np.concatenate([t.t.real, t.t.imag])
    p, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    return p


def _pencil_frequencies(T: np.ndarray, r: int) -> np.ndarray:
    w, U = np.linalg.eigh(T)
    w, U = w[::-1][:r], U[:, ::-1][:, :r]
    V = U * np.sqrt(np.clip(w, 0.0, None))
    Vu, Vl = V[:-1], V[1:]
    G = Vu.conj().T @ Vu
    H = Vu.conj().T @ Vl
    if np.linalg.cond(G) > PINV_COND:
        S = np.linalg.pinv(Vu) @ Vl
    else:
        S = np.linalg.solve(G, H)
    z = np.linalg.eigvals(S)
    dev = np.max(np.abs(np.abs(z) - 1.0)) if z.size else 0.0
    if dev > UNIT_MODULUS_TOL:
        raise NumericalFailureError(f"pencil eigenvalue off the unit circle by {dev:.3g}")
    return wrap_frequency(np.angle(z) / (2 * np.pi))


def _decompose_low_rank(t: MomentSequence, T: np.ndarray, r: int) -> AtomicMeasure:
    if r == 0:
        return AtomicMeasure()
    freqs = _pencil_frequencies(T, r)
    p = _fit_weights(t, freqs)
    t0 = max(float(t.t[0].real), 0.0)
    if np.any(p < -NEG_WEIGHT_RTOL * max(t0, 1e-300)):
        raise NumericalFailureError(f"negative fitted weight {p.min():.3g}")
    p = np.clip(p, 0.0, None)
    return AtomicMeasure.from_arrays(p, freqs)


def vandermonde_decompose(
    T,
    f_extra: float | None = None,
    eps_rank: float = EPS_RANK,
    psd_tol: float = PSD_TOL,
) -> DecompositionReport:
    """Decompose a PSD Hermitian Toeplitz matrix as ``sum_k p_k a(f_k) a(f_k)^H``.

    Parameters
    ----------
    T : array or MomentSequence
        The Toeplitz matrix (or its generating moments).
    f_extra : float, optional
        Frequency of the deflation atom when ``T`` has full rank.  Defaults
        to 0.
    eps_rank : float
        Relative eigenvalue threshold for the numerical rank.

    Returns
    -------
    DecompositionReport
        ``unique`` is True exactly when ``T`` is rank-deficient.
    """
    t, Tm = _as_moments(T)
    ok, lam_min = psd_check(Tm, tol=psd_tol)
    if not ok:
        raise NotRepresentableError(f"Toeplitz matrix is not PSD (min eigenvalue {lam_min:.3g})")
    n = t.n
    r = numerical_rank(Tm, eps_rank)
    if r < n:
        mu = _decompose_low_rank(t, Tm, r)
        unique = True
    else:
        f_n = 0.0 if f_extra is None else float(wrap_frequency(f_extra))
        mu = _deflated_decomposition(t, Tm, f_n)
        unique = False
    return DecompositionReport(mu, r, unique, decomposition_residual(Tm, mu))


def _deflation_weight(T: np.ndarray, f: float) -> float:
    a = atom_vector(T.shape[0], f)
    return float(1.0 / np.real(a.conj() @ np.linalg.solve(T, a)))


def _deflated_decomposition(t: MomentSequence, T: np.ndarray, f_n: float) -> AtomicMeasure:
    p_n = _deflation_weight(T, f_n)
    t1 = deflate(t, f_n, p_n)
    T1 = toeplitz_from_moments(t1)
    # the remainder has rank N-1 exactly; take that rank rather than re-estimating it
    rest = _decompose_low_rank(t1, T1, t.n - 1)
    rest_p, rest_f = np.asarray(rest.p), np.asarray(rest.f)
    clash = torus_distance(rest_f, f_n) < 1e-12
    if np.any(clash):
        # cannot happen in exact arithmetic; fold into the deflation atom
        p_n += float(rest_p[clash].sum())
        rest_p, rest_f = rest_p[~clash], rest_f[~clash]
    return AtomicMeasure.from_arrays(np.append(rest_p, p_n), np.append(rest_f, f_n))


def fs_admissible(
    t: MomentSequence, interval: TorusInterval, tol: float = PSD_TOL
) -> tuple[bool, bool, tuple[float, float]]:
    """Check ``T >= 0`` and ``T_g >= 0`` for the arc's selector polynomial.

    Both tolerances are relative to ``lambda_max(T)`` so that a
    nearly-vanishing ``T_g`` is judged on the scale of the data.
    """
    T = toeplitz_from_moments(t)
    Tg = toeplitz_g(t, g_from_interval(interval))
    lam_max = float(np.linalg.eigvalsh(T)[-1])
    psd_t, min_t = psd_check(T, tol=tol, scale=lam_max)
    psd_g, min_g = psd_check(Tg, tol=tol, scale=lam_max)
    return psd_t, psd_g, (min_t, min_g)


def fs_vandermonde_decompose(
    t: MomentSequence,
    interval: TorusInterval,
    eps_rank: float = EPS_RANK,
    psd_tol: float = PSD_TOL,
    tol_f: float = 1e-6,
) -> DecompositionReport:
    """Vandermonde decomposition with every frequency inside ``interval``.

    Raises
    ------
    NotRepresentableError
        If ``T`` or ``T_g`` fails the PSD test.
    NumericalFailureError
        If a recovered frequency falls outside the arc by more than ``tol_f``.
    """
    if isinstance(interval, BandSet):
        if len(interval) != 1:
            raise ValueError("use the moments module for multi-band sets")
        interval = interval[0]
    psd_t, psd_g, (min_t, min_g) = fs_admissible(t, interval, psd_tol)
    if not (psd_t and psd_g):
        raise NotRepresentableError(
            f"no decomposition on [{interval.f_lo}, {interval.f_hi}]: "
            f"min eig T = {min_t:.3g}, min eig T_g = {min_g:.3g}"
        )
    n = t.n
    T = toeplitz_from_moments(t)
    g = g_from_interval(interval)
    lam_max = float(np.linalg.eigvalsh(T)[-1])
    r = numerical_rank(T, eps_rank)
    if r < n:
        mu = _decompose_low_rank(t, T, r)
    else:
        mu = _deflated_decomposition(t, T, interval.f_lo)
    mu = _snap_into(mu, interval, tol_f)
    rank_g = numerical_rank(toeplitz_g(t, g), eps_rank, scale=lam_max) if lam_max > 0 else 0
    unique = r < n or rank_g <= n - 2
    return DecompositionReport(mu, r, unique, decomposition_residual(T, mu))


def _snap_into(mu: AtomicMeasure, interval: TorusInterval, tol_f: float) -> AtomicMeasure:
    if len(mu) == 0:
        return mu
    f = np.array(mu.f)
    inside = interval.contains(f)
    if np.all(inside):
        return mu
    d_lo = torus_distance(f, interval.f_lo)
    d_hi = torus_distance(f, interval.f_hi)
    if np.any(~inside & (np.minimum(d_lo, d_hi) > tol_f)):
        bad = f[~inside & (np.minimum(d_lo, d_hi) > tol_f)]
        raise NumericalFailureError(f"recovered frequencies {bad} lie outside the band")
    f[~inside] = np.where(d_lo[~inside] <= d_hi[~inside], interval.f_lo, interval.f_hi)
    return AtomicMeasure.from_arrays(mu.p, f, drop_below=0.0, merge_within=1e-12)


def measure_moments_match(mu: AtomicMeasure, t: MomentSequence) -> float:
    """Relative l2 mismatch between ``t`` and the moments of ``mu``."""
    s = moments_from_measure(mu, t.n).t if len(mu) else np.zeros(t.n)
    nt = np.linalg.norm(t.t)
    return float(np.linalg.norm(s - t.t) / (nt if nt > 0 else 1.0))
