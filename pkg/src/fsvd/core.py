"""Domain types shared by every module: moment sequences, torus intervals,
atomic measures, and the conversions between them.

Frequencies live on the unit circle, represented as ``[0, 1)`` with 0 and 1
identified.  A moment sequence ``t_0 .. t_{N-1}`` defines the Hermitian
Toeplitz matrix ``T[m, n] = t_{n-m}`` with ``t_{-j} = conj(t_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FsvdError",
    "NotRepresentableError",
    "NumericalFailureError",
    "MomentSequence",
    "TorusInterval",
    "BandSet",
    "AtomicMeasure",
    "atom_vector",
    "atom_matrix",
    "toeplitz_from_moments",
    "moments_from_toeplitz",
    "moments_from_measure",
    "real_embedding",
    "moments_from_real_embedding",
    "psd_check",
    "band_contains",
    "torus_distance",
]

HERMITIAN_RTOL = 1e-10
T0_IMAG_ATOL = 1e-12
WEIGHT_DROP_RTOL = 1e-10


class FsvdError(Exception):
    """Base class for errors raised by this package."""


class NotRepresentableError(FsvdError):
    """The input admits no decomposition of the requested kind."""


class NumericalFailureError(FsvdError):
    """A computation left its numerically trustworthy regime."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def wrap_frequency(f):
    """Reduce frequencies modulo 1 into ``[0, 1)``."""
    f = np.mod(np.asarray(f, dtype=float), 1.0)
    # np.mod(-1e-18, 1) == 1.0 in floating point
    return np.where(f >= 1.0, 0.0, f)


def torus_distance(f, g):
    """Distance between frequencies on the unit circle, in ``[0, 1/2]``."""
    d = np.mod(np.asarray(f, dtype=float) - np.asarray(g, dtype=float), 1.0)
    return np.minimum(d, 1.0 - d)


# --------------------------------------------------------------------------
# Types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentSequence:
    """Moments ``t_0, ..., t_{N-1}`` of a Hermitian Toeplitz matrix."""

    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=complex).ravel()
        if t.size < 2:
            raise ValueError(f"need at least 2 moments, got {t.size}")
        if abs(t[0].imag) > T0_IMAG_ATOL:
            raise ValueError(f"t_0 must be real, got {t[0]!r}")
        t = t.copy()
        t[0] = t[0].real
        object.__setattr__(self, "t", _frozen(t))

    @property
    def n(self) -> int:
        return self.t.size

    def __len__(self) -> int:
        return self.t.size

    def full(self) -> np.ndarray:
        """The two-sided sequence ``t_{1-N}, ..., t_{N-1}``."""
        return np.concatenate([np.conj(self.t[:0:-1]), self.t])

    def __add__(self, other: "MomentSequence") -> "MomentSequence":
        return MomentSequence(self.t + other.t)

    def __sub__(self, other: "MomentSequence") -> "MomentSequence":
        return MomentSequence(self.t - other.t)

    def scale(self, a: float) -> "MomentSequence":
        return MomentSequence(float(a) * self.t)

    @classmethod
    def zeros(cls, n: int) -> "MomentSequence":
        return cls(np.zeros(n, dtype=complex))

    def to_json(self) -> dict:
        return {"n": self.n, "t": [[float(z.real), float(z.imag)] for z in self.t]}

    @classmethod
    def from_json(cls, obj) -> "MomentSequence":
        if isinstance(obj, dict):
            t = complex_from_pairs(obj["t"])
            if "n" in obj and int(obj["n"]) != t.size:
                raise ValueError(f"n={obj['n']} does not match {t.size} moments")
            return cls(t)
        return cls(complex_from_pairs(obj))


@dataclass(frozen=True)
class TorusInterval:
    """Closed arc ``[f_lo, f_hi]`` of the unit circle.

    If ``f_lo > f_hi`` the arc wraps through 0, i.e. it is
    ``[f_lo, 1) U [0, f_hi]``.
    """

    f_lo: float
    f_hi: float

    def __post_init__(self):
        lo = float(wrap_frequency(self.f_lo))
        hi = float(wrap_frequency(self.f_hi))
        if lo == hi:
            raise ValueError(f"degenerate interval [{lo}, {hi}]")
        object.__setattr__(self, "f_lo", lo)
        object.__setattr__(self, "f_hi", hi)

    @property
    def wraps(self) -> bool:
        return self.f_lo > self.f_hi

    @property
    def length(self) -> float:
        return (self.f_hi - self.f_lo) % 1.0

    def contains(self, f, tol: float = 0.0):
        f = wrap_frequency(f)
        inside = np.mod(f - self.f_lo, 1.0) <= self.length
        near = np.minimum(torus_distance(f, self.f_lo), torus_distance(f, self.f_hi)) <= tol
        return inside | near

    def interior_points(self, num: int) -> np.ndarray:
        """``num`` equispaced points strictly inside the arc."""
        s = (np.arange(num) + 0.5) / num
        return wrap_frequency(self.f_lo + s * self.length)

    def grid(self, num: int) -> np.ndarray:
        """``num`` equispaced points covering the closed arc."""
        return wrap_frequency(self.f_lo + np.linspace(0.0, self.length, num))

    def intersects(self, other: "TorusInterval") -> bool:
        return bool(self.contains(other.f_lo) or other.contains(self.f_lo))

    def to_json(self) -> list:
        return [self.f_lo, self.f_hi]


@dataclass(frozen=True)
class BandSet:
    """Union of pairwise disjoint closed arcs."""

    bands: tuple

    def __post_init__(self):
        bands = tuple(b if isinstance(b, TorusInterval) else TorusInterval(*b) for b in self.bands)
        if not bands:
            raise ValueError("a band set needs at least one band")
        for i in range(len(bands)):
            for j in range(i + 1, len(bands)):
                if bands[i].intersects(bands[j]):
                    raise ValueError(f"bands {bands[i]} and {bands[j]} overlap")
        object.__setattr__(self, "bands", bands)

    @classmethod
    def of(cls, *intervals) -> "BandSet":
        return cls(tuple(intervals))

    def __len__(self) -> int:
        return len(self.bands)

    def __iter__(self):
        return iter(self.bands)

    def __getitem__(self, i) -> TorusInterval:
        return self.bands[i]

    def to_json(self) -> dict:
        return {"bands": [b.to_json() for b in self.bands]}

    @classmethod
    def from_json(cls, obj) -> "BandSet":
        if isinstance(obj, dict):
            obj = obj["bands"]
        return cls(tuple(TorusInterval(float(lo), float(hi)) for lo, hi in obj))


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite nonnegative measure ``sum_k p_k delta_{f_k}``.

    Atoms are stored sorted by frequency.  Use :meth:`from_arrays` to build
    one from numerical output; it drops negligible weights and merges
    coincident frequencies.
    """

    p: np.ndarray = field(default_factory=lambda: np.zeros(0))
    f: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).ravel()
        f = wrap_frequency(np.asarray(self.f, dtype=float).ravel())
        if p.shape != f.shape:
            raise ValueError("weights and frequencies differ in length")
        if np.any(p <= 0):
            raise ValueError("atom weights must be positive")
        order = np.argsort(f, kind="stable")
        p, f = p[order], f[order]
        if f.size > 1 and np.any(np.diff(f) == 0):
            raise ValueError("atom frequencies must be distinct")
        object.__setattr__(self, "p", _frozen(p))
        object.__setattr__(self, "f", _frozen(f))

    @classmethod
    def from_arrays(cls, p, f, drop_below: float | None = None, merge_within: float = 0.0) -> "AtomicMeasure":
        p = np.asarray(p, dtype=float).ravel()
        f = wrap_frequency(np.asarray(f, dtype=float).ravel())
        if drop_below is None:
            drop_below = WEIGHT_DROP_RTOL * max(float(np.sum(np.abs(p))), 0.0)
        keep = p > drop_below
        p, f = p[keep], f[keep]
        if merge_within > 0 and p.size > 1:
            p, f = _merge_close(p, f, merge_within)
        return cls(p, f)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return [(float(p), float(f)) for p, f in zip(self.p, self.f)]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.p))

    def __len__(self) -> int:
        return self.p.size

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return AtomicMeasure.from_arrays(
            np.concatenate([self.p, other.p]), np.concatenate([self.f, other.f]), drop_below=0.0, merge_within=0.0
        )

    def to_json(self) -> dict:
        return {"atoms": [{"p": p, "f": f} for p, f in self.atoms]}

    @classmethod
    def from_json(cls, obj) -> "AtomicMeasure":
        atoms = obj["atoms"] if isinstance(obj, dict) else obj
        return cls([a["p"] for a in atoms], [a["f"] for a in atoms])


def _merge_close(p, f, tol):
    order = np.argsort(f)
    p, f = p[order], f[order]
    groups: list[list[int]] = [[0]]
    for k in range(1, f.size):
        if torus_distance(f[k], f[groups[-1][-1]]) <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    if len(groups) > 1 and torus_distance(f[groups[0][0]], f[groups[-1][-1]]) <= tol:
        groups[0] = groups.pop() + groups[0]
    new_p, new_f = [], []
    for g in groups:
        w = p[g]
        # weighted circular mean keeps wrap-around groups sane
        ang = np.angle(np.sum(w * np.exp(2j * np.pi * f[g])))
        new_p.append(w.sum())
        new_f.append(ang / (2 * np.pi))
    return np.array(new_p), wrap_frequency(new_f)


# --------------------------------------------------------------------------
# Serialization helpers
# --------------------------------------------------------------------------


def complex_from_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim == 1 and arr.size == 0:
        return np.zeros(0, dtype=complex)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("complex values must be given as [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def complex_to_pairs(z: Iterable[complex]) -> list[list[float]]:
    return [[float(np.real(v)), float(np.imag(v))] for v in z]


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def atom_vector(n: int, f: float) -> np.ndarray:
    """Discrete complex sinusoid ``[1, e^{i2pi f}, ..., e^{i2pi(n-1)f}]``."""
    return np.exp(2j * np.pi * np.arange(n) * float(f))


def atom_matrix(n: int, freqs) -> np.ndarray:
    """Vandermonde matrix whose columns are ``atom_vector(n, f_k)``."""
    freqs = np.asarray(freqs, dtype=float).ravel()
    return np.exp(2j * np.pi * np.outer(np.arange(n), freqs))


def toeplitz_from_moments(t: MomentSequence | Sequence[complex]) -> np.ndarray:
    """Hermitian Toeplitz matrix with ``T[m, n] = t_{n-m}``."""
    if not isinstance(t, MomentSequence):
        t = MomentSequence(t)
    n = t.n
    full = t.full()  # index j + n - 1 holds t_j
    idx = np.arange(n)
    return full[(idx[None, :] - idx[:, None]) + n - 1]


def moments_from_toeplitz(T: np.ndarray, atol: float = 1e-8) -> MomentSequence:
    """Read the moment sequence off a Hermitian Toeplitz matrix.

    Diagonals are averaged; entries deviating from Toeplitz-Hermitian
    structure by more than ``atol * max(1, |T|)`` raise ``ValueError``.
    """
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError("expected a square matrix")
    n = T.shape[0]
    scale = max(1.0, float(np.max(np.abs(T))) if T.size else 1.0)
    H = 0.5 * (T + T.conj().T)
    if np.max(np.abs(T - H)) > atol * scale:
        raise ValueError("matrix is not Hermitian")
    t = np.array([np.mean(np.diagonal(H, offset=j)) for j in range(n)])
    if np.max(np.abs(toeplitz_from_moments(MomentSequence(t)) - H)) > atol * scale:
        raise ValueError("matrix is not Toeplitz")
    return MomentSequence(t)


def moments_from_measure(mu: AtomicMeasure, n: int) -> MomentSequence:
    """Moments ``t_j = sum_k p_k exp(-i 2 pi j f_k)`` for ``j = 0..n-1``."""
    j = np.arange(n)
    t = np.exp(-2j * np.pi * np.outer(j, mu.f)) @ mu.p if len(mu) else np.zeros(n, dtype=complex)
    return MomentSequence(t)


def real_embedding(t: MomentSequence) -> np.ndarray:
    """Real vector ``[Re t_{N-1}..Re t_1, t_0/sqrt(2), Im t_1..Im t_{N-1}]``.

    With this scaling the Euclidean inner product of two embeddings equals
    ``(1/2) sum_j conj(t_j) s_j`` over the two-sided sequences.
    """
    tt = t.t
    return np.concatenate([tt[:0:-1].real, [tt[0].real / np.sqrt(2.0)], tt[1:].imag])


def moments_from_real_embedding(vec) -> MomentSequence:
    vec = np.asarray(vec, dtype=float).ravel()
    if vec.size % 2 != 1:
        raise ValueError("a real embedding has odd length 2N-1")
    n = (vec.size + 1) // 2
    re = vec[: n - 1][::-1]
    im = vec[n:]
    t = np.concatenate([[vec[n - 1] * np.sqrt(2.0)], re + 1j * im])
    return MomentSequence(t)


def psd_check(M: np.ndarray, tol: float = 1e-8, scale: float | None = None) -> tuple[bool, float]:
    """Test a Hermitian matrix for positive semidefiniteness.

    ``M`` is PSD when ``lambda_min >= -tol * max(1, scale)``, where
    ``scale`` defaults to ``lambda_max(M)``.  Returns ``(is_psd, lambda_min)``.
    """
    M = np.asarray(M)
    if M.size == 0:
        return True, 0.0
    norm = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.conj().T)) > HERMITIAN_RTOL * norm:
        raise ValueError("matrix is not Hermitian")
    w = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    lam_min, lam_max = float(w[0]), float(w[-1])
    ref = lam_max if scale is None else scale
    return bool(lam_min >= -tol * max(1.0, ref)), lam_min


def band_contains(K: BandSet | TorusInterval, f: float, tol_f: float = 0.0) -> bool:
    """True iff ``f`` is within torus distance ``tol_f`` of some band."""
    bands = [K] if isinstance(K, TorusInterval) else K.bands
    return any(bool(b.contains(f, tol_f)) for b in bands)
