"""Band-limited atomic norm and line spectral estimation.

The frequency-selective atomic norm of ``y`` (atoms ``a(f) e^{i phi}`` with
``f`` restricted to the bands) equals the optimum of

    minimize   x/2 + sum_l t_{l,0}/2
    subject to [[x, y^H], [y, sum_l T(t_l)]] >= 0,
               T(t_l) >= 0,  T_{g_l}(t_l) >= 0   for every band l.

With a single band ``T(t_1) >= 0`` is implied by the bordered LMI and is
left out.

Completion from samples on ``omega`` fixes ``y`` there (or bounds the misfit
by ``eta``) and leaves the rest free.  Frequencies are read off the solved
Toeplitz matrices by frequency-selective Vandermonde decomposition, or, as a
baseline, from the unit-modulus roots of ``1 - |q(f)|^2`` where ``q`` is
the dual polynomial.

Passing ``bands=None`` drops every ``T_g`` constraint and gives the plain
atomic norm over the whole circle.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
import numpy.polynomial.polynomial as P
import scipy.sparse as sp

from . import sdp
from ._lmi import gamma_functionals, moment_dim, moments_from_params, toeplitz_expr, toeplitz_g_expr
from .core import (
    AtomicMeasure,
    BandSet,
    FsvdError,
    MomentSequence,
    NotRepresentableError,
    NumericalFailureError,
    TorusInterval,
    atom_matrix,
    band_contains,
    complex_from_pairs,
    complex_to_pairs,
    torus_distance,
    wrap_frequency,
)
from .moments import SolverFailureError
from .sdp import HermitianAffine, hermitian_from_params, hermitian_variable
from .trigpoly import g_from_interval, theta
from .vandermonde import EPS_RANK, fs_vandermonde_decompose, vandermonde_decompose

log = logging.getLogger(__name__)

__all__ = [
    "LSEProblem",
    "LSESolution",
    "DualSolution",
    "UnsupportedProblemError",
    "fs_atomic_norm",
    "fs_anm_complete",
    "fs_anm_dual",
    "dual_residual",
    "retrieve_frequencies",
    "retrieve_measure",
    "recover_amplitudes",
    "dual_polynomial",
    "eval_dual_polynomial",
    "root_finding_retrieval",
    "random_lse_problem",
    "max_frequency_error",
    "write_dual_csv",
    "write_stems_csv",
]

RETRIEVAL_PSD_TOL = 1e-6
RETRIEVAL_DROP_RTOL = 1e-6
RETRIEVAL_RESIDUAL_WARN = 1e-4
RETRIEVAL_RANK_LADDER = (EPS_RANK, 1e-6, 1e-5, 1e-4)
# an unconverged solver point is used only if it is this close to optimal
CANDIDATE_MAX_GAP = 1e-3
CANDIDATE_MAX_INFEAS = 1e-5  # relative to the objective


class UnsupportedProblemError(FsvdError):
    pass


def _as_bands(bands) -> BandSet | None:
    if bands is None or isinstance(bands, BandSet):
        return bands
    if isinstance(bands, TorusInterval):
        return BandSet.of(bands)
    return BandSet(tuple(bands))


@dataclass(frozen=True)
class LSEProblem:
    """Samples ``y_obs`` of a length-``n`` signal at the indices ``omega``."""

    n: int
    omega: np.ndarray
    y_obs: np.ndarray
    bands: BandSet | None
    eta: float = 0.0

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=int).ravel()
        y = np.asarray(self.y_obs, dtype=complex).ravel()
        if np.unique(omega).size != omega.size:
            raise ValueError("sample indices must be distinct")
        if omega.size and (omega.min() < 0 or omega.max() >= self.n):
            raise ValueError("sample index out of range")
        if omega.size != y.size:
            raise ValueError("one observation per sample index is required")
        if self.n < 2:
            raise ValueError("signal length must be at least 2")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        order = np.argsort(omega)
        object.__setattr__(self, "omega", omega[order])
        object.__setattr__(self, "y_obs", y[order])
        object.__setattr__(self, "bands", _as_bands(self.bands))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def m(self) -> int:
        return self.omega.size

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "omega": [int(i) for i in self.omega],
            "y_obs": complex_to_pairs(self.y_obs),
            "bands": None if self.bands is None else self.bands.to_json()["bands"],
            "eta": self.eta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LSEProblem":
        bands = obj.get("bands")
        return cls(
            n=int(obj["n"]),
            omega=np.asarray(obj["omega"], dtype=int),
            y_obs=complex_from_pairs(obj["y_obs"]),
            bands=None if bands is None else BandSet.from_json(bands),
            eta=float(obj.get("eta", 0.0)),
        )


@dataclass
class LSESolution:
    y_full: np.ndarray
    frequencies: np.ndarray
    amplitudes: np.ndarray
    weights: np.ndarray
    atomic_norm: float
    toeplitz_moments: MomentSequence
    x_scalar: float
    per_band_moments: list
    dual_z: np.ndarray | None = None
    amplitude_residual: float = 0.0
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "frequencies": [float(f) for f in self.frequencies],
            "amplitudes": complex_to_pairs(self.amplitudes),
            "weights": [float(p) for p in self.weights],
            "atomic_norm": self.atomic_norm,
            "x": self.x_scalar,
            "y_full": complex_to_pairs(self.y_full),
            "toeplitz_moments": self.toeplitz_moments.to_json(),
            "amplitude_residual": self.amplitude_residual,
            "warnings": list(self.warnings),
        }


@dataclass
class DualSolution:
    z: np.ndarray
    Q0: np.ndarray
    Q1: np.ndarray | None
    value: float


# --------------------------------------------------------------------------
# Primal SDP
# --------------------------------------------------------------------------


@dataclass
class _Layout:
    n: int
    free_idx: np.ndarray  # signal indices carried as variables
    y_const: np.ndarray  # fixed signal entries (zero where free)
    n_bands: int

    @property
    def y_off(self) -> int:
        return 1

    @property
    def t_off(self) -> int:
        return 1 + 2 * self.free_idx.size

    @property
    def num_vars(self) -> int:
        return self.t_off + self.n_bands * moment_dim(self.n)

    def y_value(self, x: np.ndarray) -> np.ndarray:
        y = self.y_const.copy()
        k = self.free_idx.size
        y[self.free_idx] = x[self.y_off : self.y_off + k] + 1j * x[self.y_off + k : self.y_off + 2 * k]
        return y


def _bordered(layout: _Layout) -> HermitianAffine:
    n, nv = layout.n, layout.num_vars
    size = n + 1
    rows, cols, vals = [0], [0], [1.0 + 0j]  # x at (0, 0)
    k = layout.free_idx.size
    for i, m in enumerate(layout.free_idx):
        re_v, im_v = layout.y_off + i, layout.y_off + k + i
        lo, hi = (1 + m) * size, 1 + m  # (1+m, 0) and (0, 1+m)
        rows += [lo, hi, lo, hi]
        cols += [re_v, re_v, im_v, im_v]
        vals += [1.0, 1.0, 1j, -1j]
    coeffs = sp.csc_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(size * size, nv))
    const = np.zeros((size, size), dtype=complex)
    const[1:, 0] = layout.y_const
    const[0, 1:] = np.conj(layout.y_const)
    expr = HermitianAffine(size, coeffs, const)
    d = moment_dim(n)
    for l in range(layout.n_bands):
        expr = expr + toeplitz_expr(layout.t_off + l * d, n, nv).place(size, 1)
    return expr


def _anm_program(layout: _Layout, bands: BandSet | None, omega=None, y_obs=None, eta: float = 0.0):
    n, nv = layout.n, layout.num_vars
    d = moment_dim(n)
    prog = sdp.ConicProgram(num_vars=nv)
    c = np.zeros(nv)
    c[0] = 0.5
    for l in range(layout.n_bands):
        c[layout.t_off + l * d] = 0.5
    prog.objective = c
    prog.add_psd(_bordered(layout), name="bordered")
    if bands is not None:
        for l, band in enumerate(bands):
            off = layout.t_off + l * d
            if layout.n_bands > 1:
                # with one band this is a principal block of the bordered LMI
                prog.add_psd(toeplitz_expr(off, n, nv), name=f"T{l}")
            prog.add_psd(toeplitz_g_expr(off, n, g_from_interval(band), nv), name=f"Tg{l}")
    if eta > 0:
        # (eta, Re(y_omega - y_obs), Im(y_omega - y_obs)) in the second-order cone
        k = layout.free_idx.size
        pos = {m: i for i, m in enumerate(layout.free_idx)}
        M = omega.size
        rows, cols = [], []
        for r, m in enumerate(omega):
            rows += [1 + r, 1 + M + r]
            cols += [layout.y_off + pos[m], layout.y_off + k + pos[m]]
        U = sp.csc_matrix((np.ones(len(rows)), (rows, cols)), shape=(1 + 2 * M, nv))
        u0 = np.concatenate([[eta], -y_obs.real, -y_obs.imag])
        prog.add_soc(u0, U, name="noise")
    return prog


def _default_opts() -> sdp.SolveOptions:
    return sdp.SolveOptions()


def _acceptable(rep: sdp.SolveReport) -> bool:
    res = rep.residuals
    scale = max(1.0, abs(rep.objective_value))
    return res.get("gap", np.inf) <= CANDIDATE_MAX_GAP and res.get("primal", np.inf) <= CANDIDATE_MAX_INFEAS * scale


def _balance(x: np.ndarray, layout: _Layout) -> np.ndarray:
    # (x, t) -> (x / c, c t) keeps every constraint (congruence with
    # diag(1/sqrt(c), sqrt(c) I)) while the objective is flat to first order
    # along that ray, so solvers leave x and t_0 off by about sqrt(gap).
    # The exact minimiser on the ray is c = sqrt(x / t_0).
    d = moment_dim(layout.n)
    t0 = sum(x[layout.t_off + l * d] for l in range(layout.n_bands))
    if x[0] <= 0 or t0 <= 0:
        return x
    c = np.sqrt(x[0] / t0)
    out = x.copy()
    out[0] /= c
    out[layout.t_off :] *= c
    return out


def _solve_anm(layout: _Layout, bands, omega=None, y_obs=None, eta=0.0, opts=None):
    prog = _anm_program(layout, bands, omega, y_obs, eta)
    rep = sdp.solve(prog, opts or _default_opts())
    if rep.status is sdp.Status.INACCURATE and rep.x.size == layout.num_vars and _acceptable(rep):
        log.warning("atomic norm SDP returned %s; using the candidate", rep.backend_status)
    elif rep.status is not sdp.Status.OPTIMAL:
        raise SolverFailureError(f"atomic norm SDP ended with status {rep.backend_status}")
    x = _balance(rep.x, layout)
    d = moment_dim(layout.n)
    ts = [moments_from_params(x[layout.t_off + l * d : layout.t_off + (l + 1) * d], layout.n) for l in range(layout.n_bands)]
    lam = sdp.real_to_herm(rep.psd_duals[0])
    z = -lam[1:, 0] / lam[0, 0] if lam[0, 0] > 0 else None
    value = 0.5 * float(x[0]) + 0.5 * sum(float(t.t[0].real) for t in ts)
    return rep, x, ts, z, value


def fs_atomic_norm(y, bands, opts: sdp.SolveOptions | None = None) -> tuple[float, MomentSequence, float]:
    """Band-limited atomic norm of ``y``.

    Returns ``(value, t, x)`` where ``t`` is the optimal (summed) moment
    sequence and ``x`` the optimal bordering scalar.  ``bands=None`` gives the
    unrestricted atomic norm.
    """
    y = np.asarray(y, dtype=complex).ravel()
    n = y.size
    if n < 2:
        raise ValueError("need at least two samples")
    bands = _as_bands(bands)
    if not np.any(y):
        return 0.0, MomentSequence.zeros(n), 0.0
    layout = _Layout(n, np.zeros(0, dtype=int), y.copy(), 1 if bands is None else len(bands))
    _, x, ts, _, value = _solve_anm(layout, bands, opts=opts)
    return value, _sum_moments(ts, n), float(x[0])


def _sum_moments(ts, n) -> MomentSequence:
    total = np.zeros(n, dtype=complex)
    for t in ts:
        total += t.t
    return MomentSequence(total)


def fs_anm_complete(problem: LSEProblem, opts: sdp.SolveOptions | None = None) -> LSESolution:
    """Complete a spectrally sparse signal from its samples by minimising the
    band-limited atomic norm, then retrieve frequencies and amplitudes."""
    n, bands = problem.n, problem.bands
    J = 1 if bands is None else len(bands)
    if problem.eta > 0:
        free = np.arange(n)
        y_const = np.zeros(n, dtype=complex)
    else:
        free = np.setdiff1d(np.arange(n), problem.omega)
        y_const = np.zeros(n, dtype=complex)
        y_const[problem.omega] = problem.y_obs
    if problem.eta == 0 and not np.any(problem.y_obs):
        zero = MomentSequence.zeros(n)
        return LSESolution(
            y_const, np.zeros(0), np.zeros(0, dtype=complex), np.zeros(0), 0.0, zero, 0.0, [zero] * J,
            dual_z=np.zeros(n, dtype=complex),
        )
    layout = _Layout(n, free, y_const, J)
    rep, x, ts, z, value = _solve_anm(layout, bands, problem.omega, problem.y_obs, problem.eta, opts)
    y_full = layout.y_value(x)
    warnings = []
    mu = retrieve_measure(ts, bands, warnings)
    s, res = recover_amplitudes(y_full, mu.f)
    if res > RETRIEVAL_RESIDUAL_WARN:
        warnings.append(f"amplitude fit residual {res:.3g}")
    if rep.status is not sdp.Status.OPTIMAL:
        warnings.append(f"solver status {rep.backend_status}")
    return LSESolution(
        y_full=y_full,
        frequencies=np.array(mu.f),
        amplitudes=s,
        weights=np.array(mu.p),
        atomic_norm=value,
        toeplitz_moments=_sum_moments(ts, n),
        x_scalar=float(x[0]),
        per_band_moments=ts,
        dual_z=z,
        amplitude_residual=res,
        warnings=warnings,
    )


# --------------------------------------------------------------------------
# Retrieval
# --------------------------------------------------------------------------


def _decompose_band(t: MomentSequence, band, notes: list | None):
    # solver output is accurate to roughly its gap, so a noise floor of
    # small eigenvalues can sit above the default rank threshold and push
    # the pencil off the unit circle; retry with coarser thresholds
    last = None
    for eps in RETRIEVAL_RANK_LADDER:
        try:
            if band is None:
                dec = vandermonde_decompose(t, eps_rank=eps, psd_tol=RETRIEVAL_PSD_TOL)
            else:
                dec = fs_vandermonde_decompose(t, band, eps_rank=eps, psd_tol=RETRIEVAL_PSD_TOL)
        except NumericalFailureError as exc:
            last = exc
            continue
        if eps != RETRIEVAL_RANK_LADDER[0] and notes is not None:
            notes.append(f"retrieval used rank threshold {eps:g} after: {last}")
        return dec
    raise last


def retrieve_measure(ts, bands, notes: list | None = None) -> AtomicMeasure:
    """Decompose each band's solved moments on its own arc and merge.

    Atoms lighter than ``1e-6 * sum_l t_{l,0}`` are dropped.  If the pencil
    step fails at the default rank threshold it is retried with coarser
    ones; such retries are appended to ``notes``.
    """
    bands = _as_bands(bands)
    if isinstance(ts, MomentSequence):
        ts = [ts]
    total = sum(float(t.t[0].real) for t in ts)
    if total <= 0:
        return AtomicMeasure()
    ps, fs = [], []
    for l, t in enumerate(ts):
        if t.t[0].real <= RETRIEVAL_DROP_RTOL * total:
            continue
        try:
            dec = _decompose_band(t, None if bands is None else bands[l], notes)
        except NotRepresentableError as exc:
            raise NumericalFailureError(f"solved moments for band {l} are not admissible: {exc}") from exc
        ps.append(dec.measure.p)
        fs.append(dec.measure.f)
    if not ps:
        return AtomicMeasure()
    return AtomicMeasure.from_arrays(np.concatenate(ps), np.concatenate(fs), drop_below=RETRIEVAL_DROP_RTOL * total)


def retrieve_frequencies(ts, bands) -> np.ndarray:
    return np.array(retrieve_measure(ts, bands).f)


def recover_amplitudes(y_full, freqs) -> tuple[np.ndarray, float]:
    """Least-squares amplitudes ``s`` for ``A(freqs) s = y_full``.

    Returns ``(s, relative_residual)``.  Raises ``NumericalFailureError`` if
    the frequencies are (near-)duplicates.
    """
    y = np.asarray(y_full, dtype=complex).ravel()
    freqs = np.asarray(freqs, dtype=float).ravel()
    if freqs.size == 0:
        ny = np.linalg.norm(y)
        return np.zeros(0, dtype=complex), (0.0 if ny == 0 else 1.0)
    if freqs.size > y.size:
        raise ValueError("more frequencies than samples")
    A = atom_matrix(y.size, freqs)
    if np.linalg.cond(A) > 1e12:
        raise NumericalFailureError("atom matrix is rank-deficient; frequencies too close")
    s, *_ = np.linalg.lstsq(A, y, rcond=None)
    ny = np.linalg.norm(y)
    res = float(np.linalg.norm(A @ s - y) / (ny if ny > 0 else 1.0))
    return s, res


def dual_polynomial(z, grid: int) -> np.ndarray:
    """Sample ``|q(f)| = |a(f)^H z|`` at ``f = j/grid``, ``j = 0..grid``.

    Returns an array of shape ``(grid + 1, 2)`` with columns ``f, |q(f)|``.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    z = np.asarray(z, dtype=complex).ravel()
    f = np.arange(grid + 1) / grid
    q = np.exp(-2j * np.pi * np.outer(f, np.arange(z.size))) @ z
    return np.column_stack([f, np.abs(q)])


def eval_dual_polynomial(z, f) -> np.ndarray:
    z = np.asarray(z, dtype=complex).ravel()
    f = np.atleast_1d(np.asarray(f, dtype=float))
    return np.exp(-2j * np.pi * np.outer(f, np.arange(z.size))) @ z


def _polish_roots(coef: np.ndarray, roots: np.ndarray, iters: int = 30) -> np.ndarray:
    # Schroeder's iteration (Newton on P/P') converges quadratically at
    # multiple roots too; the unit-circle roots here are double roots, which
    # the companion eigenvalues only resolve to ~sqrt(eps * cond)
    d1 = P.polyder(coef)
    d2 = P.polyder(d1)
    w = roots.astype(complex)
    for _ in range(iters):
        p0, p1, p2 = P.polyval(w, coef), P.polyval(w, d1), P.polyval(w, d2)
        den = p1 * p1 - p0 * p2
        ok = np.abs(den) > 0
        step = np.zeros_like(w)
        step[ok] = p0[ok] * p1[ok] / den[ok]
        w = w - step
        if np.all(np.abs(step) <= 1e-15 * np.abs(w)):
            break
    return w


def root_finding_retrieval(z, bands=None, modulus_tol: float = 1e-4, merge_tol: float = 1e-3) -> np.ndarray:
    """Frequencies at which ``|q(f)| = 1``, via the roots of ``1 - |q|^2``.

    ``1 - |q|^2`` is written as a degree ``2N-2`` polynomial in
    ``w = e^{i2pi f}`` and all its roots are computed.  Roots near the
    circle are polished, and those within ``modulus_tol`` of it are kept.
    A touching (double) zero yields two nearby roots, so neighbours closer
    than ``merge_tol`` are averaged.  With ``bands`` given, only in-band
    roots are returned.
    """
    z = np.asarray(z, dtype=complex).ravel()
    if not np.any(z):
        raise ValueError("dual vector is zero")
    n = z.size
    c = np.convolve(np.conj(z), z[::-1])  # c[k + n - 1] = sum_m z_m conj(z_{m+k})
    coef = -c
    coef[n - 1] += 1.0  # ascending powers of w, after multiplying by w^{n-1}
    roots = np.roots(coef[::-1])
    near = np.abs(np.abs(roots) - 1.0) < max(1e2 * modulus_tol, 1e-2)
    roots = _polish_roots(coef, roots[near])
    keep = np.abs(np.abs(roots) - 1.0) < modulus_tol
    f = wrap_frequency(np.angle(roots[keep]) / (2 * np.pi))
    bands = _as_bands(bands)
    if bands is not None:
        f = f[[band_contains(bands, fi, modulus_tol) for fi in f]]
    if f.size == 0:
        return f
    merged = AtomicMeasure.from_arrays(np.ones(f.size), f, drop_below=0.0, merge_within=merge_tol)
    return np.array(merged.f)


# --------------------------------------------------------------------------
# Dual SDP
# --------------------------------------------------------------------------


DIRECT_DUAL_MAX_N = 32


def _dual_program(problem: LSEProblem) -> tuple[sdp.ConicProgram, int]:
    # variables: W = [[w, z^H], [z, Q0]] (Hermitian, (n+1)^2 reals), then Q1
    # ((n-1)^2 reals) when a band is given, then the epigraph of ||z_omega||
    n, bands = problem.n, problem.bands
    w_size = (n + 1) ** 2
    q1_size = (n - 1) ** 2 if bands is not None else 0
    s_var = w_size + q1_size
    nv = s_var + (1 if problem.eta > 0 else 0)
    prog = sdp.ConicProgram(num_vars=nv)
    W = hermitian_variable(0, n + 1, nv)
    prog.add_psd(W, name="bordered")

    # z_j = conj(W[0, j+1]); row-0 pairs follow the n+1 diagonal entries
    re_z = n + 1 + 2 * np.arange(n)
    im_z = re_z + 1

    rows = [np.eye(1, nv, 0).ravel()]
    rhs = [1.0]
    outside = np.setdiff1d(np.arange(n), problem.omega)
    for j in outside:
        rows += [np.eye(1, nv, re_z[j]).ravel(), np.eye(1, nv, im_z[j]).ravel()]
        rhs += [0.0, 0.0]

    inner = ((np.arange(n)[:, None] + 1) * (n + 1) + (np.arange(n)[None, :] + 1)).ravel()
    Q0_coeffs = W.coeffs.tocsr()[inner, :]
    if bands is not None:
        Q1 = hermitian_variable(w_size, n - 1, nv)
        prog.add_psd(Q1, name="Q1")
        F0, F1 = gamma_functionals(n, g_from_interval(bands[0]))
        C = sp.csr_matrix(F0) @ Q0_coeffs + sp.csr_matrix(F1) @ Q1.coeffs.tocsr()
    else:
        F0 = np.stack([theta(n, j).T.ravel() for j in range(1 - n, n)])
        C = sp.csr_matrix(F0) @ Q0_coeffs
    C = C.toarray()
    # the constraints for -j are conjugates of those for j
    for j in range(n):
        row = C[n - 1 + j]
        rows.append(row.real)
        rhs.append(1.0 if j == 0 else 0.0)
        if j > 0:
            rows.append(row.imag)
            rhs.append(0.0)
    prog.add_equalities(sp.csr_matrix(np.vstack(rows)), np.array(rhs))

    # maximise Re(z_omega^H y_obs) - eta ||z_omega||
    c = np.zeros(nv)
    c[re_z[problem.omega]] = -problem.y_obs.real
    c[im_z[problem.omega]] = problem.y_obs.imag
    if problem.eta > 0:
        c[s_var] = problem.eta
        M = problem.omega.size
        r = np.arange(M)
        U = sp.csc_matrix(
            (np.r_[1.0, np.ones(M), -np.ones(M)], (np.r_[0, 1 + r, 1 + M + r], np.r_[s_var, re_z[problem.omega], im_z[problem.omega]])),
            shape=(1 + 2 * M, nv),
        )
        prog.add_soc(np.zeros(1 + 2 * M), U, name="norm")
    prog.objective = c
    return prog, w_size


def _dual_direct(problem: LSEProblem, opts) -> DualSolution:
    n = problem.n
    prog, w_size = _dual_program(problem)
    rep = sdp.solve(prog, opts or _default_opts())
    if rep.status is sdp.Status.INACCURATE and rep.x.size == prog.num_vars:
        log.warning("dual SDP returned %s; using the candidate", rep.backend_status)
    elif rep.status is not sdp.Status.OPTIMAL:
        raise SolverFailureError(f"dual SDP ended with status {rep.backend_status}")
    W = hermitian_from_params(rep.x[:w_size], n + 1)
    Q1 = hermitian_from_params(rep.x[w_size : w_size + (n - 1) ** 2], n - 1) if problem.bands is not None else None
    return DualSolution(W[1:, 0].copy(), W[1:, 1:].copy(), Q1, -rep.objective_value)


def _dual_from_multipliers(problem: LSEProblem, opts) -> DualSolution:
    n, bands = problem.n, problem.bands
    if problem.eta > 0:
        free, y_const = np.arange(n), np.zeros(n, dtype=complex)
    else:
        free = np.setdiff1d(np.arange(n), problem.omega)
        y_const = np.zeros(n, dtype=complex)
        y_const[problem.omega] = problem.y_obs
    layout = _Layout(n, free, y_const, 1)
    prog = _anm_program(layout, bands, problem.omega, problem.y_obs, problem.eta)
    rep = sdp.solve(prog, opts or _default_opts())
    if rep.status is sdp.Status.INACCURATE and rep.x.size == layout.num_vars and _acceptable(rep):
        log.warning("atomic norm SDP returned %s; using the candidate", rep.backend_status)
    elif rep.status is not sdp.Status.OPTIMAL:
        raise SolverFailureError(f"atomic norm SDP ended with status {rep.backend_status}")
    lam = sdp.real_to_herm(rep.psd_duals[0])
    corner = float(lam[0, 0].real)
    if corner <= 0:
        raise NumericalFailureError("degenerate multiplier for the bordered block")
    z = -lam[1:, 0] / corner
    z[np.setdiff1d(np.arange(n), problem.omega)] = 0.0
    Q0 = lam[1:, 1:] / corner
    Q1 = sdp.real_to_herm(rep.psd_duals[1]) / corner if bands is not None else None
    value = float(np.real(np.vdot(z[problem.omega], problem.y_obs)))
    if problem.eta > 0:
        value -= problem.eta * float(np.linalg.norm(z[problem.omega]))
    return DualSolution(z, Q0, Q1, value)


def fs_anm_dual(problem: LSEProblem, opts: sdp.SolveOptions | None = None, method: str = "auto") -> DualSolution:
    """Solve the bounded-real-lemma dual of band-limited completion.

    maximise ``Re <z_omega, y_obs> - eta ||z_omega||`` over ``z`` supported
    on ``omega``, ``Q0``, ``Q1`` with ``[[1, z^H], [z, Q0]] >= 0``,
    ``Q1 >= 0`` and ``tr(Theta_j Q0) + tr(Theta_gj Q1) = [j == 0]``.

    ``method="direct"`` solves this program as stated.  It has ``O(N^2)``
    unknowns against ``O(N)`` for the primal, so for larger ``N``
    (``method="multipliers"``, the ``auto`` choice above ``N = 32``) the dual
    point is read off the primal-dual interior-point solve instead: the
    bordered block's multiplier, scaled to a unit corner, is
    ``[[1, -z^H], [-z, Q0]]`` and the ``T_g`` multiplier is ``Q1``.  Only a
    single band (or no band) is supported.
    """
    bands = problem.bands
    if bands is not None and len(bands) != 1:
        raise UnsupportedProblemError("the dual formulation is derived for a single band only")
    if method == "auto":
        method = "direct" if problem.n <= DIRECT_DUAL_MAX_N else "multipliers"
    if not np.any(problem.y_obs):
        n = problem.n
        Q0 = np.zeros((n, n), dtype=complex)
        Q0[0, 0] = 1.0
        # z = 0 with Q0 = e0 e0^H, Q1 = 0 is feasible and optimal (value 0)
        return DualSolution(np.zeros(n, dtype=complex), Q0, None if bands is None else np.zeros((n - 1, n - 1), dtype=complex), 0.0)
    if method == "direct":
        return _dual_direct(problem, opts)
    if method == "multipliers":
        return _dual_from_multipliers(problem, opts)
    raise ValueError(f"unknown method {method!r}")


def dual_residual(dual: DualSolution, bands) -> float:
    """Largest violation of ``tr(Theta_j Q0) + tr(Theta_gj Q1) = [j == 0]``."""
    n = dual.Q0.shape[0]
    bands = _as_bands(bands)
    if bands is None:
        F0 = np.stack([theta(n, j).T.ravel() for j in range(1 - n, n)])
        c = F0 @ dual.Q0.ravel()
    else:
        F0, F1 = gamma_functionals(n, g_from_interval(bands[0]))
        c = F0 @ dual.Q0.ravel() + F1 @ dual.Q1.ravel()
    c[n - 1] -= 1.0
    return float(np.max(np.abs(c)))


# --------------------------------------------------------------------------
# Problem generation
# --------------------------------------------------------------------------


def random_lse_problem(
    seed: int,
    n: int = 64,
    m: int = 16,
    freqs=(0.22, 0.23, 0.28),
    bands=((0.2, 0.3),),
    eta: float = 0.0,
    noise: float = 0.0,
) -> tuple[LSEProblem, np.ndarray, np.ndarray]:
    """Seeded compressive line-spectrum instance.

    Unit-magnitude amplitudes with uniform random phases; ``m`` sample
    indices drawn uniformly without replacement.  Returns
    ``(problem, true_freqs, true_amplitudes)``.
    """
    rng = np.random.default_rng(seed)
    freqs = np.asarray(freqs, dtype=float)
    s = np.exp(2j * np.pi * rng.uniform(size=freqs.size))
    omega = np.sort(rng.choice(n, size=m, replace=False))
    y = atom_matrix(n, freqs) @ s
    y_obs = y[omega]
    if noise > 0:
        y_obs = y_obs + noise * (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2)
    problem = LSEProblem(n, omega, y_obs, None if bands is None else BandSet.from_json(bands), eta)
    return problem, freqs, s


def max_frequency_error(estimated, truth) -> float:
    """Largest torus distance from a true frequency to its nearest estimate."""
    estimated = np.asarray(estimated, dtype=float)
    if estimated.size == 0:
        return 0.5
    return float(max(np.min(torus_distance(estimated, f)) for f in np.asarray(truth, dtype=float)))


# --------------------------------------------------------------------------
# Plot data
# --------------------------------------------------------------------------


def write_dual_csv(path, table: np.ndarray) -> None:
    """Write ``dual_polynomial`` samples as ``f,abs_q`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f", "abs_q"])
        for f, a in np.asarray(table, dtype=float):
            w.writerow([f"{f:.17g}", f"{a:.17g}"])


def write_stems_csv(path, mu: AtomicMeasure) -> None:
    """Write the atoms of ``mu`` as ``f,p`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f", "p"])
        for p, f in mu.atoms:
            w.writerow([f"{f:.17g}", f"{p:.17g}"])
