"""Truncated trigonometric K-moment problem.

Given moments ``t_0..t_{N-1}`` and a union of arcs ``K``, decide whether a
nonnegative measure supported on ``K`` reproduces them, and if so produce an
atomic one.  A single arc needs only two PSD tests; several arcs need a
feasibility SDP that splits ``t`` into per-band pieces, each of which is then
decomposed on its own arc.  Infeasibility is backed by a separate dual
certificate: a trigonometric polynomial nonnegative on ``K`` whose pairing
with ``t`` is negative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
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
    band_contains,
    moments_from_measure,
    real_embedding,
)
from .sdp import hermitian_variable
from .trigpoly import g_from_interval
from .vandermonde import fs_admissible, fs_vandermonde_decompose

log = logging.getLogger(__name__)

__all__ = [
    "Objective",
    "MomentStatus",
    "MomentResult",
    "SolverFailureError",
    "representing_measure_single",
    "representing_measure_multiband",
    "representing_measure",
    "dual_certificate",
    "certificate_polynomial",
    "verify_measure",
]

CERTIFICATE_THRESHOLD = -1e-8
SOLVER_PSD_TOL = 1e-6
EMPTY_BAND_RTOL = 1e-9


class SolverFailureError(FsvdError):
    """The conic solver neither solved the problem nor certified infeasibility."""


class Objective(str, Enum):
    NONE = "none"
    MAX_TRACE_FIRST = "max-trace-first"
    MIN_TRACE_FIRST = "min-trace-first"


class MomentStatus(str, Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"


@dataclass
class MomentResult:
    status: MomentStatus
    measure: AtomicMeasure | None = None
    per_band_moments: list | None = None
    certificate: np.ndarray | None = None
    unique: bool | None = None
    info: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status is MomentStatus.FEASIBLE

    def to_json(self) -> dict:
        out = {"status": self.status.value}
        if self.measure is not None:
            out["measure"] = self.measure.to_json()
        if self.per_band_moments is not None:
            out["per_band_moments"] = [t.to_json() for t in self.per_band_moments]
        if self.certificate is not None:
            out["certificate"] = [float(a) for a in self.certificate]
        if self.unique is not None:
            out["unique"] = self.unique
        if self.info:
            out["info"] = self.info
        return out


def _bands(K) -> BandSet:
    if isinstance(K, TorusInterval):
        return BandSet.of(K)
    if isinstance(K, BandSet):
        return K
    return BandSet(tuple(K))


def verify_measure(mu: AtomicMeasure, t: MomentSequence, K, tol: float = 1e-6, tol_f: float = 1e-6) -> bool:
    """True iff ``mu`` reproduces ``t`` to relative l2 error ``tol`` and every
    atom lies in ``K`` (within torus distance ``tol_f``)."""
    K = _bands(K)
    if not all(band_contains(K, f, tol_f) for f in mu.f):
        return False
    s = moments_from_measure(mu, t.n).t
    return bool(np.linalg.norm(s - t.t) <= tol * max(np.linalg.norm(t.t), 1e-300))


def representing_measure_single(t: MomentSequence, interval: TorusInterval) -> MomentResult:
    """Closed-form test on one arc: feasible iff ``T >= 0`` and ``T_g >= 0``."""
    if isinstance(interval, BandSet):
        interval = interval[0]
    psd_t, psd_g, mins = fs_admissible(t, interval)
    if not (psd_t and psd_g):
        cert = dual_certificate(t, BandSet.of(interval))
        return MomentResult(
            MomentStatus.INFEASIBLE,
            certificate=cert,
            info={"min_eig_T": mins[0], "min_eig_Tg": mins[1]},
        )
    rep = fs_vandermonde_decompose(t, interval)
    return MomentResult(
        MomentStatus.FEASIBLE,
        measure=rep.measure,
        per_band_moments=[t],
        unique=rep.unique,
        info={"rank": rep.rank_used, "residual": rep.residual},
    )


def _feasibility_program(t: MomentSequence, K: BandSet, objective: Objective) -> sdp.ConicProgram:
    n, J = t.n, len(K)
    d = moment_dim(n)
    prog = sdp.ConicProgram(num_vars=J * d)
    for l, band in enumerate(K):
        g = g_from_interval(band)
        prog.add_psd(toeplitz_expr(l * d, n, prog.num_vars), name=f"T{l}")
        prog.add_psd(toeplitz_g_expr(l * d, n, g, prog.num_vars), name=f"Tg{l}")
    A = sp.hstack([sp.identity(d)] * J, format="csc")
    b = np.concatenate([t.t.real, t.t[1:].imag])
    prog.add_equalities(A, b)
    c = np.zeros(prog.num_vars)
    if objective is Objective.MAX_TRACE_FIRST:
        c[0] = -n
    elif objective is Objective.MIN_TRACE_FIRST:
        c[0] = n
    prog.objective = c
    return prog


def representing_measure_multiband(
    t: MomentSequence,
    K,
    objective: Objective | str = Objective.NONE,
    opts: sdp.SolveOptions | None = None,
) -> MomentResult:
    """Find a ``K``-representing measure through the band-splitting SDP.

    With ``objective`` set to ``max-trace-first`` (or ``min-trace-first``)
    the split maximises (minimises) ``tr T(t_1)``, which tends to push the
    per-band Toeplitz blocks to lower rank and so yields fewer atoms.

    Raises
    ------
    SolverFailureError
        If the solver fails or stalls.
    """
    K = _bands(K)
    objective = Objective(objective)
    if len(K) == 1:
        return representing_measure_single(t, K[0])
    n, d = t.n, moment_dim(t.n)
    prog = _feasibility_program(t, K, objective)
    rep = sdp.solve(prog, opts)
    log.info("band-splitting SDP: %s", rep.backend_status)

    if rep.status is sdp.Status.INFEASIBLE:
        cert = dual_certificate(t, K)
        if cert is None:
            raise NumericalFailureError("solver reported infeasibility but no dual certificate was found")
        return MomentResult(MomentStatus.INFEASIBLE, certificate=cert, info={"solver": rep.backend_status})
    if rep.status is not sdp.Status.OPTIMAL:
        raise SolverFailureError(f"band-splitting SDP ended with status {rep.backend_status}")

    t0 = float(t.t[0].real)
    pieces, atoms_p, atoms_f, ranks = [], [], [], []
    unique = True
    for l, band in enumerate(K):
        tl = moments_from_params(rep.x[l * d : (l + 1) * d], n)
        pieces.append(tl)
        if tl.t[0].real <= EMPTY_BAND_RTOL * max(t0, 1.0):
            ranks.append(0)
            continue
        try:
            dec = fs_vandermonde_decompose(tl, band, psd_tol=SOLVER_PSD_TOL)
        except NotRepresentableError as exc:
            raise NumericalFailureError(f"solver output for band {l} is not admissible: {exc}") from exc
        ranks.append(dec.rank_used)
        unique = unique and dec.unique
        atoms_p.append(dec.measure.p)
        atoms_f.append(dec.measure.f)
    mu = AtomicMeasure.from_arrays(
        np.concatenate(atoms_p) if atoms_p else [],
        np.concatenate(atoms_f) if atoms_f else [],
        merge_within=1e-8,
    )
    return MomentResult(
        MomentStatus.FEASIBLE,
        measure=mu,
        per_band_moments=pieces,
        unique=None if len(K) > 1 else unique,
        info={"solver": rep.backend_status, "band_ranks": ranks, "objective": rep.objective_value},
    )


def representing_measure(t: MomentSequence, K, objective: Objective | str = Objective.NONE) -> MomentResult:
    """Dispatch on the number of bands."""
    K = _bands(K)
    if len(K) == 1 and Objective(objective) is Objective.NONE:
        return representing_measure_single(t, K[0])
    return representing_measure_multiband(t, K, objective)


def dual_certificate(t: MomentSequence, K, opts: sdp.SolveOptions | None = None) -> np.ndarray | None:
    """Search for a polynomial nonnegative on ``K`` that pairs negatively with ``t``.

    Solves ``min t_R^T alpha`` over ``alpha`` lying in every band's Gram
    cone, with the first band's Gram traces normalised to at most one.
    Returns ``alpha`` (the real embedding of the polynomial coefficients)
    when the optimum is below ``-1e-8``, else ``None``.
    """
    K = _bands(K)
    n = t.n
    d = moment_dim(n)
    sizes = [n * n + (n - 1) * (n - 1)] * len(K)
    nv = d + sum(sizes)
    prog = sdp.ConicProgram(num_vars=nv)

    off = d
    rows, rhs = [], []
    first_trace = None
    for l, band in enumerate(K):
        g = g_from_interval(band)
        Q0 = hermitian_variable(off, n, nv)
        Q1 = hermitian_variable(off + n * n, n - 1, nv)
        off += n * n + (n - 1) * (n - 1)
        prog.add_psd(Q0, name=f"Q0_{l}")
        prog.add_psd(Q1, name=f"Q1_{l}")
        F0, F1 = gamma_functionals(n, g)
        # C[j + n - 1] = tr(Theta_j Q0) + tr(Theta_gj Q1) = gamma_{-j}
        C = sp.csc_matrix(F0) @ Q0.coeffs + sp.csc_matrix(F1) @ Q1.coeffs
        C = C.toarray()
        # gamma_k = C[-k + n - 1]; alpha = [Re g_{N-1}..Re g_1, g_0/sqrt2, Im g_1..Im g_{N-1}]
        G = np.vstack(
            [C[n - 1 + k].real for k in range(n - 1, 0, -1)]
            + [C[n - 1].real / np.sqrt(2.0)]
            + [C[n - 1 - k].imag for k in range(1, n)]
        )
        rows.append(sp.hstack([sp.identity(d), -sp.csc_matrix(G[:, d:])], format="csc"))
        rhs.append(np.zeros(d))
        if l == 0:
            first_trace = np.zeros(nv)
            first_trace[d : d + n] = 1.0
            first_trace[d + n * n : d + n * n + n - 1] = 1.0
    prog.add_equalities(sp.vstack(rows, format="csc"), np.concatenate(rhs))
    norm_block = sp.csc_matrix(-first_trace.reshape(1, -1))
    prog.add_psd(sdp.PsdBlock(1, np.ones((1, 1)), norm_block), name="normalisation")
    c = np.zeros(nv)
    c[:d] = real_embedding(t)
    prog.objective = c

    opts = opts or sdp.SolveOptions(tol_gap_abs=1e-11, tol_gap_rel=1e-10, tol_feas=1e-11)
    rep = sdp.solve(prog, opts)
    if rep.status not in (sdp.Status.OPTIMAL, sdp.Status.INACCURATE) or rep.x.size != nv:
        raise SolverFailureError(f"dual certificate SDP ended with status {rep.backend_status}")
    alpha = rep.x[:d]
    value = float(real_embedding(t) @ alpha)
    log.info("dual certificate optimum %.3g (%s)", value, rep.backend_status)
    if value < CERTIFICATE_THRESHOLD:
        return alpha
    return None


def certificate_polynomial(alpha, f) -> np.ndarray:
    """Evaluate ``h(f) = sum_j gamma_j e^{i2pi j f}`` for ``gamma_R = alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    n = (alpha.size + 1) // 2
    gamma0 = np.sqrt(2.0) * alpha[n - 1]
    gamma_pos = alpha[: n - 1][::-1] + 1j * alpha[n:]
    f = np.asarray(f, dtype=float)
    j = np.arange(1, n)
    return gamma0 + 2.0 * np.real(np.exp(2j * np.pi * np.multiply.outer(f, j)) @ gamma_pos)
