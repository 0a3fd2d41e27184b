"""A small conic-programming layer over the real PSD cone.

Programs are stated over a real decision vector ``x``:

    minimize    c^T x + c0
    subject to  S_0 + sum_i x_i S_i  is PSD   (one per PSD block)
                u_0 + sum_i x_i u_i  in SOC   (optional second-order blocks)
                A x = b

Complex Hermitian LMIs are written with :class:`HermitianAffine` and lowered
to real symmetric blocks through ``[[Re H, -Im H], [Im H, Re H]]``.  The
solve is delegated to an interior-point conic solver: Clarabel for small
blocks, cvxopt (whose linear algebra lives in variable space) for large ones.
"""

from __future__ import annotations

import contextlib
import io
import logging
import re
import sys
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

__all__ = [
    "Status",
    "PsdBlock",
    "SocBlock",
    "HermitianAffine",
    "ConicProgram",
    "SolveOptions",
    "SolveReport",
    "herm_to_real",
    "real_to_herm",
    "solve",
    "choose_backend",
]

SQRT2 = np.sqrt(2.0)


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    INACCURATE = "Inaccurate"
    FAILED = "Failed"


def herm_to_real(H: np.ndarray) -> np.ndarray:
    """Real symmetric embedding ``[[Re H, -Im H], [Im H, Re H]]``.

    Its spectrum is that of ``H`` with every multiplicity doubled.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(H - H.conj().T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(H), initial=0.0)):
        raise ValueError("matrix is not Hermitian")
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def real_to_herm(S: np.ndarray) -> np.ndarray:
    """Left inverse of :func:`herm_to_real`.

    Any symmetric ``2n x 2n`` matrix is mapped to the Hermitian matrix whose
    embedding is closest to it; ``tr(S R(Z)) = 2 Re tr(real_to_herm(S) Z)``.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0] // 2
    A, B, D = S[:n, :n], S[:n, n:], S[n:, n:]
    return 0.5 * ((A + D) + 1j * (B.T - B))


# --------------------------------------------------------------------------
# Constraint blocks
# --------------------------------------------------------------------------


@dataclass
class PsdBlock:
    """Affine symmetric matrix ``S_0 + sum_i x_i S_i`` of order ``size``.

    ``coeffs`` has shape ``(size*size, num_vars)``; column ``i`` is the
    row-major vectorisation of ``S_i``.
    """

    size: int
    const: np.ndarray
    coeffs: sp.csc_matrix
    name: str = ""

    def value(self, x: np.ndarray) -> np.ndarray:
        v = self.const.ravel() + self.coeffs @ x
        return v.reshape(self.size, self.size)

    def check_symmetric(self, atol: float = 1e-12) -> None:
        n = self.size
        perm = (np.arange(n * n).reshape(n, n).T).ravel()
        diff = abs(self.coeffs - self.coeffs[perm, :])
        if diff.nnz and diff.max() > atol:
            raise ValueError(f"PSD block {self.name!r} has non-symmetric coefficients")
        if np.max(np.abs(self.const - self.const.T), initial=0.0) > atol:
            raise ValueError(f"PSD block {self.name!r} has a non-symmetric constant")


@dataclass
class SocBlock:
    """Affine vector ``u_0 + sum_i x_i u_i`` constrained to ``u[0] >= ||u[1:]||``."""

    const: np.ndarray
    coeffs: sp.csc_matrix
    name: str = ""


class HermitianAffine:
    """Complex Hermitian affine matrix ``H_0 + sum_i x_i H_i``.

    Stored as a sparse complex ``(n*n, num_vars)`` coefficient matrix plus
    a dense constant.  Supports addition, scalar scaling and placement into a
    larger zero-padded matrix, which is all the LMIs here need.
    """

    def __init__(self, n: int, coeffs, const=None):
        self.n = int(n)
        self.coeffs = sp.csc_matrix(coeffs, dtype=complex)
        if self.coeffs.shape[0] != self.n * self.n:
            raise ValueError("coefficient rows must equal n*n")
        self.const = np.zeros((n, n), dtype=complex) if const is None else np.asarray(const, dtype=complex)

    @property
    def num_vars(self) -> int:
        return self.coeffs.shape[1]

    @classmethod
    def constant(cls, C, num_vars: int) -> "HermitianAffine":
        C = np.asarray(C, dtype=complex)
        return cls(C.shape[0], sp.csc_matrix((C.size, num_vars), dtype=complex), C)

    def __add__(self, other: "HermitianAffine") -> "HermitianAffine":
        if other.n != self.n:
            raise ValueError("size mismatch")
        nv = max(self.num_vars, other.num_vars)
        return HermitianAffine(self.n, _pad_cols(self.coeffs, nv) + _pad_cols(other.coeffs, nv), self.const + other.const)

    def __mul__(self, a: float) -> "HermitianAffine":
        return HermitianAffine(self.n, self.coeffs * a, self.const * a)

    __rmul__ = __mul__

    def widen(self, num_vars: int) -> "HermitianAffine":
        return HermitianAffine(self.n, _pad_cols(self.coeffs, num_vars), self.const)

    def place(self, size: int, offset: int) -> "HermitianAffine":
        """Embed as the diagonal sub-block starting at ``offset`` of a ``size`` matrix."""
        idx = np.arange(self.n)
        rows = ((idx[:, None] + offset) * size + (idx[None, :] + offset)).ravel()
        P = sp.csc_matrix((np.ones(self.n * self.n), (rows, np.arange(self.n * self.n))), shape=(size * size, self.n * self.n))
        C = np.zeros((size, size), dtype=complex)
        C[offset : offset + self.n, offset : offset + self.n] = self.const
        return HermitianAffine(size, P @ self.coeffs, C)

    def value(self, x: np.ndarray) -> np.ndarray:
        v = self.const.ravel() + self.coeffs @ np.asarray(x, dtype=float)
        return v.reshape(self.n, self.n)

    def real_block(self, name: str = "") -> PsdBlock:
        """Lower to a real symmetric block via the ``2n x 2n`` embedding."""
        n = self.n
        coo = self.coeffs.tocoo()
        m, k = np.divmod(coo.row, n)
        re, im = coo.data.real, coo.data.imag
        rows = np.concatenate([m * 2 * n + k, m * 2 * n + k + n, (m + n) * 2 * n + k, (m + n) * 2 * n + k + n])
        cols = np.tile(coo.col, 4)
        vals = np.concatenate([re, -im, im, re])
        keep = vals != 0
        R = sp.csc_matrix((vals[keep], (rows[keep], cols[keep])), shape=(4 * n * n, self.num_vars))
        C = self.const
        C = 0.5 * (C + C.conj().T)
        const = np.block([[C.real, -C.imag], [C.imag, C.real]])
        return PsdBlock(2 * n, const, R, name)


def _pad_cols(M: sp.spmatrix, nv: int) -> sp.csc_matrix:
    if M.shape[1] == nv:
        return sp.csc_matrix(M)
    return sp.hstack([M, sp.csc_matrix((M.shape[0], nv - M.shape[1]), dtype=M.dtype)], format="csc")


def hermitian_variable(offset: int, n: int, num_vars: int) -> HermitianAffine:
    """Hermitian matrix built from ``n*n`` real variables starting at ``offset``.

    Variable order: the ``n`` diagonal entries, then ``(Re, Im)`` of each
    strictly upper entry in row-major order.
    """
    rows, cols, vals = [], [], []
    for i in range(n):
        rows.append(i * n + i)
        cols.append(offset + i)
        vals.append(1.0)
    v = offset + n
    for i in range(n):
        for j in range(i + 1, n):
            rows += [i * n + j, j * n + i, i * n + j, j * n + i]
            cols += [v, v, v + 1, v + 1]
            vals += [1.0, 1.0, 1j, -1j]
            v += 2
    M = sp.csc_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(n * n, num_vars))
    return HermitianAffine(n, M)


def hermitian_from_params(params: np.ndarray, n: int) -> np.ndarray:
    """Inverse of the :func:`hermitian_variable` parametrisation."""
    H = np.diag(np.asarray(params[:n], dtype=complex))
    v = n
    for i in range(n):
        for j in range(i + 1, n):
            H[i, j] = params[v] + 1j * params[v + 1]
            H[j, i] = np.conj(H[i, j])
            v += 2
    return H


# --------------------------------------------------------------------------
# Program
# --------------------------------------------------------------------------


@dataclass
class ConicProgram:
    num_vars: int
    objective: np.ndarray = None
    objective_offset: float = 0.0
    psd_blocks: list = field(default_factory=list)
    soc_blocks: list = field(default_factory=list)
    eq_A: sp.csc_matrix = None
    eq_b: np.ndarray = None

    def __post_init__(self):
        if self.objective is None:
            self.objective = np.zeros(self.num_vars)
        if self.eq_A is None:
            self.eq_A = sp.csc_matrix((0, self.num_vars))
            self.eq_b = np.zeros(0)

    def add_psd(self, block: PsdBlock | HermitianAffine, name: str = "") -> int:
        """Add a PSD constraint; Hermitian blocks are lowered to real ones.

        Returns the index of the block in ``psd_blocks``.
        """
        if isinstance(block, HermitianAffine):
            block = block.widen(self.num_vars).real_block(name)
        elif name:
            block.name = name
        self.psd_blocks.append(block)
        return len(self.psd_blocks) - 1

    def add_soc(self, const, coeffs, name: str = "") -> int:
        self.soc_blocks.append(SocBlock(np.asarray(const, dtype=float), sp.csc_matrix(coeffs), name))
        return len(self.soc_blocks) - 1

    def add_equalities(self, A, b) -> None:
        A = sp.csc_matrix(A)
        self.eq_A = sp.vstack([self.eq_A, A], format="csc")
        self.eq_b = np.concatenate([self.eq_b, np.atleast_1d(np.asarray(b, dtype=float))])

    def validate(self) -> None:
        nv = self.num_vars
        if self.objective.shape != (nv,):
            raise ValueError(f"objective has shape {self.objective.shape}, expected ({nv},)")
        for blk in self.psd_blocks:
            if blk.coeffs.shape != (blk.size * blk.size, nv) or blk.const.shape != (blk.size, blk.size):
                raise ValueError(f"PSD block {blk.name!r} has inconsistent dimensions")
            blk.check_symmetric()
        for blk in self.soc_blocks:
            if blk.coeffs.shape != (blk.const.size, nv) or blk.const.size < 1:
                raise ValueError(f"SOC block {blk.name!r} has inconsistent dimensions")
        if self.eq_A.shape[1] != nv or self.eq_A.shape[0] != self.eq_b.size:
            raise ValueError("equality constraints have inconsistent dimensions")

    def to_triplets(self) -> str:
        """Sparse text dump, one ``block row col var coeff`` line per nonzero.

        ``var`` is ``-1`` for the constant term.  Only the upper triangle of
        each block is written.
        """
        lines = []
        for b, blk in enumerate(self.psd_blocks):
            n = blk.size
            ci, cj = np.nonzero(np.triu(blk.const))
            for i, j in zip(ci, cj):
                lines.append(f"{b} {i} {j} -1 {blk.const[i, j]:.17g}")
            coo = blk.coeffs.tocoo()
            i, j = np.divmod(coo.row, n)
            for r, c, v, val in zip(i, j, coo.col, coo.data):
                if r <= c:
                    lines.append(f"{b} {r} {c} {v} {val:.17g}")
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class SolveOptions:
    tol_gap_abs: float = 1e-8
    tol_gap_rel: float = 1e-8
    tol_feas: float = 1e-8
    tol_infeas_abs: float = 1e-8
    tol_infeas_rel: float = 1e-8
    max_iter: int = 200
    time_limit: float = float("inf")
    verbose: bool = False
    backend: str = "auto"


@dataclass
class SolveReport:
    status: Status
    x: np.ndarray
    objective_value: float
    psd_duals: list
    soc_duals: list
    eq_duals: np.ndarray
    residuals: dict
    solve_time: float = 0.0
    backend_status: str = ""
    backend: str = ""

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


def _svec_rows(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # upper triangle, column-major; returns (full row-major index, svec index, scale)
    j, i = np.meshgrid(np.arange(n), np.arange(n))
    mask = i <= j
    i, j = i[mask], j[mask]
    full = i * n + j
    svec = j * (j + 1) // 2 + i
    scale = np.where(i == j, 1.0, SQRT2)
    order = np.argsort(svec)
    return full[order], svec[order], scale[order]


def _svec_to_matrix(z: np.ndarray, n: int) -> np.ndarray:
    full, _, scale = _svec_rows(n)
    M = np.zeros(n * n)
    M[full] = z / scale
    M = M.reshape(n, n)
    return M + np.triu(M, 1).T


_CLARABEL_STATUS = {
    "Solved": Status.OPTIMAL,
    "PrimalInfeasible": Status.INFEASIBLE,
    "DualInfeasible": Status.UNBOUNDED,
    "AlmostSolved": Status.INACCURATE,
    "AlmostPrimalInfeasible": Status.INACCURATE,
    "AlmostDualInfeasible": Status.INACCURATE,
    "MaxIterations": Status.INACCURATE,
    "MaxTime": Status.INACCURATE,
    "InsufficientProgress": Status.INACCURATE,
}

_CVXOPT_STATUS = {
    "optimal": Status.OPTIMAL,
    "primal infeasible": Status.INFEASIBLE,
    "dual infeasible": Status.UNBOUNDED,
    "unknown": Status.INACCURATE,
}

# Clarabel keeps a dense (d x d) scaling block per PSD cone, d = n(n+1)/2.
# Past this many entries the variable-space Schur complement of cvxopt is
# far lighter.
CLARABEL_SCALING_LIMIT = 4_000_000
CVXOPT_GAP_FLOOR = 1e-7


def choose_backend(prog: ConicProgram) -> str:
    load = sum((b.size * (b.size + 1) // 2) ** 2 for b in prog.psd_blocks)
    return "clarabel" if load <= CLARABEL_SCALING_LIMIT else "cvxopt"


def solve(prog: ConicProgram, opts: SolveOptions | None = None) -> SolveReport:
    """Solve ``prog`` with an interior-point backend.

    ``Infeasible`` is reported only when the backend returns a primal
    infeasibility certificate; candidates that miss the tolerances come back
    as ``Inaccurate``.  In ``auto`` mode a clarabel failure or inaccurate
    result is retried with cvxopt, and the cvxopt result is kept if it is
    solved or has a smaller ``max(gap, primal residual)``.
    """
    opts = opts or SolveOptions()
    prog.validate()
    backend = opts.backend if opts.backend != "auto" else choose_backend(prog)
    start = time.perf_counter()
    if backend == "clarabel":
        out = _solve_clarabel(prog, opts)
        if opts.backend == "auto" and out[0] in (Status.FAILED, Status.INACCURATE):
            # clarabel stalls on some degenerate instances that cvxopt
            # solves or at least recovers through its best iterate
            log.info("clarabel ended with %s; retrying with cvxopt", out[1])
            retry = _solve_cvxopt(prog, opts)
            if out[0] is Status.FAILED or retry[0] is Status.OPTIMAL or (
                retry[0] is Status.INACCURATE and _merit(prog, retry) < _merit(prog, out)
            ):
                backend, out = "cvxopt", retry
    elif backend == "cvxopt":
        out = _solve_cvxopt(prog, opts)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    elapsed = time.perf_counter() - start
    status, raw, x, obj, gap, eq_duals, soc_duals, psd_duals = out

    residuals = {}
    if status in (Status.OPTIMAL, Status.INACCURATE) and x.size == prog.num_vars:
        residuals = _residuals(prog, x)
        residuals["gap"] = gap
    log.debug("%s: %s in %.2fs", backend, raw, elapsed)
    return SolveReport(
        status=status,
        x=x,
        objective_value=obj + prog.objective_offset,
        psd_duals=psd_duals,
        soc_duals=soc_duals,
        eq_duals=eq_duals,
        residuals=residuals,
        solve_time=elapsed,
        backend_status=raw,
        backend=backend,
    )


def _merit(prog: ConicProgram, out) -> float:
    status, _, x, _, gap = out[:5]
    if status not in (Status.OPTIMAL, Status.INACCURATE) or x.size != prog.num_vars:
        return np.inf
    res = _residuals(prog, x)
    return max(gap, res["primal"], res["equality"])


def _solve_clarabel(prog: ConicProgram, opts: SolveOptions):
    import clarabel

    nv = prog.num_vars
    A_parts, b_parts, cones = [], [], []
    if prog.eq_A.shape[0]:
        A_parts.append(prog.eq_A)
        b_parts.append(prog.eq_b)
        cones.append(clarabel.ZeroConeT(prog.eq_A.shape[0]))
    for blk in prog.soc_blocks:
        A_parts.append(-blk.coeffs)
        b_parts.append(blk.const)
        cones.append(clarabel.SecondOrderConeT(blk.const.size))
    for blk in prog.psd_blocks:
        full, _, scale = _svec_rows(blk.size)
        S = sp.diags(scale) @ blk.coeffs[full, :]
        A_parts.append(-S)
        b_parts.append(scale * blk.const.ravel()[full])
        cones.append(clarabel.PSDTriangleConeT(blk.size))
    A = sp.vstack(A_parts, format="csc") if A_parts else sp.csc_matrix((0, nv))
    b = np.concatenate(b_parts) if b_parts else np.zeros(0)

    settings = clarabel.DefaultSettings()
    settings.verbose = opts.verbose
    settings.tol_gap_abs = opts.tol_gap_abs
    settings.tol_gap_rel = opts.tol_gap_rel
    settings.tol_feas = opts.tol_feas
    settings.tol_infeas_abs = opts.tol_infeas_abs
    settings.tol_infeas_rel = opts.tol_infeas_rel
    settings.max_iter = opts.max_iter
    settings.time_limit = opts.time_limit
    settings.chordal_decomposition_enable = False
    settings.presolve_enable = False

    P = sp.csc_matrix((nv, nv))
    solver = clarabel.DefaultSolver(P, np.asarray(prog.objective, dtype=float), A, b, cones, settings)
    sol = solver.solve()

    raw = str(sol.status)
    status = _CLARABEL_STATUS.get(raw, Status.FAILED)
    x = np.asarray(sol.x, dtype=float)
    z = np.asarray(sol.z, dtype=float)
    psd_duals, soc_duals = [], []
    pos = prog.eq_A.shape[0]
    eq_duals = z[:pos]
    for blk in prog.soc_blocks:
        soc_duals.append(z[pos : pos + blk.const.size])
        pos += blk.const.size
    for blk in prog.psd_blocks:
        d = blk.size * (blk.size + 1) // 2
        psd_duals.append(_svec_to_matrix(z[pos : pos + d], blk.size))
        pos += d
    obj = float(sol.obj_val)
    gap = abs(obj - float(sol.obj_val_dual)) / max(1.0, abs(obj))
    return status, raw, x, obj, gap, eq_duals, soc_duals, psd_duals


def _to_cvxopt(M):
    from cvxopt import spmatrix

    M = sp.coo_matrix(M)
    return spmatrix(M.data.astype(float).tolist(), M.row.tolist(), M.col.tolist(), size=M.shape)


def _solve_cvxopt(prog: ConicProgram, opts: SolveOptions):
    from cvxopt import matrix, solvers

    nv = prog.num_vars
    G_parts, h_parts = [], []
    for blk in prog.soc_blocks:
        G_parts.append(-blk.coeffs)
        h_parts.append(blk.const)
    for blk in prog.psd_blocks:
        # symmetric blocks: row-major and column-major vec coincide
        G_parts.append(-blk.coeffs)
        h_parts.append(np.asarray(blk.const, dtype=float).T.ravel())
    G = _to_cvxopt(sp.vstack(G_parts, format="coo"))
    h = matrix(np.concatenate(h_parts).astype(float))
    dims = {"l": 0, "q": [b.const.size for b in prog.soc_blocks], "s": [b.size for b in prog.psd_blocks]}
    kw = {}
    if prog.eq_A.shape[0]:
        kw = {"A": _to_cvxopt(prog.eq_A), "b": matrix(prog.eq_b.astype(float))}
    # cvxopt keeps iterating past a converged point when the gap target is
    # below ~1e-7 and can then break down, so the gap tolerances are floored
    options = {
        "show_progress": opts.verbose,
        "abstol": max(opts.tol_gap_abs, CVXOPT_GAP_FLOOR),
        "reltol": max(opts.tol_gap_rel, CVXOPT_GAP_FLOOR),
        "feastol": opts.tol_feas,
        "maxiters": opts.max_iter,
    }
    c = matrix(np.asarray(prog.objective, dtype=float))

    def run(maxiters):
        monitor = _ProgressMonitor(echo=opts.verbose)
        options["show_progress"] = True
        options["maxiters"] = maxiters
        try:
            with contextlib.redirect_stdout(monitor):
                return solvers.conelp(c, G, h, dims, options=options, **kw), monitor
        except (_Diverged, ArithmeticError):
            # a zero or negative scaling entry is a breakdown like divergence
            return None, monitor

    try:
        sol, monitor = run(opts.max_iter)
    except ValueError as exc:
        # cvxopt insists on full-rank [G; A]
        return Status.FAILED, f"rejected: {exc}", np.zeros(0), float("nan"), float("nan"), np.zeros(0), [], []
    recovered = None
    if sol is None or sol["status"] == "unknown":
        # on badly scaled problems cvxopt can reach a good point and then
        # break down; fall back to the best iterate it printed
        best = monitor.best_iteration()
        last = monitor.rows[-1][0] if monitor.rows else None
        if best is not None and (sol is None or best != last):
            if monitor.snapshot is not None and monitor.snapshot["iteration"] == best:
                sol = monitor.snapshot
            else:
                # snapshot unavailable; the solver is deterministic, so replay
                sol, _ = run(best)
            recovered = best
        if sol is None:
            return Status.FAILED, "diverged", np.zeros(0), float("nan"), float("nan"), np.zeros(0), [], []

    raw = sol["status"] if recovered is None else f"unknown (best iterate {recovered})"
    status = _CVXOPT_STATUS.get(sol["status"], Status.FAILED)
    if recovered is not None:
        status = Status.INACCURATE
    if sol["x"] is None:
        return status, raw, np.zeros(0), float("nan"), float("nan"), np.zeros(0), [], []
    x = np.array(sol["x"]).ravel()
    z = np.array(sol["z"]).ravel()
    eq_duals = np.array(sol["y"]).ravel() if kw else np.zeros(0)
    soc_duals, psd_duals = [], []
    pos = 0
    for blk in prog.soc_blocks:
        soc_duals.append(z[pos : pos + blk.const.size])
        pos += blk.const.size
    for blk in prog.psd_blocks:
        k = blk.size
        Z = z[pos : pos + k * k].reshape(k, k).T  # column-major; lower triangle is authoritative
        psd_duals.append(np.tril(Z) + np.tril(Z, -1).T)
        pos += k * k
    if recovered is None:
        obj, dual_obj = float(sol["primal objective"]), float(sol["dual objective"])
    else:
        # the printed costs are rounded; recompute them from the iterate
        obj = float(np.asarray(prog.objective, dtype=float) @ x)
        dual_obj = -sum(float(blk.const @ u) for blk, u in zip(prog.soc_blocks, soc_duals))
        dual_obj -= sum(float(np.sum(blk.const * Z)) for blk, Z in zip(prog.psd_blocks, psd_duals))
        if kw:
            dual_obj -= float(prog.eq_b @ eq_duals)
    gap = abs(obj - dual_obj) / max(1.0, abs(obj))
    return status, raw, x, obj, gap, eq_duals, soc_duals, psd_duals


class _Diverged(Exception):
    pass


class _ProgressMonitor(io.TextIOBase):
    """Reads cvxopt's progress table as it is printed.

    Tracks a merit ``max(relative gap, pres, dres)`` per iteration and aborts
    the solve once it has grown by ``1e3`` over the best value seen.
    """

    _row = re.compile(r"^\s*(\d+):\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)")

    def __init__(self, echo: bool = False):
        self.rows: list[tuple[int, float]] = []
        self.snapshot: dict | None = None
        self._buf = ""
        self._echo = echo

    def write(self, text: str) -> int:
        if self._echo:
            sys.__stdout__.write(text)
        self._buf += text
        while "\n" in self._buf:
            line, self._buf = self._buf.split("\n", 1)
            self._parse(line)
        return len(text)

    def _parse(self, line: str) -> None:
        m = self._row.match(line)
        if not m:
            return
        try:
            pcost, dcost, gap, pres, dres = (float(v) for v in m.groups()[1:6])
        except ValueError:
            return
        kt = self._kappa_tau(line)
        rel_gap = max(abs(pcost - dcost), abs(gap)) / max(1.0, abs(pcost))
        merit = max(rel_gap, pres, dres)
        if not np.isfinite(merit):
            merit = np.inf
        best = min((r[1] for r in self.rows), default=np.inf)
        self.rows.append((int(m.group(1)), merit))
        if merit < best:
            self._take_snapshot(int(m.group(1)), pcost, dcost)
        elif best < 1e-3 and merit > 1e3 * best and kt < 1.0:
            # a growing kappa/tau means an infeasibility certificate is forming
            raise _Diverged

    @staticmethod
    def _kappa_tau(line: str) -> float:
        fields = line.split()
        try:
            return float(fields[6])
        except (IndexError, ValueError):
            return 0.0

    def _take_snapshot(self, iteration: int, pcost: float, dcost: float) -> None:
        # the row is printed from inside conelp while its locals hold the
        # current (homogeneous) iterate; the solution is iterate / tau
        frame = sys._getframe(1)
        while frame is not None and frame.f_code.co_name != "conelp":
            frame = frame.f_back
        self.snapshot = None
        if frame is None:
            return
        loc = frame.f_locals
        try:
            tau = float(loc["tau"])
            self.snapshot = {
                "iteration": iteration,
                "status": "unknown",
                "x": np.array(loc["x"]).ravel() / tau,
                "y": np.array(loc["y"]).ravel() / tau,
                "z": np.array(loc["z"]).ravel() / tau,
                "primal objective": pcost,
                "dual objective": dcost,
            }
        except (KeyError, TypeError, ValueError):
            self.snapshot = None

    def best_iteration(self) -> int | None:
        if not self.rows:
            return None
        it, merit = min(self.rows, key=lambda r: r[1])
        return it if np.isfinite(merit) else None


def _residuals(prog, x) -> dict:
    eq = prog.eq_A @ x - prog.eq_b if prog.eq_A.shape[0] else np.zeros(0)
    soc = [blk.const + blk.coeffs @ x for blk in prog.soc_blocks]
    soc_viol = max((max(0.0, float(np.linalg.norm(u[1:]) - u[0])) for u in soc), default=0.0)
    min_eig = min((float(np.linalg.eigvalsh(blk.value(x))[0]) for blk in prog.psd_blocks), default=0.0)
    return {
        "primal": max(soc_viol, max(0.0, -min_eig)),
        "equality": float(np.linalg.norm(eq, np.inf)) if eq.size else 0.0,
        "min_psd_eig": min_eig,
    }
