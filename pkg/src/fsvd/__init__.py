"""Frequency-selective Vandermonde decomposition and band-limited line spectral estimation.

Submodules:

``core``         moment sequences, torus intervals, atomic measures, atoms
``trigpoly``     the degree-one selector polynomial of an arc and ``T_g``
``vandermonde``  Vandermonde decomposition of PSD Toeplitz matrices, full band or one arc
``sdp``          small conic-program layer over clarabel and cvxopt
``moments``      truncated trigonometric K-moment problem with dual certificates
``spectral``     band-limited atomic norm, signal completion, frequency retrieval
``cli``          ``fsvd`` command line
"""

from .core import (
    AtomicMeasure,
    BandSet,
    FsvdError,
    MomentSequence,
    NotRepresentableError,
    NumericalFailureError,
    TorusInterval,
    atom_matrix,
    atom_vector,
    moments_from_measure,
    toeplitz_from_moments,
)
from .moments import MomentResult, MomentStatus, SolverFailureError, representing_measure
from .spectral import LSEProblem, LSESolution, fs_anm_complete, fs_anm_dual, fs_atomic_norm
from .vandermonde import fs_vandermonde_decompose, vandermonde_decompose

__version__ = "0.1.0"

__all__ = [
    "AtomicMeasure",
    "BandSet",
    "FsvdError",
    "MomentSequence",
    "NotRepresentableError",
    "NumericalFailureError",
    "TorusInterval",
    "atom_matrix",
    "atom_vector",
    "moments_from_measure",
    "toeplitz_from_moments",
    "MomentResult",
    "MomentStatus",
    "SolverFailureError",
    "representing_measure",
    "LSEProblem",
    "LSESolution",
    "fs_anm_complete",
    "fs_anm_dual",
    "fs_atomic_norm",
    "fs_vandermonde_decompose",
    "vandermonde_decompose",
]
