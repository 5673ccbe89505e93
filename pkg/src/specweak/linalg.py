"""Dense symmetric eigendecomposition and spectral calculus.

The eigensolver itself is LAPACK (``numpy.linalg.eigh``); this module only
pins down the contract around it: descending order, validation, and the
rank-truncated pseudoinverse used for kernel interpolation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, DimensionZero, NonFinite, NonSymmetric

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class SymEig:
    """Eigen-decomposition ``M = Q diag(eigenvalues) Q^T``.

    Eigenvalues are sorted in non-increasing order and column ``j`` of
    ``eigenvectors`` belongs to ``eigenvalues[j]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def source_dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    def default_rank_tol(self) -> float:
        return self.source_dim * np.finfo(float).eps * max(self.lambda_max, 0.0)

    def reconstruct(self) -> np.ndarray:
        return apply_spectral_function(self, lambda t: t)


def sym_eig(M) -> SymEig:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] == 0:
        raise DimensionZero("empty matrix")
    if not np.all(np.isfinite(M)):
        raise NonFinite("matrix has NaN or Inf entries")
    scale = np.max(np.abs(M))
    asym = np.max(np.abs(M - M.T))
    if asym > SYMMETRY_RTOL * scale:
        raise NonSymmetric(f"asymmetry {asym:.3e} exceeds tolerance")
    w, Q = np.linalg.eigh(0.5 * (M + M.T))
    order = np.argsort(w, kind="stable")[::-1]
    w = w[order]
    Q = Q[:, order]
    # fix the sign convention so results do not depend on LAPACK internals
    pivots = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[pivots, np.arange(Q.shape[1])])
    signs[signs == 0] = 1.0
    return SymEig(eigenvalues=w, eigenvectors=Q * signs)


def _checked_values(e: SymEig, phi: Callable) -> np.ndarray:
    vals = np.asarray(phi(e.eigenvalues), dtype=float)
    if vals.shape != e.eigenvalues.shape:
        vals = np.broadcast_to(vals, e.eigenvalues.shape).astype(float)
    if not np.all(np.isfinite(vals)):
        raise NonFinite("spectral function is not finite on the spectrum")
    return vals


def apply_spectral_function(e: SymEig, phi: Callable) -> np.ndarray:
    """Return ``Q phi(Lambda) Q^T``; ``phi`` must accept an array."""
    vals = _checked_values(e, phi)
    Q = e.eigenvectors
    out = (Q * vals) @ Q.T
    return 0.5 * (out + out.T)


def apply_spectral_function_to(e: SymEig, phi: Callable, b) -> np.ndarray:
    """Return ``phi(M) b`` without forming ``phi(M)``."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != e.source_dim:
        raise DimensionMismatch(f"vector of length {b.shape[0]}, matrix of size {e.source_dim}")
    vals = _checked_values(e, phi)
    Q = e.eigenvectors
    coeffs = Q.T @ b
    if coeffs.ndim == 1:
        return Q @ (vals * coeffs)
    return Q @ (vals[:, None] * coeffs)


def pinv_apply(e: SymEig, b, rank_tol: float | None = None) -> np.ndarray:
    """Apply the rank-truncated pseudoinverse to ``b``.

    Eigenvalues at or below ``rank_tol`` are treated as exact zeros. The
    default tolerance is ``n * eps * lambda_max``.
    """
    if rank_tol is None:
        rank_tol = e.default_rank_tol()
    if rank_tol < 0:
        raise ValueError("rank_tol must be non-negative")
    w = e.eigenvalues
    keep = w > rank_tol
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return apply_spectral_function_to(e, lambda _: inv, b)
