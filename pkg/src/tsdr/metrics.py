"""Subspace recovery accuracy: vector and trace correlation coefficients."""
from __future__ import annotations

import numpy as np
from scipy.linalg import qr

from .errors import DimensionMismatch


def orthonormal_basis(B) -> np.ndarray:
    """Orthonormal columns spanning ``B`` (QR with column pivoting)."""
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    d = B.shape[1]
    scaled = B / np.linalg.norm(B, axis=0)
    Q, R, _ = qr(scaled, mode="economic", pivoting=True)
    if abs(R[d - 1, d - 1]) <= 1e-10:
        raise DimensionMismatch(f"basis is rank deficient (expected rank {d})")
    return Q[:, :d]


def squared_canonical_correlations(estimate, truth) -> np.ndarray:
    """Eigenvalues ``phi_l^2`` of ``Bo_hat^T Bo Bo^T Bo_hat``, descending, clipped to [0, 1]."""
    A = np.asarray(estimate, dtype=float)
    B = np.asarray(truth, dtype=float)
    A = A[:, None] if A.ndim == 1 else A
    B = B[:, None] if B.ndim == 1 else B
    if A.shape != B.shape:
        raise DimensionMismatch(f"estimate {A.shape} and truth {B.shape} differ")
    s = np.linalg.svd(orthonormal_basis(A).T @ orthonormal_basis(B), compute_uv=False)
    return np.clip(s**2, 0.0, 1.0)


def vcc(estimate, truth) -> float:
    """Vector correlation coefficient ``(prod phi_l^2)^(1/2)``."""
    return float(np.sqrt(np.prod(squared_canonical_correlations(estimate, truth))))


def tcc(estimate, truth) -> float:
    """Trace correlation coefficient ``(mean phi_l^2)^(1/2)``."""
    return float(np.sqrt(np.mean(squared_canonical_correlations(estimate, truth))))
