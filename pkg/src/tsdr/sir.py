"""Sliced inverse regression with two structural-dimension criteria.

``sir_fit`` works on whatever predictors it is handed; the transformed variants
(normal scores, Yeo-Johnson) are obtained through ``transform_predictors``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import AllZeroSpectrum, DegenerateResponse, SingularCovariance, TooFewObservations
from .transforms import normal_scores, yeo_johnson_columns

DEFAULT_SLICES = 10
EIG_FLOOR = 1e-12
MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class SliceAssignment:
    """Slice labels ``0..H-1`` in increasing order of ``y``."""

    slice_of: np.ndarray
    counts: np.ndarray

    @property
    def H(self) -> int:
        return self.counts.size


def slice_response(y, H: int = DEFAULT_SLICES) -> SliceAssignment:
    """Equal-count slices from the order statistics of ``y``.

    Slice ``h`` ends at sorted position ``ceil(n h / H)``. A run of ties that
    straddles a boundary is kept whole in the lower slice; slices emptied this
    way are dropped, and fewer than two remaining slices is an error.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    if H < 2:
        raise ValueError("need at least 2 slices")
    if n < H:
        raise TooFewObservations(f"{n} observations cannot fill {H} slices")
    order = np.argsort(y, kind="stable")
    ys = y[order]
    ends = np.ceil(n * np.arange(1, H + 1) / H).astype(int)
    ends = np.searchsorted(ys, ys[ends - 1], side="right")
    ends = np.maximum.accumulate(ends)
    counts = np.diff(np.concatenate([[0], ends]))
    counts = counts[counts > 0]
    if counts.size < 2:
        raise DegenerateResponse("response has too few distinct values to slice")
    labels_sorted = np.repeat(np.arange(counts.size), counts)
    slice_of = np.empty(n, dtype=int)
    slice_of[order] = labels_sorted
    return SliceAssignment(slice_of, counts)


def inverse_sqrt(S, floor: float = EIG_FLOOR) -> np.ndarray:
    vals, vecs = np.linalg.eigh(S)
    return (vecs / np.sqrt(np.maximum(vals, floor))) @ vecs.T


@dataclass(frozen=True, eq=False)
class SirFit:
    eigenvalues: np.ndarray
    directions: np.ndarray
    sigma_half_inv: np.ndarray
    mean: np.ndarray
    slice_means: np.ndarray
    slice_counts: np.ndarray
    n: int

    @property
    def p(self) -> int:
        return self.eigenvalues.size

    @property
    def H(self) -> int:
        return self.slice_counts.size

    def candidate_matrix(self) -> np.ndarray:
        w = self.slice_counts / self.n
        return (self.slice_means.T * w) @ self.slice_means

    def basis(self, d: int) -> np.ndarray:
        return self.directions[:, :d]

    def predictors(self, X, d: int) -> np.ndarray:
        """Extracted predictors ``eta_j^T (x - xbar)`` for the leading ``d`` directions."""
        return (np.asarray(X, dtype=float) - self.mean) @ self.basis(d)


def sir_fit(X, y, H: int = DEFAULT_SLICES) -> SirFit:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if np.asarray(y).size != n:
        raise ValueError("X and y have different numbers of rows")
    slices = slice_response(y, H)
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / n
    vals = np.linalg.eigvalsh(cov)
    if not vals[0] > 0 or vals[-1] / vals[0] > MAX_CONDITION:
        raise SingularCovariance("predictor covariance is singular or ill-conditioned")
    root = inverse_sqrt(cov)
    Z = Xc @ root
    means = np.zeros((slices.H, p))
    np.add.at(means, slices.slice_of, Z)
    means /= slices.counts[:, None]
    M = (means.T * (slices.counts / n)) @ means
    M = 0.5 * (M + M.T)
    lam, V = np.linalg.eigh(M)
    lam, V = lam[::-1], V[:, ::-1]
    return SirFit(lam, root @ V, root, mean, means, slices.counts, n)


def sequential_test(fit: SirFit, alpha: float = 0.05) -> int:
    """First ``d`` at which ``n * sum_{j>d} lambda_j`` is not significant.

    Reference distribution is chi-square with ``(p - d)(H - d - 1)`` degrees of
    freedom. Testing stops (returning ``d``) once no degrees of freedom remain.
    """
    lam = fit.eigenvalues
    for d in range(fit.p):
        df = (fit.p - d) * (fit.H - d - 1)
        if df <= 0:
            return d
        stat = fit.n * lam[d:].sum()
        if stat <= stats.chi2.ppf(1.0 - alpha, df):
            return d
    return fit.p


def bic_criterion(fit: SirFit, kappa: float | None = None) -> np.ndarray:
    """Criterion values for ``d = 1..p`` (index 0 holds ``d = 1``)."""
    kappa = np.log(fit.n) if kappa is None else kappa
    sq = np.maximum(fit.eigenvalues, 0.0) ** 2
    total = sq.sum()
    if not total > 0:
        raise AllZeroSpectrum("all eigenvalues are zero")
    d = np.arange(1, fit.p + 1)
    return np.cumsum(sq) / total - kappa / fit.n * d * (d + 1) / 2.0


def bic_dimension(fit: SirFit, kappa: float | None = None) -> int:
    """Maximizer over ``1 <= d <= p``; ties go to the smaller ``d``."""
    return int(np.argmax(bic_criterion(fit, kappa))) + 1


SIR_METHODS = ("SIR", "T-SIR", "YJ-SIR", "f-SIR")


def transform_predictors(X, method: str) -> np.ndarray:
    """Predictors fed to SIR for each member of the family.

    ``f-SIR`` expects the true transformed predictors and passes them through.
    """
    if method == "T-SIR":
        return normal_scores(X)
    if method == "YJ-SIR":
        return yeo_johnson_columns(X)[0]
    if method in ("SIR", "f-SIR"):
        return np.asarray(X, dtype=float)
    raise ValueError(f"unknown SIR method {method!r}")
