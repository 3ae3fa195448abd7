"""Marginal predictor transformations.

Three families live here: rank-based normal scores, the Yeo-Johnson power
family with a likelihood-fitted exponent, and monotone transforms written as
``f(t) = C + int_{t1}^{t} exp(s(u)) du`` with ``s`` expanded in a spline basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import stats
from scipy.interpolate import BSpline
from scipy.optimize import minimize_scalar
from scipy.special import ndtri

from .errors import ConstantColumn, DegenerateSample

# nodes per inter-knot interval for the integral in f and its coefficient gradient
N_QUAD = 10
YJ_BOUNDS = (-2.0, 2.0)


# ---------------------------------------------------------------------------
# empirical CDF and normal scores


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    """Rescaled empirical CDF ``F(t) = #{x_i <= t} / (n + 1)``."""

    sorted_values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.sorted_values, dtype=float).ravel())
        if v.size == 0:
            raise ValueError("EmpiricalCdf needs at least one value")
        object.__setattr__(self, "sorted_values", v)

    @property
    def n(self) -> int:
        return self.sorted_values.size

    def __call__(self, t):
        counts = np.searchsorted(self.sorted_values, t, side="right")
        return counts / (self.n + 1.0)


def rescaled_ecdf(cdf: EmpiricalCdf, t):
    return cdf(t)


def normal_scores(data) -> np.ndarray:
    """Replace every column by ``Phi^{-1}`` of its rescaled empirical CDF.

    Ties share a score (counting uses ``<=``). A single observation maps to 0.
    """
    x = np.asarray(data, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    n = x.shape[0]
    if n > 1:
        const = np.ptp(x, axis=0) == 0
        if np.any(const):
            raise ConstantColumn(f"constant column(s) {np.flatnonzero(const).tolist()}")
    ranks = stats.rankdata(x, method="max", axis=0)
    z = ndtri(ranks / (n + 1.0))
    return z[:, 0] if squeeze else z


def standardize_transform(values):
    """Center and scale to mean 0, variance 1 (denominator n).

    Returns ``(standardized, shift, scale)`` so that
    ``standardized = (values - shift) / scale``.
    """
    v = np.asarray(values, dtype=float)
    shift = v.mean()
    scale = np.sqrt(np.mean((v - shift) ** 2))
    if not scale > 1e-300 or scale <= 1e-14 * max(1.0, np.abs(v).max()):
        raise ConstantColumn("cannot standardize a constant vector")
    return (v - shift) / scale, shift, scale


def standardize_columns(X):
    """Column-wise ``standardize_transform``; returns ``(Z, shifts, scales)``."""
    X = np.asarray(X, dtype=float)
    shifts = X.mean(axis=0)
    scales = np.sqrt(np.mean((X - shifts) ** 2, axis=0))
    bad = scales <= 1e-14 * np.maximum(1.0, np.abs(X).max(axis=0))
    if np.any(bad):
        raise ConstantColumn(f"constant column(s) {np.flatnonzero(bad).tolist()}")
    return (X - shifts) / scales, shifts, scales


# ---------------------------------------------------------------------------
# Yeo-Johnson


def yeo_johnson_apply(x, lam: float):
    """Yeo-Johnson transform of ``x`` with exponent ``lam``.

    The ``expm1``/``log1p`` forms keep the map continuous through the
    logarithmic branches at ``lam = 0`` and ``lam = 2``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    xp = x[pos]
    xn = x[~pos]
    if abs(lam) < 1e-12:
        out[pos] = np.log1p(xp)
    else:
        out[pos] = np.expm1(lam * np.log1p(xp)) / lam
    if abs(lam - 2.0) < 1e-12:
        out[~pos] = -np.log1p(-xn)
    else:
        out[~pos] = -np.expm1((2.0 - lam) * np.log1p(-xn)) / (2.0 - lam)
    return out if out.ndim else float(out)


def _yj_profile_loglik(lam, x, log_jac):
    z = yeo_johnson_apply(x, lam)
    var = np.var(z)
    if not var > 0:
        return -np.inf
    return -0.5 * x.size * np.log(var) + (lam - 1.0) * log_jac


@dataclass(frozen=True)
class YeoJohnson:
    lam: float

    def __call__(self, x):
        return yeo_johnson_apply(x, self.lam)


def yeo_johnson_fit(sample, bounds=YJ_BOUNDS) -> YeoJohnson:
    """Profile maximum-likelihood exponent over ``bounds``.

    Falls back to ``lam = 1`` when the fitted exponent does not bring the
    sample skewness closer to zero.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 3:
        raise DegenerateSample("need at least 3 observations")
    if np.ptp(x) == 0:
        raise DegenerateSample("sample has zero variance")
    log_jac = np.sum(np.sign(x) * np.log1p(np.abs(x)))
    res = minimize_scalar(
        lambda lam: -_yj_profile_loglik(lam, x, log_jac),
        bounds=bounds,
        method="bounded",
        options={"xatol": 1e-7},
    )
    lam = float(res.x)
    if abs(stats.skew(yeo_johnson_apply(x, lam))) > abs(stats.skew(x)):
        lam = 1.0
    return YeoJohnson(lam)


def yeo_johnson_columns(X):
    """Fit and apply Yeo-Johnson per column; returns ``(transformed, lambdas)``."""
    X = np.asarray(X, dtype=float)
    fits = [yeo_johnson_fit(X[:, j]) for j in range(X.shape[1])]
    out = np.column_stack([fit(X[:, j]) for j, fit in enumerate(fits)])
    return out, np.array([fit.lam for fit in fits])


# ---------------------------------------------------------------------------
# spline basis for the log-derivative


@dataclass(frozen=True, eq=False)
class SplineBasis:
    """Basis ``{1, theta_1, ..., theta_M}`` on ``[knots[0], knots[-1]]``.

    ``theta_m`` are the B-splines of the given degree on ``knots`` with the
    first one dropped, which keeps the set linearly independent next to the
    constant.
    """

    knots: np.ndarray
    degree: int = 3

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if k.ndim != 1 or k.size < 2 or np.any(np.diff(k) <= 0):
            raise ValueError("knots must be strictly increasing with at least 2 entries")
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        object.__setattr__(self, "knots", k)

    @classmethod
    def from_sample(cls, x, n_funcs: int = 6, degree: int = 3) -> "SplineBasis":
        """Interior knots at equally spaced sample quantiles over ``[min, max]``.

        ``degree`` is lowered to ``n_funcs`` when there are too few functions
        for it, so ``n_funcs = 0`` gives the constant-only basis.
        """
        x = np.asarray(x, dtype=float)
        lo, hi = float(x.min()), float(x.max())
        if not hi > lo:
            raise ConstantColumn("cannot build a basis on a constant predictor")
        deg = min(degree, n_funcs)
        n_int = n_funcs - deg
        interior = np.quantile(x, np.arange(1, n_int + 1) / (n_int + 1))
        if n_int and (np.any(np.diff(interior) <= 0) or interior[0] <= lo or interior[-1] >= hi):
            interior = np.linspace(lo, hi, n_int + 2)[1:-1]
        return cls(np.concatenate([[lo], interior, [hi]]), deg)

    @property
    def lower(self) -> float:
        return float(self.knots[0])

    @property
    def upper(self) -> float:
        return float(self.knots[-1])

    @property
    def n_bsplines(self) -> int:
        return self.knots.size - 2 + self.degree + 1

    @property
    def n_funcs(self) -> int:
        """Number of non-constant functions ``M``."""
        return self.n_bsplines - 1

    @cached_property
    def _spline(self):
        k = self.degree
        t = np.concatenate([[self.lower] * k, self.knots, [self.upper] * k])
        return BSpline(t, np.eye(self.n_bsplines), k, extrapolate=False)

    def design(self, t, deriv: int = 0) -> np.ndarray:
        """Rows ``D^deriv Theta(t)``; ``t`` is clipped into the basis interval."""
        t = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), self.lower, self.upper)
        out = np.zeros((t.size, self.n_funcs + 1))
        if deriv == 0:
            out[:, 0] = 1.0
        if self.n_funcs == 0 or deriv > self.degree:
            return out
        spl = self._spline if deriv == 0 else self._spline.derivative(deriv)
        vals = spl(t)
        # the right endpoint is excluded by the half-open convention of BSpline
        at_top = t >= self.upper
        if np.any(at_top):
            vals[at_top] = spl(np.nextafter(self.upper, -np.inf))
        out[:, 1:] = np.nan_to_num(vals)[:, 1:]
        return out


def _gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def penalty_matrix(basis: SplineBasis) -> np.ndarray:
    """Roughness penalty ``int D^2 Theta D^2 Theta^T`` over the basis interval.

    Four Gauss-Legendre nodes per knot interval integrate the piecewise
    polynomial products exactly up to degree 7.
    """
    m = basis.n_funcs + 1
    if basis.degree < 2:
        return np.zeros((m, m))
    nodes, weights = _gauss_legendre(max(4, basis.degree))
    a, b = basis.knots[:-1], basis.knots[1:]
    half = (b - a) / 2.0
    pts = ((a + b) / 2.0)[:, None] + half[:, None] * nodes[None, :]
    w = (half[:, None] * weights[None, :]).ravel()
    D2 = basis.design(pts.ravel(), deriv=2)
    P = D2.T @ (w[:, None] * D2)
    return 0.5 * (P + P.T)


# ---------------------------------------------------------------------------
# monotone transforms


@dataclass(frozen=True, eq=False)
class MonotoneTransform:
    """``f(t) = C + int_{origin}^{t} exp(Theta(u)^T c) du``.

    Inside the basis interval the integral uses composite Gauss-Legendre
    quadrature; outside it ``f`` continues linearly with the boundary slope.
    """

    coeffs: np.ndarray
    basis: SplineBasis
    constant: float = 0.0
    _nodes: tuple = field(default_factory=lambda: _gauss_legendre(N_QUAD), repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).ravel()
        if c.size != self.basis.n_funcs + 1:
            raise ValueError(f"expected {self.basis.n_funcs + 1} coefficients, got {c.size}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def identity(cls, basis: SplineBasis) -> "MonotoneTransform":
        return cls(np.zeros(basis.n_funcs + 1), basis, 0.0)

    @property
    def origin(self) -> float:
        return self.basis.lower

    def log_derivative(self, t):
        return self.basis.design(t) @ self.coeffs

    def derivative(self, t):
        """``exp(s(t))``; constant beyond the basis interval."""
        return np.exp(self.log_derivative(t))

    def _segment(self, a, b):
        # integrals of exp(s) and Theta*exp(s) over [a_i, b_i] for arrays a, b
        x, w = self._nodes
        half = (b - a) / 2.0
        pts = ((a + b) / 2.0)[:, None] + half[:, None] * x[None, :]
        Th = self.basis.design(pts.ravel())
        e = np.exp(Th @ self.coeffs).reshape(pts.shape)
        ww = half[:, None] * w[None, :] * e
        G = ww.sum(axis=1)
        J = np.einsum("ik,ikm->im", ww, Th.reshape(pts.shape + (Th.shape[1],)))
        return G, J

    @cached_property
    def _cumulative(self):
        k = self.basis.knots
        G, J = self._segment(k[:-1], k[1:])
        Gc = np.concatenate([[0.0], np.cumsum(G)])
        Jc = np.vstack([np.zeros((1, J.shape[1])), np.cumsum(J, axis=0)])
        return Gc, Jc

    def integral_and_jacobian(self, t):
        """Return ``(G(t), J(t))`` where ``G = f - C`` and ``J = dG/dc``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = self.basis.lower, self.basis.upper
        tc = np.clip(t, lo, hi)
        k = self.basis.knots
        idx = np.clip(np.searchsorted(k, tc, side="right") - 1, 0, k.size - 2)
        Gc, Jc = self._cumulative
        g, j = self._segment(k[idx], tc)
        G = Gc[idx] + g
        J = Jc[idx] + j
        out = t != tc
        if np.any(out):
            edge = tc[out]
            Th = self.basis.design(edge)
            slope = np.exp(Th @ self.coeffs)
            dt = t[out] - edge
            G[out] += dt * slope
            J[out] += (dt * slope)[:, None] * Th
        return G, J

    def __call__(self, t):
        G, _ = self.integral_and_jacobian(t)
        val = self.constant + G
        return val if np.ndim(t) else float(val[0])

    def with_coeffs(self, coeffs) -> "MonotoneTransform":
        return MonotoneTransform(coeffs, self.basis, self.constant, self._nodes)

    def standardized(self, shift: float, scale: float) -> "MonotoneTransform":
        """The transform ``(f - shift) / scale`` in the same representation."""
        c = self.coeffs.copy()
        c[0] -= np.log(scale)
        return MonotoneTransform(c, self.basis, (self.constant - shift) / scale, self._nodes)

    def roughness(self) -> float:
        """``int (D^2 s)^2`` over the basis interval."""
        return float(self.coeffs @ self.basis.penalty @ self.coeffs)


SplineBasis.penalty = cached_property(penalty_matrix)
SplineBasis.penalty.__set_name__(SplineBasis, "penalty")


def monotone_eval(tr: MonotoneTransform, t):
    return tr(t)
