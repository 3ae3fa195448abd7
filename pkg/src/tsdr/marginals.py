"""Marginal distributions used by the simulation designs.

Normal-mixture parameters follow the test densities of Marron and Wand (1992),
"Exact mean integrated squared error", Ann. Statist. 20, Table 1:

    #2 skewed unimodal    1/5 N(0,1) + 1/5 N(1/2,(2/3)^2) + 3/5 N(13/12,(5/9)^2)
    #3 strongly skewed    sum_{l=0}^{7} 1/8 N(3((2/3)^l - 1), (2/3)^(2l))
    #4 kurtotic unimodal  2/3 N(0,1) + 1/3 N(0,(1/10)^2)
    #5 outlier            1/10 N(0,1) + 9/10 N(0,(1/10)^2)
    #6 bimodal            1/2 N(-1,(2/3)^2) + 1/2 N(1,(2/3)^2)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import ndtr, ndtri

from .errors import OutOfRange, UnknownScenario

_l = np.arange(8)
MARRON_WAND = {
    "mw2": ([1 / 5, 1 / 5, 3 / 5], [0.0, 0.5, 13 / 12], [1.0, 2 / 3, 5 / 9]),
    "mw3": ([1 / 8] * 8, list(3 * ((2 / 3) ** _l - 1)), list((2 / 3) ** _l)),
    "mw4": ([2 / 3, 1 / 3], [0.0, 0.0], [1.0, 0.1]),
    "mw5": ([1 / 10, 9 / 10], [0.0, 0.0], [1.0, 0.1]),
    "mw6": ([1 / 2, 1 / 2], [-1.0, 1.0], [2 / 3, 2 / 3]),
}


@dataclass(frozen=True, eq=False)
class NormalMixture:
    weights: np.ndarray
    means: np.ndarray
    sds: np.ndarray

    def __post_init__(self):
        for name in ("weights", "means", "sds"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum(self.weights * ndtr((x[..., None] - self.means) / self.sds), axis=-1)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum(self.weights * ndtr((self.means - x[..., None]) / self.sds), axis=-1)

    def _invert(self, fn, q, increasing):
        # vectorized bisection run to floating-point resolution of the bracket
        q = np.asarray(q, dtype=float)
        lo = np.full(q.shape, np.min(self.means - 40 * self.sds))
        hi = np.full(q.shape, np.max(self.means + 40 * self.sds))
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = fn(mid) < q if increasing else fn(mid) > q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(mid))):
                break
        return 0.5 * (lo + hi)

    def ppf(self, q):
        return self._invert(self.cdf, q, True)

    def isf(self, q):
        return self._invert(self.sf, q, False)


def _asymmetric_laplace():
    # "central skew-Laplace with parameters 2 and 6" read as scale 2, asymmetry 6
    return stats.laplace_asymmetric(kappa=6.0, scale=2.0)


_FACTORIES = {
    "normal": lambda: stats.norm(),
    "skew_laplace": _asymmetric_laplace,
    "beta_3_0.5": lambda: stats.beta(3.0, 0.5),
    "exponential": lambda: stats.expon(),
    "t2": lambda: stats.t(2),
    "t3": lambda: stats.t(3),
    "t4": lambda: stats.t(4),
    "cauchy": lambda: stats.cauchy(),
    **{key: (lambda key=key: NormalMixture(*MARRON_WAND[key])) for key in MARRON_WAND},
}

MARGINALS = tuple(_FACTORIES)


def get_marginal(name: str):
    """Object exposing ``cdf``, ``sf``, ``ppf`` and ``isf`` for a named marginal."""
    try:
        return _FACTORIES[name]()
    except KeyError:
        raise UnknownScenario(f"unknown marginal {name!r}; valid: {', '.join(MARGINALS)}") from None


def marginal_quantile(dist: str, p):
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0) & (p_arr < 1))):
        raise OutOfRange("probability must lie strictly between 0 and 1")
    out = get_marginal(dist).ppf(p_arr)
    return out if np.ndim(out) else float(out)


def from_normal(dist, f):
    """``F^{-1}(Phi(f))``, using the upper tail for positive ``f`` to keep precision."""
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    neg = f <= 0
    out[neg] = dist.ppf(ndtr(f[neg]))
    out[~neg] = dist.isf(ndtr(-f[~neg]))
    return out


def to_normal(dist, x):
    """``Phi^{-1}(F(x))``, the inverse of ``from_normal``."""
    x = np.asarray(x, dtype=float)
    lower = dist.cdf(x)
    upper = dist.sf(x)
    return np.where(lower <= upper, ndtri(lower), -ndtri(upper))
