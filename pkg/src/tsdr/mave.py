"""Minimum average variance estimation, plain and with monotone transforms.

Both fits minimize the local-linear criterion

    (1/n) sum_j sum_i w_ij (y_i - a_j - b_j^T B^T (f_i - f_j))^2
        + lam * sum_k int (D^2 s_k)^2

where ``f_k = C_k + int exp(s_k)`` is a monotone transform of the k-th
(standardized) predictor. Classical MAVE keeps every ``f_k`` the identity.
The transformed fit cycles through three block updates:

1. transform coefficients, one predictor at a time (Gauss-Seidel sweep), each
   block solved by damped Gauss-Newton steps with step halving;
2. ``B`` from the Kronecker-structured weighted normal equations, followed by
   re-standardization of the transforms and orthonormalization of ``B``;
3. kernel weights on ``B^T f`` and the local intercepts/slopes ``(a_j, b_j)``.

Arrays indexed ``[i, j]`` follow the criterion: ``i`` is the observation,
``j`` the local point, and weight columns ``W[:, j]`` sum to one.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantColumn, PenaltySingular, SingularLocalFit, SingularNormalEquations, TsdrError
from .metrics import vcc
from .transforms import MonotoneTransform, SplineBasis, standardize_columns, standardize_transform

log = logging.getLogger(__name__)

DEFAULT_LAMBDA = 1e-3
DEFAULT_N_FUNCS = 6


@dataclass
class MaveOptions:
    bandwidth_scale: float = 1.0
    max_iter: int = 50
    tol: float = 1e-5
    ridge: float = 1e-8
    # Step 1: Gauss-Seidel sweeps and the Gauss-Newton loop inside each block
    max_sweeps: int = 1
    sweep_tol: float = 1e-6
    inner_max_iter: int = 1
    inner_tol: float = 1e-6
    max_halvings: int = 30


def bandwidth(n: int, d: int, scale: float = 1.0) -> float:
    return scale * n ** (-1.0 / (d + 4))


# ---------------------------------------------------------------------------
# building blocks


def kernel_weights(U, h: float) -> np.ndarray:
    """Gaussian product-kernel weights on the rows of ``U``, normalized per column."""
    U = np.asarray(U, dtype=float)
    U = U[:, None] if U.ndim == 1 else U
    sq = np.sum(U**2, axis=1)
    D2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * U @ U.T, 0.0)
    K = np.exp(-D2 / (2.0 * h * h))
    return K / K.sum(axis=0, keepdims=True)


def local_predictions(f, B, a, b) -> np.ndarray:
    """``P[i, j] = a_j + b_j^T B^T (f_i - f_j)``."""
    U = np.asarray(f) @ B
    return a[None, :] + U @ b.T - np.sum(U * b, axis=1)[None, :]


def weighted_rss(f, y, B, a, b, weights) -> float:
    R = y[:, None] - local_predictions(f, B, a, b)
    return float(np.sum(weights * R * R))


def update_local(f, y, B, weights, ridge: float = 1e-8):
    """Local linear fits ``(a_j, b_j)`` for every ``j`` under fixed weights.

    Local designs whose Gram matrix is numerically singular get a small ridge
    on the slope block.
    """
    f = np.asarray(f, dtype=float)
    y = np.asarray(y, dtype=float)
    U = f @ B
    n, d = U.shape
    D = U[:, None, :] - U[None, :, :]
    Z = np.concatenate([np.ones((n, n, 1)), D], axis=2)
    G = np.einsum("ij,ijk,ijl->jkl", weights, Z, Z)
    rhs = np.einsum("ij,ijk,i->jk", weights, Z, y)
    eig = np.linalg.eigvalsh(G)
    bad = eig[:, 0] <= 1e-12 * np.maximum(eig[:, -1], 1e-300)
    if np.any(bad):
        scale = np.trace(G[bad], axis1=1, axis2=2) / (d + 1)
        pad = np.zeros((d + 1, d + 1))
        pad[1:, 1:] = np.eye(d)
        G = G.copy()
        G[bad] += np.maximum(ridge * scale, 1e-12)[:, None, None] * pad
    try:
        theta = np.linalg.solve(G, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SingularLocalFit("local linear fit is singular even after ridge") from exc
    if not np.all(np.isfinite(theta)):
        raise SingularLocalFit("local linear fit produced non-finite values")
    return theta[:, 0], theta[:, 1:]


def solve_B(f, y, a, b, weights, ridge: float = 1e-8) -> np.ndarray:
    """Unnormalized ``B`` from the weighted normal equations.

    With ``x_ij = f^{ij} kron b_j`` and ``vec(B^T)`` as unknown, solves
    ``sum w_ij x_ij x_ij^T vec(B^T) = sum w_ij x_ij (y_i - a_j)``.
    """
    f = np.asarray(f, dtype=float)
    n, p = f.shape
    d = b.shape[1]
    F = f[:, None, :] - f[None, :, :]
    S = np.einsum("ij,ijk,ijl->jkl", weights, F, F)
    A = np.einsum("jkl,jm,jn->kmln", S, b, b).reshape(p * d, p * d)
    R = weights * (y[:, None] - a[None, :])
    v = np.einsum("ij,ijk->jk", R, F)
    rhs = np.einsum("jk,jm->km", v, b).reshape(p * d)
    A = 0.5 * (A + A.T)
    try:
        sol = np.linalg.solve(A, rhs)
        ok = np.all(np.isfinite(sol)) and np.linalg.cond(A) < 1e14
    except np.linalg.LinAlgError:
        ok = False
    if not ok:
        bump = ridge * max(np.trace(A) / (p * d), 1e-300)
        try:
            sol = np.linalg.solve(A + bump * np.eye(p * d), rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularNormalEquations("normal equations for B are singular") from exc
        if not np.all(np.isfinite(sol)):
            raise SingularNormalEquations("normal equations for B are singular")
    return sol.reshape(p, d)


def orthonormalize(B_raw):
    """``B_raw = Q R`` with ``diag(R) > 0``; returns ``(Q, R)``."""
    Q, R = np.linalg.qr(B_raw)
    sign = np.where(np.diag(R) < 0, -1.0, 1.0)
    return Q * sign, R * sign[:, None]


def update_B(f, y, a, b, weights, ridge: float = 1e-8) -> np.ndarray:
    """Step 2 solution with orthonormal columns."""
    return orthonormalize(solve_B(f, y, a, b, weights, ridge))[0]


def opg_directions(f, y, d: int, h: float, ridge: float = 1e-8) -> np.ndarray:
    """Leading eigenvectors of the averaged outer product of full-dimensional local slopes."""
    p = f.shape[1]
    W = kernel_weights(f, h)
    _, b = update_local(f, y, np.eye(p), W, ridge)
    vals, vecs = np.linalg.eigh(b.T @ b)
    return vecs[:, ::-1][:, :d]


# ---------------------------------------------------------------------------
# transform block (Step 1)


@dataclass(frozen=True, eq=False)
class GaussJordanState:
    """Linearized block problem at the current coefficients ``c``."""

    c: np.ndarray
    H: np.ndarray
    s: np.ndarray
    Xstar: np.ndarray | None = None
    rstar: np.ndarray | None = None


@dataclass(eq=False)
class BlockProblem:
    """Criterion restricted to the coefficients of transform ``l``.

    ``partial[i, j]`` is the residual with the contribution of predictor ``l``
    removed and ``beta[j] = b_j^T B_l``.
    """

    x: np.ndarray
    partial: np.ndarray
    beta: np.ndarray
    weights: np.ndarray
    transform: MonotoneTransform
    lam: float
    sqrt_w: np.ndarray = field(init=False, repr=False)
    penalty: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.sqrt_w = np.sqrt(self.weights)
        self.penalty = self.transform.basis.penalty

    @classmethod
    def assemble(cls, l, x, y, a, b, B, weights, transforms, lam) -> "BlockProblem":
        f = np.column_stack([tr(x[:, k]) for k, tr in enumerate(transforms)])
        beta = b @ B[l]
        full = y[:, None] - local_predictions(f, B, a, b)
        fl = f[:, l]
        partial = full + beta[None, :] * (fl[:, None] - fl[None, :])
        return cls(x[:, l], partial, beta, weights, transforms[l], lam)

    @property
    def n(self) -> int:
        return self.x.size

    def residual(self, c) -> np.ndarray:
        g, _ = self.transform.with_coeffs(c).integral_and_jacobian(self.x)
        return self.partial - self.beta[None, :] * (g[:, None] - g[None, :])

    def objective(self, c) -> float:
        """Block criterion: weighted local RSS / n plus this block's roughness penalty."""
        c = np.asarray(c, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            R = self.residual(c)
            val = np.sum(self.weights * R * R) / self.n + self.lam * c @ self.penalty @ c
        return float(val) if np.isfinite(val) else np.inf

    def state(self, c, materialize: bool = False) -> GaussJordanState:
        """Curvature ``H`` and half-gradient ``s`` at ``c``.

        ``H = X*^T X* / n + lam P`` and ``s = -X*^T r* / n + lam P c`` are
        formed from n-by-n contractions; the n^2-row ``X*`` and ``r*`` are only
        built when ``materialize`` is set.
        """
        c = np.asarray(c, dtype=float)
        g, J = self.transform.with_coeffs(c).integral_and_jacobian(self.x)
        R = self.partial - self.beta[None, :] * (g[:, None] - g[None, :])
        omega = self.weights * (self.beta**2)[None, :]
        JtOJ = J.T @ omega @ J
        XtX = (J.T * omega.sum(axis=1)) @ J + (J.T * omega.sum(axis=0)) @ J - JtOJ - JtOJ.T
        Q = self.weights * self.beta[None, :] * R
        Xtr = J.T @ Q.sum(axis=1) - J.T @ Q.sum(axis=0)
        H = XtX / self.n + self.lam * self.penalty
        s = -Xtr / self.n + self.lam * self.penalty @ c
        Xstar = rstar = None
        if materialize:
            Jd = J[:, None, :] - J[None, :, :]
            Xstar = ((self.sqrt_w * self.beta[None, :])[..., None] * Jd).reshape(-1, c.size)
            rstar = (self.sqrt_w * R).ravel()
        return GaussJordanState(c, 0.5 * (H + H.T), s, Xstar, rstar)


def _solve_step(H, s) -> np.ndarray:
    m = H.shape[0]
    base = max(np.trace(H) / m, 1e-300)
    for mu in (0.0, 1e-12, 1e-10, 1e-8, 1e-6):
        try:
            L = np.linalg.cholesky(H + mu * base * np.eye(m))
        except np.linalg.LinAlgError:
            continue
        z = np.linalg.solve(L, -s)
        return np.linalg.solve(L.T, z)
    raise PenaltySingular("block curvature matrix is singular after repair")


def gauss_jordan_block(problem: BlockProblem, options: MaveOptions | None = None) -> MonotoneTransform:
    """Minimize the block criterion over the coefficients of one transform.

    Each step solves ``H delta = -s`` and halves the step until the criterion
    does not increase. Stops when ``max |delta| < inner_tol`` or after
    ``inner_max_iter`` steps.
    """
    opts = options or MaveOptions()
    c = problem.transform.coeffs.copy()
    current = problem.objective(c)
    for _ in range(opts.inner_max_iter):
        st = problem.state(c)
        if not np.any(st.s):
            break
        delta = _solve_step(st.H, st.s)
        step = 1.0
        for _ in range(opts.max_halvings):
            trial = c + step * delta
            val = problem.objective(trial)
            if val <= current:
                break
            step *= 0.5
        else:
            break
        c, current = trial, val
        if np.max(np.abs(step * delta)) < opts.inner_tol:
            break
    return problem.transform.with_coeffs(c)


# ---------------------------------------------------------------------------
# fits


@dataclass(frozen=True, eq=False)
class MaveFit:
    """Result of ``mave_fit`` / ``tmave_fit``.

    ``f`` holds the fitted (standardized) transformed predictors at the
    training points; ``transforms`` act on predictors rescaled by
    ``x_shift`` and ``x_scale``. ``trace`` lists the criterion after each
    block update of every outer iteration, in the order
    ``(start, step1, step2, step3_reweighted, step3)``.
    """

    B: np.ndarray
    a: np.ndarray
    b: np.ndarray
    weights: np.ndarray
    transforms: tuple | None
    f: np.ndarray
    x_shift: np.ndarray
    x_scale: np.ndarray
    bandwidth: float
    rss: float
    iterations: int
    converged: bool
    lam: float = 0.0
    trace: tuple = ()

    @property
    def d(self) -> int:
        return self.B.shape[1]

    def transform(self, X) -> np.ndarray:
        """Map raw predictors to the fitted transformed scale."""
        x = (np.asarray(X, dtype=float) - self.x_shift) / self.x_scale
        if self.transforms is None:
            return x
        return np.column_stack([tr(x[:, k]) for k, tr in enumerate(self.transforms)])

    def predictors(self, X) -> np.ndarray:
        return self.transform(X) @ self.B

    @property
    def directions(self) -> np.ndarray:
        """Directions acting on the raw predictors (classical MAVE) or on the
        fitted transformed predictors ``f`` (T-MAVE)."""
        if self.transforms is None:
            return self.B / self.x_scale[:, None]
        return self.B


def penalized_criterion(f, y, B, a, b, weights, transforms=None, lam: float = 0.0) -> float:
    n = f.shape[0]
    val = weighted_rss(f, y, B, a, b, weights) / n
    if transforms is not None and lam:
        val += lam * sum(tr.roughness() for tr in transforms)
    return val


def _check_inputs(X, y, d):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if y.size != n:
        raise ValueError("X and y have different numbers of rows")
    if not 1 <= d <= p:
        raise ValueError(f"d must lie in 1..{p}")
    if n <= d:
        raise ValueError("need n > d")
    return X, y


def _mave_iterations(f, y, B, h, opts, a=None, b=None):
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        W = kernel_weights(f @ B, h)
        a, b = update_local(f, y, B, W, opts.ridge)
        B_new = update_B(f, y, a, b, W, opts.ridge)
        change = 1.0 - vcc(B_new, B)
        B = B_new
        if change < opts.tol:
            converged = True
            break
    W = kernel_weights(f @ B, h)
    a, b = update_local(f, y, B, W, opts.ridge)
    return B, a, b, W, it, converged


def mave_fit(X, y, d: int, h: float | None = None, options: MaveOptions | None = None, B0=None) -> MaveFit:
    """Classical MAVE on standardized predictors.

    Starts from outer-product-of-gradients directions (full-dimensional kernel)
    unless ``B0`` is given, then alternates kernel reweighting with local fits
    and the ``B`` update until ``1 - VCC`` between iterates falls below ``tol``.
    """
    opts = options or MaveOptions()
    X, y = _check_inputs(X, y, d)
    n, p = X.shape
    x, shift, scale = standardize_columns(X)
    h = bandwidth(n, d, opts.bandwidth_scale) if h is None else h
    if B0 is None:
        B0 = opg_directions(x, y, d, bandwidth(n, p, opts.bandwidth_scale), opts.ridge)
    B0 = orthonormalize(np.asarray(B0, dtype=float))[0]
    B, a, b, W, it, converged = _mave_iterations(x, y, B0, h, opts)
    if not converged:
        warnings.warn(f"MAVE did not converge in {opts.max_iter} iterations", RuntimeWarning, stacklevel=2)
    rss = weighted_rss(x, y, B, a, b, W)
    return MaveFit(B, a, b, W, None, x, shift, scale, h, rss, it, converged)


def tmave_fit(
    X,
    y,
    d: int,
    lam: float = DEFAULT_LAMBDA,
    basis: SplineBasis | list | None = None,
    h: float | None = None,
    options: MaveOptions | None = None,
    n_funcs: int = DEFAULT_N_FUNCS,
    init: MaveFit | None = None,
) -> MaveFit:
    """MAVE with jointly estimated monotone spline transforms of each predictor.

    ``basis`` may be one ``SplineBasis`` shared by all predictors, a list with
    one per predictor, or ``None`` to build ``n_funcs``-function cubic bases on
    sample quantiles of each predictor (after scaling to [0, 1]). ``init`` supplies a
    classical MAVE fit on the same data to start from.
    """
    opts = options or MaveOptions()
    X, y = _check_inputs(X, y, d)
    n, p = X.shape
    # transforms act on predictors min-max scaled to [0, 1], so the roughness
    # penalty has the same meaning whatever the spread of a predictor
    shift = X.min(axis=0)
    scale = X.max(axis=0) - shift
    if np.any(scale <= 0):
        raise ConstantColumn(f"constant column(s) {np.flatnonzero(scale <= 0).tolist()}")
    x = (X - shift) / scale
    h = bandwidth(n, d, opts.bandwidth_scale) if h is None else h
    if basis is None:
        bases = [SplineBasis.from_sample(x[:, k], n_funcs) for k in range(p)]
    elif isinstance(basis, SplineBasis):
        bases = [basis] * p
    else:
        bases = list(basis)

    transforms = []
    for k in range(p):
        tr = MonotoneTransform.identity(bases[k])
        _, mu, sd = standardize_transform(tr(x[:, k]))
        transforms.append(tr.standardized(mu, sd))
    f = np.column_stack([tr(x[:, k]) for k, tr in enumerate(transforms)])

    if init is None:
        init = mave_fit(X, y, d, h, opts)
    B, a, b, W = init.B.copy(), init.a.copy(), init.b.copy(), init.weights.copy()

    def crit():
        return penalized_criterion(f, y, B, a, b, W, transforms, lam)

    trace = []
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        B_prev = B
        c_start = crit()

        # Step 1: Gauss-Seidel over predictors
        for _ in range(opts.max_sweeps):
            moved = 0.0
            for l in range(p):
                prob = BlockProblem.assemble(l, x, y, a, b, B, W, transforms, lam)
                new = gauss_jordan_block(prob, opts)
                moved = max(moved, float(np.max(np.abs(new.coeffs - transforms[l].coeffs))))
                transforms[l] = new
                f[:, l] = new(x[:, l])
            if moved < opts.sweep_tol:
                break
        c_step1 = crit()

        # Step 2: B, then re-standardize f and orthonormalize B without changing the fit
        B_raw = solve_B(f, y, a, b, W, opts.ridge)
        for k in range(p):
            f[:, k], mu, sd = standardize_transform(f[:, k])
            transforms[k] = transforms[k].standardized(mu, sd)
            B_raw[k] *= sd
        B, R = orthonormalize(B_raw)
        b = b @ R.T
        c_step2 = crit()

        # Step 3: refresh weights, then local fits
        W = kernel_weights(f @ B, h)
        c_reweighted = crit()
        a, b = update_local(f, y, B, W, opts.ridge)
        c_step3 = crit()
        trace.append((c_start, c_step1, c_step2, c_reweighted, c_step3))

        change = 1.0 - vcc(B, B_prev)
        log.debug("T-MAVE iteration %d: criterion %.6g, subspace change %.3g", it, c_step3, change)
        if change < opts.tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"T-MAVE did not converge in {opts.max_iter} iterations", RuntimeWarning, stacklevel=2)
    rss = weighted_rss(f, y, B, a, b, W)
    return MaveFit(
        B, a, b, W, tuple(transforms), f.copy(), shift, scale, h, rss, it, converged, lam, tuple(trace)
    )


# ---------------------------------------------------------------------------
# structural dimension


@dataclass(frozen=True)
class RssDimension:
    k: int
    criterion: dict
    rss: dict
    fits: dict = field(repr=False, default_factory=dict)


def rss_criterion(rss: float, n: int, k: int, h: float) -> float:
    return float(np.log(rss / n) + np.log(n) / (n * h**k) * k)


def rss_dimension(
    X,
    y,
    k_max: int | None = None,
    method: str = "T-MAVE",
    lam: float = DEFAULT_LAMBDA,
    n_funcs: int = DEFAULT_N_FUNCS,
    options: MaveOptions | None = None,
) -> RssDimension:
    """Choose ``k`` minimizing ``log(RSS_k / n) + k log(n) / (n h_k^k)``.

    ``h_k`` is the bandwidth used by the dimension-``k`` fit. A ``k`` whose
    fit fails is skipped with a warning.
    """
    opts = options or MaveOptions()
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    k_max = min(p, 4) if k_max is None else k_max
    if not 1 <= k_max <= p:
        raise ValueError(f"k_max must lie in 1..{p}")
    values, rsses, fits = {}, {}, {}
    for k in range(1, k_max + 1):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                if method == "MAVE":
                    fit = mave_fit(X, y, k, options=opts)
                elif method == "T-MAVE":
                    fit = tmave_fit(X, y, k, lam=lam, n_funcs=n_funcs, options=opts)
                else:
                    raise ValueError(f"unknown MAVE method {method!r}")
        except TsdrError as exc:
            warnings.warn(f"dimension {k} skipped: {exc}", RuntimeWarning, stacklevel=2)
            continue
        fits[k] = fit
        rsses[k] = fit.rss
        values[k] = rss_criterion(fit.rss, n, k, fit.bandwidth)
    if not values:
        raise TsdrError("no dimension could be fitted")
    best = min(values, key=lambda k: (values[k], k))
    return RssDimension(best, values, rsses, fits)
