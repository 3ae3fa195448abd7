import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate, stats
from scipy.interpolate import BSpline
from scipy.special import ndtri

from tsdr.errors import ConstantColumn, DegenerateSample
from tsdr.transforms import (
    EmpiricalCdf,
    MonotoneTransform,
    SplineBasis,
    monotone_eval,
    normal_scores,
    penalty_matrix,
    rescaled_ecdf,
    standardize_transform,
    yeo_johnson_apply,
    yeo_johnson_fit,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


# ---------------------------------------------------------------------------
# empirical cdf / normal scores


@pytest.mark.parametrize("t, expected", [(2.0, 0.5), (0.0, 0.0), (3.0, 0.75)])
def test_rescaled_ecdf_small_sample(t, expected):
    assert rescaled_ecdf(EmpiricalCdf(np.array([1.0, 2.0, 3.0])), t) == pytest.approx(expected)


def test_rescaled_ecdf_ties_share_value():
    cdf = EmpiricalCdf(np.array([1.0, 2.0, 2.0, 4.0]))
    assert rescaled_ecdf(cdf, 2.0) == pytest.approx(3 / 5)


def test_normal_scores_single_observation_is_zero():
    assert normal_scores(np.array([[5.0]]))[0, 0] == 0.0


def test_normal_scores_three_points_match_quantile_oracle():
    z = normal_scores(np.array([[1.0], [2.0], [3.0]]))[:, 0]
    # 0.6744897501960817 is the upper quartile of N(0, 1)
    np.testing.assert_allclose(z, [-0.6744897501960817, 0.0, 0.6744897501960817], atol=1e-12)


def test_normal_scores_constant_column_raises():
    with pytest.raises(ConstantColumn):
        normal_scores(np.column_stack([np.arange(5.0), np.ones(5)]))


@settings(max_examples=50, deadline=None)
@given(arrays(np.int64, (30, 2), elements=st.integers(-1000, 1000), unique=True))
def test_normal_scores_invariant_under_increasing_maps(X):
    # integer-valued inputs keep the images strictly ordered in floating point
    X = X.astype(float)
    mapped = np.column_stack([np.arcsinh(X[:, 0]) * 3 + 1, np.exp(X[:, 1] / 100)])
    np.testing.assert_array_equal(normal_scores(X), normal_scores(mapped))


def test_normal_scores_pass_ks_against_standard_normal():
    rng = np.random.default_rng(11)
    X = np.column_stack([rng.exponential(size=800), rng.standard_cauchy(800), rng.beta(3, 0.5, 800)])
    Z = normal_scores(X)
    for j in range(Z.shape[1]):
        assert stats.kstest(Z[:, j], "norm").pvalue > 0.01


# ---------------------------------------------------------------------------
# standardization


def test_standardize_already_standard():
    z, shift, scale = standardize_transform(np.array([-1.0, 1.0]))
    np.testing.assert_allclose(z, [-1.0, 1.0])
    assert shift == 0.0 and scale == 1.0


def test_standardize_shift():
    z, _, _ = standardize_transform(np.array([0.0, 2.0]))
    np.testing.assert_allclose(z, [-1.0, 1.0])


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(2, 40), elements=finite, unique=True))
def test_standardize_postcondition(v):
    z, shift, scale = standardize_transform(v)
    assert abs(z.mean()) < 1e-9
    assert z.var() == pytest.approx(1.0, rel=1e-9)
    np.testing.assert_allclose(z * scale + shift, v, atol=1e-9 * max(1.0, np.abs(v).max()))


# ---------------------------------------------------------------------------
# Yeo-Johnson


def test_yeo_johnson_identity_branch():
    assert yeo_johnson_apply(2.0, 1.0) == pytest.approx(2.0)


def test_yeo_johnson_log_branch():
    assert yeo_johnson_apply(np.e - 1.0, 0.0) == pytest.approx(np.log1p(np.e - 1.0))


def test_yeo_johnson_negative_log_branch():
    assert yeo_johnson_apply(-1.0, 2.0) == pytest.approx(-np.log1p(1.0))


@pytest.mark.parametrize("x", [-3.0, -0.4, 0.0, 0.7, 5.0])
@pytest.mark.parametrize("lam0", [0.0, 2.0])
def test_yeo_johnson_continuous_at_branch_points(x, lam0):
    at = yeo_johnson_apply(x, lam0)
    for eps in (1e-11, -1e-11):
        assert yeo_johnson_apply(x, lam0 + eps) == pytest.approx(at, abs=1e-8)


def test_yeo_johnson_fit_on_normal_sample_near_one():
    x = np.random.default_rng(3).standard_normal(5000)
    assert abs(yeo_johnson_fit(x).lam - 1.0) <= 0.15


def test_yeo_johnson_fit_lognormal_below_one_matches_grid_oracle():
    x = np.exp(np.random.default_rng(4).standard_normal(5000))
    lam = yeo_johnson_fit(x).lam
    assert lam < 1.0
    # independent oracle: profile log-likelihood on a fine grid
    grid = np.linspace(-2, 2, 4001)
    ll = [stats.yeojohnson_llf(g, x) for g in grid]
    assert lam == pytest.approx(grid[int(np.argmax(ll))], abs=2e-3)


def test_yeo_johnson_fit_degenerate():
    with pytest.raises(DegenerateSample):
        yeo_johnson_fit(np.array([2.0, 2.0, 2.0]))


# ---------------------------------------------------------------------------
# spline basis and penalty


def _basis(n_funcs=6, seed=0):
    x = np.random.default_rng(seed).uniform(size=200)
    return SplineBasis.from_sample(x, n_funcs)


def test_penalty_zero_for_linear_basis():
    basis = SplineBasis(np.array([0.0, 0.3, 0.6, 1.0]), degree=1)
    assert np.all(penalty_matrix(basis) == 0.0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=6, unique=True))
def test_penalty_is_psd(interior):
    basis = SplineBasis(np.concatenate([[0.0], np.sort(interior), [1.0]]))
    P = penalty_matrix(basis)
    np.testing.assert_allclose(P, P.T)
    assert np.linalg.eigvalsh(P).min() >= -1e-10 * max(1.0, np.abs(P).max())


def test_penalty_matches_adaptive_quadrature_oracle():
    basis = SplineBasis(np.array([0.0, 0.4, 1.0]))
    P = penalty_matrix(basis)
    k = basis.degree
    t = np.concatenate([[0.0] * k, basis.knots, [1.0] * k])
    m = basis.n_bsplines
    # independent oracle: per-function BSplines integrated with QUADPACK per knot interval
    d2 = [BSpline(t, np.eye(m)[i], k).derivative(2) for i in range(1, m)]
    for a in range(1, m):
        for b in range(1, m):
            val = sum(
                integrate.quad(lambda u: d2[a - 1](u) * d2[b - 1](u), lo, hi, epsabs=1e-13)[0]
                for lo, hi in zip(basis.knots[:-1], basis.knots[1:])
            )
            assert P[a, b] == pytest.approx(val, abs=1e-8)
    assert np.all(P[0] == 0.0)


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, 7, elements=st.floats(-3, 3)))
def test_penalty_quadratic_form_equals_roughness_integral(c):
    basis = _basis()
    P = penalty_matrix(basis)
    s2 = lambda u: (basis.design(np.atleast_1d(u), deriv=2) @ c)[0] ** 2  # noqa: E731
    knots = basis.knots
    val = sum(integrate.quad(s2, a, b, epsabs=1e-12)[0] for a, b in zip(knots[:-1], knots[1:]))
    assert c @ P @ c == pytest.approx(val, rel=1e-6, abs=1e-10)


def test_constant_only_basis():
    basis = SplineBasis.from_sample(np.linspace(0, 1, 20), 0)
    assert basis.n_funcs == 0
    assert basis.design(np.array([0.2, 0.9])).tolist() == [[1.0], [1.0]]


# ---------------------------------------------------------------------------
# monotone transforms


def test_identity_transform():
    basis = SplineBasis(np.array([-1.0, 0.0, 1.0]))
    tr = MonotoneTransform.identity(basis)
    t = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(monotone_eval(tr, t) - monotone_eval(tr, np.array([tr.origin]))[0], t - tr.origin)


def test_constant_log_derivative_doubles():
    basis = SplineBasis(np.array([-1.0, 0.0, 1.0]))
    c = np.zeros(basis.n_funcs + 1)
    c[0] = np.log(2.0)
    tr = MonotoneTransform(c, basis)
    t = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(tr(t) - tr(np.array([0.0]))[0], 2 * t, atol=1e-12)


def test_monotone_eval_matches_adaptive_quadrature():
    basis = _basis(seed=5)
    c = np.random.default_rng(5).normal(scale=0.8, size=basis.n_funcs + 1)
    tr = MonotoneTransform(c, basis, constant=0.3)
    for t in np.linspace(basis.lower, basis.upper, 7):
        oracle = integrate.quad(lambda u: tr.derivative(np.atleast_1d(u))[0], tr.origin, t, epsabs=1e-13, limit=200)
        assert tr(np.array([t]))[0] == pytest.approx(0.3 + oracle[0], abs=1e-8)


def test_jacobian_matches_finite_differences():
    basis = _basis(seed=6)
    rng = np.random.default_rng(6)
    c = rng.normal(scale=0.5, size=basis.n_funcs + 1)
    t = rng.uniform(basis.lower - 0.2, basis.upper + 0.2, size=15)
    _, J = MonotoneTransform(c, basis).integral_and_jacobian(t)
    eps = 1e-6
    for m in range(c.size):
        e = np.zeros_like(c)
        e[m] = eps
        fd = (MonotoneTransform(c + e, basis)(t) - MonotoneTransform(c - e, basis)(t)) / (2 * eps)
        np.testing.assert_allclose(J[:, m], fd, rtol=1e-6, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 7, elements=st.floats(-4, 4)))
def test_monotone_positive_derivative_on_grid(c):
    basis = _basis(seed=1)
    tr = MonotoneTransform(c, basis)
    grid = np.linspace(basis.lower - 0.5, basis.upper + 0.5, 1000)
    vals = tr(grid)
    assert np.all(np.diff(vals) > 0)


def test_extrapolation_is_linear_with_boundary_slope():
    basis = _basis(seed=2)
    c = np.random.default_rng(2).normal(size=basis.n_funcs + 1)
    tr = MonotoneTransform(c, basis)
    hi = basis.upper
    slope = tr.derivative(np.array([hi]))[0]
    assert tr(np.array([hi + 1.0]))[0] - tr(np.array([hi]))[0] == pytest.approx(slope, rel=1e-12)


def test_standardized_transform_is_affine_rescaling():
    basis = _basis(seed=3)
    c = np.random.default_rng(3).normal(size=basis.n_funcs + 1)
    tr = MonotoneTransform(c, basis, constant=1.5)
    t = np.linspace(basis.lower, basis.upper, 13)
    np.testing.assert_allclose(tr.standardized(0.7, 2.5)(t), (tr(t) - 0.7) / 2.5, atol=1e-12)
