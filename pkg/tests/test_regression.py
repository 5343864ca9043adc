import numpy as np
import pytest

from invsets import (DesignMatrix, Domain, logistic_fit, ols_fit,
                     pairwise_prediction_correlations, predict_with_sd)
from invsets.errors import (DegenerateSEError, RankDeficientError,
                            SeparationError, ValidationError)
from oracles import mp_ols, newton_logistic


def random_design(rng, n, p):
    X = rng.standard_normal((n, p))
    X[:, 0] = 1.0
    return X


# ------------------------------------------------------------------- OLS

def test_ols_matches_mpmath_oracle():
    rng = np.random.default_rng(5150)
    for _ in range(20):
        n = int(rng.integers(25, 80))
        p = int(rng.integers(2, 7))
        X = random_design(rng, n, p)
        beta = rng.standard_normal(p)
        y = X @ beta + rng.standard_normal(n)
        fit = ols_fit(X, y)
        ref = mp_ols(X, y)
        rel = np.max(np.abs(fit.beta - ref) / np.maximum(np.abs(ref), 1e-12))
        assert rel < 1e-10


def test_ols_sigma2_and_cov():
    rng = np.random.default_rng(77)
    n, p = 60, 4
    X = random_design(rng, n, p)
    y = X @ rng.standard_normal(p) + rng.standard_normal(n)
    fit = ols_fit(X, y)
    resid = y - X @ fit.beta
    dof = n - p
    assert fit.sigma2 == pytest.approx(resid @ resid / dof, rel=1e-12)
    # cov = sigma2 * (X'X)^{-1}, checked against a direct inverse
    cov_ref = fit.sigma2 * np.linalg.inv(X.T @ X)
    assert np.allclose(fit.cov, cov_ref, rtol=1e-9, atol=1e-12)
    assert fit.model == "linear"


def test_ols_rank_deficient_raises():
    rng = np.random.default_rng(3)
    X = random_design(rng, 30, 4)
    X[:, 3] = 2.0 * X[:, 1]  # exact collinearity
    y = rng.standard_normal(30)
    with pytest.raises(RankDeficientError):
        ols_fit(X, y)


def test_ols_needs_more_rows_than_columns():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((3, 3))
    with pytest.raises(ValidationError):
        ols_fit(X, np.zeros(3))


def test_ols_exact_fit_zero_noise():
    rng = np.random.default_rng(8)
    X = random_design(rng, 40, 3)
    beta = np.array([1.5, -2.0, 0.25])
    fit = ols_fit(X, X @ beta)
    assert np.allclose(fit.beta, beta, atol=1e-12)
    assert fit.sigma2 == pytest.approx(0.0, abs=1e-20)


# -------------------------------------------------------------- logistic

def test_logistic_matches_newton_oracle():
    rng = np.random.default_rng(616)
    for _ in range(20):
        n = int(rng.integers(150, 300))
        p = int(rng.integers(2, 5))
        X = random_design(rng, n, p)
        beta = rng.uniform(-1.0, 1.0, size=p)
        pr = 1.0 / (1.0 + np.exp(-(X @ beta)))
        y = (rng.random(n) < pr).astype(float)
        fit = logistic_fit(X, y)
        ref = newton_logistic(X, y)
        assert np.max(np.abs(fit.beta - ref)) < 1e-8
        assert fit.converged
        assert fit.model == "logistic"


def test_logistic_cov_is_inverse_information():
    rng = np.random.default_rng(99)
    n, p = 400, 3
    X = random_design(rng, n, p)
    beta = np.array([0.3, 0.8, -0.5])
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-(X @ beta)))).astype(float)
    fit = logistic_fit(X, y)
    pr = 1.0 / (1.0 + np.exp(-(X @ fit.beta)))
    info = X.T @ (X * (pr * (1 - pr))[:, None])
    assert np.allclose(fit.cov, np.linalg.inv(info), rtol=1e-8, atol=1e-12)


def test_logistic_separation_raises():
    # perfectly separable data
    x = np.linspace(-2, 2, 40)
    X = np.column_stack([np.ones(40), x])
    y = (x > 0).astype(float)
    with pytest.raises(SeparationError):
        logistic_fit(X, y)


def test_logistic_rejects_nonbinary_response():
    X = np.column_stack([np.ones(10), np.arange(10.0)])
    with pytest.raises(ValidationError):
        logistic_fit(X, np.linspace(0, 2, 10))


# ------------------------------------------------------------ prediction

def test_predict_mean_and_sd_formulas():
    rng = np.random.default_rng(12)
    n, p = 80, 3
    X = random_design(rng, n, p)
    y = X @ np.array([1.0, 0.5, -0.5]) + rng.standard_normal(n)
    fit = ols_fit(X, y)
    xt = rng.standard_normal((6, p))
    pred = predict_with_sd(fit, xt)
    assert np.allclose(pred.mean, xt @ fit.beta, rtol=1e-12)
    sd_ref = np.sqrt(np.einsum("ij,jk,ik->i", xt, fit.cov, xt))
    assert np.allclose(pred.sd, sd_ref, rtol=1e-10)
    assert pred.domain.size == 6


def test_predict_coefficients_functional():
    rng = np.random.default_rng(13)
    X = random_design(rng, 50, 4)
    y = rng.standard_normal(50)
    fit = ols_fit(X, y)
    pred = predict_with_sd(fit, functional="coefficients")
    assert np.allclose(pred.mean, fit.beta)
    assert np.allclose(pred.sd, np.sqrt(np.diag(fit.cov)))
    assert pred.domain.labels == ("b0", "b1", "b2", "b3")


def test_predict_zero_se_raises():
    rng = np.random.default_rng(14)
    X = random_design(rng, 30, 3)
    y = X @ np.ones(3) + rng.standard_normal(30)
    fit = ols_fit(X, y)
    xt = np.vstack([np.zeros(3), np.ones(3)])  # zero row -> zero SE
    with pytest.raises(DegenerateSEError):
        predict_with_sd(fit, xt)


# ----------------------------------------------------------- correlations

def test_correlation_duplicate_rows_give_one():
    rng = np.random.default_rng(21)
    X = random_design(rng, 60, 3)
    y = rng.standard_normal(60)
    fit = ols_fit(X, y)
    row = rng.standard_normal(3)
    cors = pairwise_prediction_correlations(fit, np.vstack([row, row]))
    assert cors.size == 1
    assert cors[0] == pytest.approx(1.0, abs=1e-12)


def test_correlation_orthogonal_disjoint_rows_give_zero():
    # orthogonal design -> diagonal cov; disjoint-support rows -> cor 0
    n = 40
    X = np.zeros((n, 2))
    X[:20, 0] = 1.0
    X[20:, 1] = 1.0
    rng = np.random.default_rng(22)
    y = rng.standard_normal(n)
    fit = ols_fit(X, y)
    rows = np.array([[1.0, 0.0], [0.0, 1.0]])
    cors = pairwise_prediction_correlations(fit, rows)
    assert cors[0] == pytest.approx(0.0, abs=1e-12)


def test_correlation_matches_direct_formula():
    rng = np.random.default_rng(23)
    X = random_design(rng, 70, 3)
    y = rng.standard_normal(70)
    fit = ols_fit(X, y)
    xt = rng.standard_normal((5, 3))
    cors = pairwise_prediction_correlations(fit, xt)
    A = xt @ fit.cov @ xt.T
    d = np.sqrt(np.diag(A))
    ref = []
    for i in range(5):
        for j in range(i + 1, 5):
            ref.append(A[i, j] / (d[i] * d[j]))
    assert cors.size == 10
    assert np.allclose(np.sort(np.abs(cors)), np.sort(np.abs(ref)), rtol=1e-10)


def test_correlation_subsample_is_seeded():
    rng = np.random.default_rng(24)
    X = random_design(rng, 120, 4)
    y = rng.standard_normal(120)
    fit = ols_fit(X, y)
    xt = rng.standard_normal((900, 4))  # 404,550 pairs -> subsampled
    a = pairwise_prediction_correlations(fit, xt, seed=5)
    b = pairwise_prediction_correlations(fit, xt, seed=5)
    c = pairwise_prediction_correlations(fit, xt, seed=6)
    assert np.array_equal(a, b)
    assert a.size == c.size
    assert not np.array_equal(a, c)


def test_design_matrix_labels():
    X = np.ones((5, 2))
    X[:, 1] = np.arange(5.0)
    dm = DesignMatrix(X)
    assert dm.labels == ("x0", "x1")
    named = DesignMatrix(X, ("const", "slope"))
    assert named.labels == ("const", "slope")
    with pytest.raises(ValidationError):
        DesignMatrix(X, ("only_one",))
