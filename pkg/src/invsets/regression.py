"""Parametric regression fits and pointwise prediction standard errors.

Linear fits solve the normal equations through an SVD with an explicit
rank check; logistic fits run iteratively reweighted least squares.
Standard errors are model based: sqrt(sigma2 * xt' (X'X)^-1 xt) for the
linear model and the delta-method sqrt(xt' I(beta)^-1 xt) for logistic,
both on the linear-predictor scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Domain
from .errors import (
    DegenerateSEError,
    NotConvergedError,
    RankDeficientError,
    SeparationError,
    ValidationError,
)

__all__ = [
    "DesignMatrix",
    "CoefFit",
    "PredictionField",
    "ols_fit",
    "logistic_fit",
    "predict_with_sd",
    "pairwise_prediction_correlations",
]

MAX_IRLS_ITER = 100
SCORE_TOL = 1e-10
BETA_TOL = 1e-10
# Finite MLEs with high-leverage polynomial covariates can sit at 60-70
# on this scale; truly separated fits grow without bound and cross any
# threshold within a few iterations, so the bound only needs to be
# comfortably above the legitimate range.
SEPARATION_BOUND = 150.0


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Dense design matrix with column labels."""

    X: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ValidationError(f"design matrix must be 2-d with >=1 column, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValidationError("design matrix contains non-finite entries")
        X = X.copy()
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        labels = self.labels
        if labels is None:
            labels = tuple(f"x{j}" for j in range(X.shape[1]))
        else:
            labels = tuple(str(v) for v in labels)
            if len(labels) != X.shape[1]:
                raise ValidationError("label count must match column count")
        object.__setattr__(self, "labels", labels)

    @property
    def shape(self):
        return self.X.shape


@dataclass(frozen=True, eq=False)
class CoefFit:
    """Fitted coefficients with covariance and convergence diagnostics."""

    beta: np.ndarray
    cov: np.ndarray
    sigma2: float | None
    model: str
    converged: bool
    iterations: int


@dataclass(frozen=True, eq=False)
class PredictionField:
    """Point estimate and standard error per domain point, on the
    linear-predictor scale for logistic fits."""

    domain: Domain
    mean: np.ndarray
    sd: np.ndarray


def as_matrix(X) -> np.ndarray:
    if isinstance(X, DesignMatrix):
        return X.X
    return DesignMatrix(X).X


def _checked_response(X: np.ndarray, y) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != X.shape[0]:
        raise ValidationError("response length must match design rows")
    if not np.all(np.isfinite(y)):
        raise ValidationError("response contains non-finite entries")
    return y


def _svd_full_rank(X: np.ndarray):
    """SVD of X, raising RankDeficientError below full column rank."""
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    tol = s[0] * max(X.shape) * np.finfo(float).eps if s[0] > 0 else 0.0
    if s[0] == 0.0 or s[-1] <= tol:
        raise RankDeficientError(
            f"design matrix has column rank below {X.shape[1]}"
        )
    return U, s, Vt


def ols_fit(X, y) -> CoefFit:
    """Least-squares fit solving the normal equations.

    Requires more rows than columns (residual degrees of freedom must be
    positive for the variance estimate sigma2 = RSS / (n - p)).
    """
    X = as_matrix(X)
    y = _checked_response(X, y)
    n, p = X.shape
    if n <= p:
        raise ValidationError(f"need n > p rows for a linear fit, got n={n}, p={p}")
    U, s, Vt = _svd_full_rank(X)
    beta = Vt.T @ ((U.T @ y) / s)
    resid = y - X @ beta
    sigma2 = float(resid @ resid) / (n - p)
    cov = (Vt.T / s**2) @ Vt * sigma2
    return CoefFit(beta=beta, cov=cov, sigma2=sigma2, model="linear",
                   converged=True, iterations=1)


def _expit(eta: np.ndarray) -> np.ndarray:
    from scipy.special import expit

    return expit(eta)


def _check_separation(beta: np.ndarray, col_rms: np.ndarray) -> None:
    # the bound is calibrated for unit-scale covariates, so rescale by
    # each column's root mean square (1.0 for an all-ones intercept)
    if np.max(np.abs(beta) * col_rms) > SEPARATION_BOUND:
        raise SeparationError(
            "logistic fit diverged (separated data): coefficient magnitude "
            f"exceeds {SEPARATION_BOUND} on unit-scale covariates"
        )


def logistic_fit(X, y, max_iter: int = MAX_IRLS_ITER) -> CoefFit:
    """Logistic regression by iteratively reweighted least squares.

    Convergence requires both max |score| < 1e-10 and a relative step below
    1e-10. Divergence past coefficient magnitude 150 on unit-scale columns
    raises SeparationError; exhausting the iteration budget raises
    NotConvergedError.
    """
    X = as_matrix(X)
    y = _checked_response(X, y)
    n, p = X.shape
    if n < p:
        raise ValidationError(f"need n >= p rows for a logistic fit, got n={n}, p={p}")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValidationError("logistic response must be 0/1")
    _svd_full_rank(X)
    col_rms = np.sqrt(np.mean(X**2, axis=0))
    col_rms[col_rms == 0.0] = 1.0

    beta = np.zeros(p)
    info = None
    for it in range(1, max_iter + 1):
        pr = _expit(X @ beta)
        w = pr * (1.0 - pr)
        score = X.T @ (y - pr)
        info = (X * w[:, None]).T @ X
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            # weights collapsed to zero at full column rank: fitted
            # probabilities pinned to 0/1
            raise SeparationError("logistic information matrix is singular") from None
        new_beta = beta + step
        _check_separation(new_beta, col_rms)
        denom = max(float(np.linalg.norm(new_beta)), 1e-300)
        rel_step = float(np.linalg.norm(step)) / denom
        beta = new_beta
        if np.max(np.abs(score)) < SCORE_TOL and rel_step < BETA_TOL:
            pr = _expit(X @ beta)
            w = pr * (1.0 - pr)
            info = (X * w[:, None]).T @ X
            try:
                cov = np.linalg.inv(info)
            except np.linalg.LinAlgError:
                raise SeparationError("logistic information matrix is singular") from None
            return CoefFit(beta=beta, cov=cov, sigma2=None, model="logistic",
                           converged=True, iterations=it)
    raise NotConvergedError(f"IRLS did not converge in {max_iter} iterations")


def prediction_stats(fit: CoefFit, xt) -> tuple[np.ndarray, np.ndarray]:
    """Linear-predictor mean and model-based SE at each row of xt.

    Internal building block: permits zero SEs, which the public
    predict_with_sd rejects but the bootstrap must tolerate for
    degenerate (zero-noise) inputs.
    """
    xt = as_matrix(xt)
    if xt.shape[1] != fit.beta.shape[0]:
        raise ValidationError("prediction rows must match coefficient dimension")
    mean = xt @ fit.beta
    var = np.einsum("ij,jk,ik->i", xt, fit.cov, xt)
    sd = np.sqrt(np.maximum(var, 0.0))
    return mean, sd


def predict_with_sd(fit: CoefFit, xt=None, functional: str = "mean_prediction",
                    domain: Domain | None = None) -> PredictionField:
    """Point estimates with standard errors for a linear functional of beta.

    Parameters
    ----------
    fit : CoefFit
    xt : DesignMatrix or array, optional
        Evaluation rows. Ignored for the "coefficients" functional, which
        selects coordinates of beta (identity rows).
    functional : {"mean_prediction", "coefficients"}
    domain : Domain, optional
        Domain attached to the result. Defaults to row indices, or to
        labelled coefficient indices for the coefficients functional.

    Raises
    ------
    DegenerateSEError
        If any standard error is exactly zero; a band at such a point
        would be undefined.
    """
    p = fit.beta.shape[0]
    if functional == "coefficients":
        xt = np.eye(p)
        if domain is None:
            domain = Domain.from_labels([f"b{j}" for j in range(p)])
    elif functional == "mean_prediction":
        if xt is None:
            raise ValidationError("mean_prediction requires evaluation rows")
    else:
        raise ValidationError(f"unknown functional {functional!r}")
    mean, sd = prediction_stats(fit, xt)
    if domain is None:
        domain = Domain(np.arange(mean.shape[0], dtype=float), axis_names=("index",))
    if domain.size != mean.shape[0]:
        raise ValidationError("domain size must match number of prediction rows")
    if np.any(sd == 0.0):
        raise DegenerateSEError("zero standard error at some evaluation point")
    return PredictionField(domain=domain, mean=mean, sd=sd)


def pairwise_prediction_correlations(fit: CoefFit, xt, max_pairs: int = 200_000,
                                     seed: int = 0) -> np.ndarray:
    """Correlations cor(yhat_i, yhat_j) over point pairs of the grid.

    cor = xt_i' C xt_j / sqrt(xt_i' C xt_i * xt_j' C xt_j) with C the
    coefficient covariance; the residual-variance factor cancels. All
    i<j pairs when there are at most ``max_pairs`` of them, otherwise
    ``max_pairs`` pairs sampled without replacement of index order.
    """
    xt = as_matrix(xt)
    m = xt.shape[0]
    if m < 2:
        raise ValidationError("need at least two prediction points")
    A = xt @ fit.cov
    var = np.einsum("ij,ij->i", A, xt)
    if np.any(var <= 0.0):
        raise DegenerateSEError("zero prediction variance at some point")
    total = m * (m - 1) // 2
    if total <= max_pairs:
        ii, jj = np.triu_indices(m, k=1)
    else:
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, m, size=max_pairs)
        jj = rng.integers(0, m - 1, size=max_pairs)
        jj = np.where(jj >= ii, jj + 1, jj)  # j != i, order irrelevant
    covs = np.einsum("ij,ij->i", A[ii], xt[jj])
    return covs / np.sqrt(var[ii] * var[jj])
