"""Synthetic data generators for the coverage studies.

Scenarios:

* dense1d: mean sin(8*pi*s)*exp(-3*s) on an equidistant grid of [0, 1],
  noise from a normalized 7-function Bernstein basis scaled by
  ((0.6-s)^2+1)/6, so the noise field has unit pointwise variance times
  the envelope.
* dense2d: mean s1*s2 on a square grid of [0, 1]^2, noise from 36
  normalized Gaussian bumps centered on a 6x6 lattice (bandwidth 0.06)
  scaled by (s1+1)/(s2^2+1).
* regression_linear / regression_logistic: cubic polynomial model in two
  standard-normal covariates with fixed coefficients
  (-1, 1, 0.5, -1.1, -0.5, 0.8, -1.1); gaussian errors (variance
  configurable, default 2) or Bernoulli responses; evaluation grid over
  [-1, 1]^2 or a fixed-step grid centered at the origin.
* coefficients: y = x'beta + eps with an intercept plus AR(1)-correlated
  covariates (cor rho^|j-k|), eps ~ N(0, 1). beta is drawn once from a
  dedicated sub-stream of the seed, so it stays fixed across
  replications while covariates and noise vary.

Every generator is deterministic given (spec, rep); distinct rep values
use independent RNG streams.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import expit

from .domain import Domain, Field
from .errors import ValidationError
from .regression import DesignMatrix

__all__ = [
    "GenSpec",
    "SCENARIOS",
    "gen_dense_1d",
    "gen_dense_2d",
    "gen_regression",
    "gen_coefficients",
    "prediction_grid",
    "centered_step_grid",
    "TRUE_BETA",
]

SCENARIOS = (
    "dense1d",
    "dense2d",
    "regression_linear",
    "regression_logistic",
    "coefficients",
)

TRUE_BETA = np.array([-1.0, 1.0, 0.5, -1.1, -0.5, 0.8, -1.1])

# sub-stream tag so the coefficient vector is drawn once per seed,
# independent of every per-replication stream
_BETA_STREAM = 0x62657461


@dataclass(frozen=True)
class GenSpec:
    """Scenario selector plus knobs; unused knobs are ignored.

    grid_points is the per-dimension evaluation grid size (dense1d uses
    it as the total size, default 200; dense2d default 50 per side).
    grid_step switches the regression grid from a [-1, 1] span to a
    fixed-step grid centered at 0.
    """

    scenario: str
    n: int
    seed: int = 0
    noise_var: float = 2.0
    m_coef: int = 50
    rho: float = 0.4
    grid_points: int | None = None
    grid_step: float | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValidationError(f"unknown scenario {self.scenario!r}")
        if self.n < 2:
            raise ValidationError("need sample size n >= 2")
        if self.noise_var < 0.0:
            raise ValidationError("noise_var must be >= 0")
        if not (-1.0 < self.rho < 1.0):
            raise ValidationError("rho must be in (-1, 1)")
        if self.m_coef < 2:
            raise ValidationError("m_coef must be at least 2")
        if self.grid_points is not None and self.grid_points < 1:
            raise ValidationError("grid_points must be positive")
        if self.grid_step is not None and self.grid_step <= 0.0:
            raise ValidationError("grid_step must be positive")


def _rep_rng(spec: GenSpec, rep: int) -> np.random.Generator:
    return np.random.default_rng((spec.seed, rep))


def dense1d_domain(points: int = 200) -> Domain:
    return Domain(np.linspace(0.0, 1.0, points))


def dense1d_truth(domain: Domain) -> Field:
    s = domain.coords[:, 0]
    return Field(domain, np.sin(8.0 * np.pi * s) * np.exp(-3.0 * s))


def _bernstein_basis(s: np.ndarray) -> np.ndarray:
    K = np.array([comb(6, i) * s**i * (1.0 - s) ** (6 - i) for i in range(7)])
    return K / np.linalg.norm(K, axis=0)


def gen_dense_1d(spec: GenSpec, rep: int = 0):
    """Sample paths and the truth field for the 1-d dense scenario.

    Returns (samples, truth): samples has one row per path, one column
    per grid point.
    """
    points = spec.grid_points or 200
    domain = dense1d_domain(points)
    truth = dense1d_truth(domain)
    s = domain.coords[:, 0]
    basis = _bernstein_basis(s)  # (7, points)
    envelope = ((0.6 - s) ** 2 + 1.0) / 6.0
    rng = _rep_rng(spec, rep)
    coefs = rng.standard_normal((spec.n, 7))
    samples = truth.values + envelope * (coefs @ basis)
    return samples, truth


def dense2d_domain(points_per_dim: int = 50) -> Domain:
    g = np.linspace(0.0, 1.0, points_per_dim)
    g1, g2 = np.meshgrid(g, g, indexing="ij")
    return Domain(np.column_stack([g1.ravel(), g2.ravel()]))


def dense2d_truth(domain: Domain) -> Field:
    return Field(domain, domain.coords[:, 0] * domain.coords[:, 1])


def _bump_basis(coords: np.ndarray, h: float = 0.06) -> np.ndarray:
    ij = np.arange(1, 7) / 6.0
    c1, c2 = np.meshgrid(ij, ij, indexing="ij")
    centers = np.column_stack([c1.ravel(), c2.ravel()])  # (36, 2)
    d2 = ((coords[None, :, :] - centers[:, None, :]) ** 2).sum(axis=2)
    K = np.exp(-d2 / (2.0 * h * h))  # (36, points)
    return K / np.linalg.norm(K, axis=0)


def gen_dense_2d(spec: GenSpec, rep: int = 0):
    points = spec.grid_points or 50
    domain = dense2d_domain(points)
    truth = dense2d_truth(domain)
    s1 = domain.coords[:, 0]
    s2 = domain.coords[:, 1]
    basis = _bump_basis(domain.coords)
    envelope = (s1 + 1.0) / (s2**2 + 1.0)
    rng = _rep_rng(spec, rep)
    coefs = rng.standard_normal((spec.n, 36))
    samples = truth.values + envelope * (coefs @ basis)
    return samples, truth


def _poly_columns(cols: list[np.ndarray], degree: int = 3):
    arrays = [np.ones_like(cols[0])]
    labels = ["const"]
    for i, c in enumerate(cols, start=1):
        for d in range(1, degree + 1):
            arrays.append(c**d)
            labels.append(f"x{i}" if d == 1 else f"x{i}^{d}")
    return np.column_stack(arrays), tuple(labels)


def prediction_grid(ndim: int = 2, points_per_dim: int = 100, lo: float = -1.0,
                    hi: float = 1.0, degree: int = 3):
    """Cartesian evaluation grid with a per-coordinate polynomial basis.

    Returns (DesignMatrix, Domain); rows are in row-major grid order.
    """
    vals = np.linspace(lo, hi, points_per_dim)
    return _grid_from_axis(vals, ndim, degree)


def centered_step_grid(ndim: int = 2, points_per_dim: int = 5, step: float = 0.02,
                       degree: int = 3):
    """Fixed-step grid with the given number of points per dimension,
    centered on the origin (5 points, step 0.02 -> -0.04 .. 0.04)."""
    k = points_per_dim
    vals = (np.arange(k) - (k - 1) / 2.0) * step
    return _grid_from_axis(vals, ndim, degree)


def _grid_from_axis(vals: np.ndarray, ndim: int, degree: int):
    grids = np.meshgrid(*([vals] * ndim), indexing="ij")
    cols = [g.ravel() for g in grids]
    X, labels = _poly_columns(cols, degree)
    axis_names = ("s",) if ndim == 1 else tuple(f"s{i+1}" for i in range(ndim))
    domain = Domain(np.column_stack(cols), axis_names=axis_names)
    return DesignMatrix(X, labels), domain


def gen_regression(spec: GenSpec, rep: int = 0):
    """Training data plus evaluation grid for the polynomial regression
    scenarios.

    Returns (X, y, xt, truth): truth is on the response scale (inverse
    logit of the linear predictor for the logistic scenario) over the
    grid domain carried by the truth field.
    """
    logistic = spec.scenario == "regression_logistic"
    if not logistic and spec.scenario != "regression_linear":
        raise ValidationError(f"not a regression scenario: {spec.scenario!r}")
    points = spec.grid_points or 100
    if spec.grid_step is None:
        xt, domain = prediction_grid(2, points)
    else:
        xt, domain = centered_step_grid(2, points, spec.grid_step)
    rng = _rep_rng(spec, rep)
    x1 = rng.standard_normal(spec.n)
    x2 = rng.standard_normal(spec.n)
    X, labels = _poly_columns([x1, x2])
    eta = X @ TRUE_BETA
    if logistic:
        y = (rng.random(spec.n) < expit(eta)).astype(float)
    else:
        y = eta + np.sqrt(spec.noise_var) * rng.standard_normal(spec.n)
    mu = xt.X @ TRUE_BETA
    truth = Field(domain, expit(mu) if logistic else mu)
    return DesignMatrix(X, labels), y, xt, truth


def gen_coefficients(spec: GenSpec, rep: int = 0):
    """Training data for coefficient SCIs: intercept plus m_coef - 1
    AR(1)-correlated covariates, gaussian noise with variance 1.

    Returns (X, y, beta_true) with beta_true a Field over the labelled
    coefficient domain. beta is identical for every rep of a given seed.
    """
    m = spec.m_coef
    if spec.n <= m:
        raise ValidationError(f"coefficients scenario needs n > m_coef, got n={spec.n}")
    beta = np.random.default_rng((spec.seed, _BETA_STREAM)).standard_normal(m)
    d = m - 1
    jj = np.arange(d)
    cov = spec.rho ** np.abs(jj[:, None] - jj[None, :])
    L = np.linalg.cholesky(cov)
    rng = _rep_rng(spec, rep)
    x = rng.standard_normal((spec.n, d)) @ L.T
    X = np.column_stack([np.ones(spec.n), x])
    y = X @ beta + rng.standard_normal(spec.n)
    labels = tuple(f"b{j}" for j in range(m))
    domain = Domain.from_labels(labels)
    return DesignMatrix(X, labels), y, Field(domain, beta)
