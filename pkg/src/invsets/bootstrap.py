"""Bootstrap construction of simultaneous confidence bands.

Two procedures, both built on the sup of a standardized deviation
statistic whose (1-alpha) empirical quantile scales the band:

* multiplier_scb: multiplier bootstrap for the mean of densely observed
  functional data. Each draw reweights the centered sample paths with
  i.i.d. multipliers and studentizes by that draw's own pointwise
  standard deviation, which is what keeps small-sample coverage near
  nominal.
* regression_scb: nonparametric pairs bootstrap for linear/logistic
  regression functionals (mean prediction over a grid, or the
  coefficients themselves). Each resample refits the model; the max
  statistic standardizes by the resample's own standard errors while
  the returned band uses the original fit's standard errors.

Bootstrap iteration b always draws from its own RNG stream seeded by
(seed, b), so results are independent of evaluation order and batch
composition. Failed resamples (rank deficiency, separation, IRLS
non-convergence, degenerate ratios) are redrawn from the same stream;
more than ``max_refit_retries`` consecutive failures for one iteration
raises BootstrapDegenerateError.

All resample refits are evaluated in batch: a resample's weighted sums
are multinomial-count-weighted sums over the original rows, so L refits
reduce to a handful of large matrix products instead of L small ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .domain import Band, Domain
from .errors import (
    BootstrapDegenerateError,
    DegenerateSEError,
    ValidationError,
)
from .regression import (
    BETA_TOL,
    MAX_IRLS_ITER,
    SCORE_TOL,
    SEPARATION_BOUND,
    DesignMatrix,
    as_matrix,
    logistic_fit,
    ols_fit,
    prediction_stats,
)

__all__ = [
    "BootstrapConfig",
    "MaxStatDistribution",
    "empirical_quantile",
    "multiplier_scb",
    "regression_scb",
]

_MULTIPLIERS = ("rademacher", "gaussian")
_CHUNK_ELEMS = 8_000_000  # cap on transient (grid x batch) matrices


@dataclass(frozen=True)
class BootstrapConfig:
    """Common bootstrap knobs.

    seed feeds the per-iteration RNG streams; identical (data, config)
    give bit-identical results regardless of thread count.
    """

    n_boot: int = 1000
    alpha: float = 0.05
    seed: int = 0
    multiplier: str = "rademacher"
    max_refit_retries: int = 100

    def __post_init__(self):
        if self.n_boot < 100:
            raise ValidationError(f"n_boot must be at least 100, got {self.n_boot}")
        if not (0.0 < self.alpha < 1.0):
            raise ValidationError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.multiplier not in _MULTIPLIERS:
            raise ValidationError(f"multiplier must be one of {_MULTIPLIERS}")
        if self.max_refit_retries < 1:
            raise ValidationError("max_refit_retries must be positive")


@dataclass(frozen=True, eq=False)
class MaxStatDistribution:
    """Sorted bootstrap max statistics with the quantile used for the band."""

    values: np.ndarray
    alpha: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValidationError("max statistics must form a non-empty vector")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("max statistics must be finite")
        if np.any(vals < 0.0):
            raise ValidationError("max statistics are sups of absolute values, so >= 0")
        if np.any(np.diff(vals) < 0.0):
            vals = np.sort(vals)
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if not (0.0 < float(self.alpha) < 1.0):
            raise ValidationError("alpha must be in (0, 1)")

    @property
    def quantile(self) -> float:
        return empirical_quantile(self.values, 1.0 - self.alpha)


def empirical_quantile(values, q: float) -> float:
    """The ceil(q*L)-th order statistic (1-indexed) of ``values``.

    The index is computed with a tiny downward guard so that binary
    floating point like (1 - 0.1) * 1000 = 900.0000000000000222 still
    selects order statistic 900 rather than 901.
    """
    vals = np.sort(np.asarray(values, dtype=float).ravel())
    if vals.size == 0:
        raise ValidationError("cannot take a quantile of an empty vector")
    if not (0.0 < q < 1.0):
        raise ValidationError(f"quantile level must be in (0, 1), got {q}")
    k = math.ceil(q * vals.size * (1.0 - 1e-12))
    k = min(max(k, 1), vals.size)
    return float(vals[k - 1])


def _iteration_stream(seed: int, b: int) -> np.random.Generator:
    return np.random.default_rng((seed, b))


def _draw_multipliers(rng: np.random.Generator, n: int, kind: str) -> np.ndarray:
    if kind == "gaussian":
        return rng.standard_normal(n)
    return rng.integers(0, 2, size=n) * 2.0 - 1.0


def _as_sample_matrix(samples, domain: Domain | None):
    if isinstance(samples, np.ndarray):
        if domain is None:
            raise ValidationError("a plain sample matrix needs an explicit domain")
        mat = np.asarray(samples, dtype=float)
    else:
        fields = list(samples)
        if not fields:
            raise ValidationError("empty sample")
        if domain is None:
            domain = fields[0].domain
        for f in fields:
            if not f.domain.equals(domain):
                raise ValidationError("all sample fields must share one domain")
        mat = np.vstack([f.values for f in fields])
    if mat.ndim != 2:
        raise ValidationError("sample matrix must be 2-d (samples x points)")
    if mat.shape[1] != domain.size:
        raise ValidationError("sample columns must match domain size")
    if not np.all(np.isfinite(mat)):
        raise ValidationError("sample contains non-finite values")
    if mat.shape[0] < 2:
        raise ValidationError("need at least two sample paths")
    return mat, domain


def multiplier_scb(samples, cfg: BootstrapConfig, domain: Domain | None = None):
    """Simultaneous confidence band for the mean function of dense
    functional data.

    Parameters
    ----------
    samples : array (n, size) or sequence of Field
        Sample paths evaluated on a shared domain.
    cfg : BootstrapConfig
    domain : Domain, required when ``samples`` is a plain array.

    Returns
    -------
    (Band, MaxStatDistribution)
        Band is ybar +/- a * sd / sqrt(n) with sd the pointwise sample
        standard deviation and a the (1-alpha) quantile of the bootstrap
        max statistics.
    """
    mat, domain = _as_sample_matrix(samples, domain)
    n = mat.shape[0]
    ybar = mat.mean(axis=0)
    sd = mat.std(axis=0, ddof=1)
    if np.any(sd == 0.0):
        raise DegenerateSEError("zero pointwise standard deviation in the sample")
    resid = mat - ybar
    resid_sq = resid**2
    root_n = math.sqrt(n)

    streams = [_iteration_stream(cfg.seed, b) for b in range(cfg.n_boot)]
    r = np.empty(cfg.n_boot)
    pending = np.arange(cfg.n_boot)
    attempts = np.zeros(cfg.n_boot, dtype=int)
    while pending.size:
        attempts[pending] += 1
        G = np.empty((pending.size, n))
        for row, b in enumerate(pending):
            G[row] = _draw_multipliers(streams[b], n, cfg.multiplier)
        m = (G @ resid) / n
        # per-draw variance of the multiplied residuals; studentizing by
        # it (not by sd) is what the coverage checks required
        v = ((G**2) @ resid_sq - n * m**2) / (n - 1)
        v = np.maximum(v, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = root_n * m / np.sqrt(v)
        t[(v == 0.0) & (m == 0.0)] = 0.0
        rb = np.abs(t).max(axis=1)
        ok = np.isfinite(rb)
        r[pending[ok]] = rb[ok]
        pending = pending[~ok]
        if pending.size and np.any(attempts[pending] >= cfg.max_refit_retries):
            raise BootstrapDegenerateError(
                f"{cfg.max_refit_retries} consecutive degenerate multiplier draws"
            )
    dist = MaxStatDistribution(np.sort(r), cfg.alpha)
    half = dist.quantile * sd / root_n
    band = Band(domain, ybar - half, ybar + half, cfg.alpha)
    return band, dist


def _counts(stream: np.random.Generator, n: int) -> np.ndarray:
    return np.bincount(stream.integers(0, n, size=n), minlength=n).astype(float)


def _outer_half(M: np.ndarray, iu):
    """Row-wise upper-triangle outer products, off-diagonals doubled, so
    quadratic forms become one (rows x pairs) @ (pairs,) product."""
    H = M[:, iu[0]] * M[:, iu[1]]
    H[:, iu[0] != iu[1]] *= 2.0
    return H


def _batch_solve(A: np.ndarray, rhs: np.ndarray):
    """Solve per-batch linear systems, isolating singular members instead
    of failing the whole batch."""
    ok = np.ones(A.shape[0], dtype=bool)
    try:
        return np.linalg.solve(A, rhs[..., None])[..., 0], ok
    except np.linalg.LinAlgError:
        out = np.zeros_like(rhs)
        for i in range(A.shape[0]):
            try:
                out[i] = np.linalg.solve(A[i], rhs[i])
            except np.linalg.LinAlgError:
                ok[i] = False
        return out, ok


def _batch_inv(A: np.ndarray):
    ok = np.ones(A.shape[0], dtype=bool)
    try:
        return np.linalg.inv(A), ok
    except np.linalg.LinAlgError:
        out = np.zeros_like(A)
        for i in range(A.shape[0]):
            try:
                out[i] = np.linalg.inv(A[i])
            except np.linalg.LinAlgError:
                ok[i] = False
        return out, ok


def _max_ratio(est: np.ndarray, Eb: np.ndarray, sdb: np.ndarray) -> np.ndarray:
    """Per-column sup of |Eb - est| / sdb with 0/0 treated as 0."""
    delta = np.abs(Eb - est[:, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = delta / sdb
    ratio[(sdb == 0.0) & (delta == 0.0)] = 0.0
    return ratio.max(axis=0)


class _LinearBootEngine:
    def __init__(self, X, y, xt, est, sd, diag_only):
        self.X, self.y, self.xt = X, y, xt
        self.est, self.sd = est, sd
        n, p = X.shape
        self.dof = n - p
        self.iu = np.triu_indices(p)
        self.P = _outer_half(X, self.iu)
        self.diag_only = diag_only
        if not diag_only:
            self.TQ = _outer_half(xt, self.iu)

    def run(self, C: np.ndarray):
        X, y, xt = self.X, self.y, self.xt
        B = C.shape[0]
        n, p = X.shape
        XtX = np.zeros((B, p, p))
        S = C @ self.P
        S[:, self.iu[0] != self.iu[1]] /= 2.0
        XtX[:, self.iu[0], self.iu[1]] = S
        XtX[:, self.iu[1], self.iu[0]] = S
        beta, ok = _batch_solve(XtX, (C * y) @ X)
        fitted = X @ beta.T  # (n, B)
        rss = (C.T * (y[:, None] - fitted) ** 2).sum(axis=0)
        s2 = rss / self.dof
        Minv, ok_inv = _batch_inv(XtX)
        ok &= ok_inv
        if self.diag_only:
            q = Minv.diagonal(axis1=1, axis2=2).T  # (p, B)
            Eb = beta.T
        else:
            q = self.TQ @ Minv[:, self.iu[0], self.iu[1]].T  # (m, B)
            Eb = xt @ beta.T
        sdb = np.sqrt(np.maximum(s2 * q, 0.0))
        rb = _max_ratio(self.est, Eb, sdb)
        ok &= np.isfinite(rb)
        return rb, ok


class _LogisticBootEngine:
    def __init__(self, X, y, xt, est, sd, diag_only):
        self.X, self.y, self.xt = X, y, xt
        self.est, self.sd = est, sd
        n, p = X.shape
        self.iu = np.triu_indices(p)
        self.P = _outer_half(X, self.iu)
        self.col_rms = np.sqrt(np.mean(X**2, axis=0))
        self.col_rms[self.col_rms == 0.0] = 1.0
        self.diag_only = diag_only
        if not diag_only:
            self.TQ = _outer_half(xt, self.iu)

    def _info(self, C, pr):
        """Count- and IRLS-weighted X'WX for each batch member."""
        B = C.shape[0]
        p = self.X.shape[1]
        W = C * (pr * (1.0 - pr))
        S = W @ self.P
        S[:, self.iu[0] != self.iu[1]] /= 2.0
        info = np.zeros((B, p, p))
        info[:, self.iu[0], self.iu[1]] = S
        info[:, self.iu[1], self.iu[0]] = S
        return info

    def run(self, C: np.ndarray):
        X, y = self.X, self.y
        B, n = C.shape
        p = X.shape[1]
        beta = np.zeros((B, p))
        ok = np.ones(B, dtype=bool)
        done = np.zeros(B, dtype=bool)
        for _ in range(MAX_IRLS_ITER):
            act = np.flatnonzero(ok & ~done)
            if act.size == 0:
                break
            Ca = C[act]
            pr = expit(X @ beta[act].T).T  # (k, n)
            score = (Ca * (y - pr)) @ X
            info = self._info(Ca, pr)
            step, solv_ok = _batch_solve(info, score)
            ok[act[~solv_ok]] = False
            good = np.flatnonzero(solv_ok)
            if good.size == 0:
                continue
            idx = act[good]
            new_beta = beta[idx] + step[good]
            sep = (np.abs(new_beta) * self.col_rms).max(axis=1) > SEPARATION_BOUND
            ok[idx[sep]] = False
            keep = ~sep
            idx = idx[keep]
            if idx.size == 0:
                continue
            norm_new = np.linalg.norm(new_beta[keep], axis=1)
            rel = np.linalg.norm(step[good][keep], axis=1) / np.maximum(norm_new, 1e-300)
            beta[idx] = new_beta[keep]
            conv = (np.abs(score[good][keep]).max(axis=1) < SCORE_TOL) & (rel < BETA_TOL)
            done[idx[conv]] = True
        ok &= done

        rb = np.full(B, np.nan)
        act = np.flatnonzero(ok)
        if act.size:
            pr = expit(X @ beta[act].T).T
            info = self._info(C[act], pr)
            Minv, inv_ok = _batch_inv(info)
            ok[act[~inv_ok]] = False
            act = act[inv_ok]
            Minv = Minv[inv_ok]
            if act.size:
                if self.diag_only:
                    q = Minv.diagonal(axis1=1, axis2=2).T
                    Eb = beta[act].T
                else:
                    q = self.TQ @ Minv[:, self.iu[0], self.iu[1]].T
                    Eb = self.xt @ beta[act].T
                sdb = np.sqrt(np.maximum(q, 0.0))
                rb[act] = _max_ratio(self.est, Eb, sdb)
        ok &= np.isfinite(rb)
        return rb, ok


def _bootstrap_maxstats(engine, n: int, cfg: BootstrapConfig) -> np.ndarray:
    return np.sort(_bootstrap_range(engine, n, cfg, 0, cfg.n_boot))


def regression_scb(X, y, cfg: BootstrapConfig, xt=None, model: str = "linear",
                   functional: str = "mean_prediction",
                   domain: Domain | None = None):
    """Simultaneous confidence band for a regression functional via the
    nonparametric pairs bootstrap.

    Parameters
    ----------
    X, y : training design and response.
    cfg : BootstrapConfig
    xt : DesignMatrix or array
        Evaluation rows for the mean-prediction functional; ignored for
        the coefficients functional (identity rows).
    model : {"linear", "logistic"}
    functional : {"mean_prediction", "coefficients"}
    domain : Domain, optional
        Domain for the band; defaults to row indices (mean prediction)
        or labelled coefficient indices.

    Returns
    -------
    (Band, MaxStatDistribution)
        Each resample is refit and its max of |Eb(s) - E(s)| / sd_b(s)
        recorded, standardized by the RESAMPLE's standard errors; the
        band is E +/- a * sd with the ORIGINAL fit's standard errors.
        For logistic mean prediction the band endpoints are mapped
        through the inverse logit, so the band lives on the probability
        scale.
    """
    Xmat = as_matrix(X)
    labels = X.labels if isinstance(X, DesignMatrix) else None
    if model == "linear":
        fit = ols_fit(Xmat, y)
    elif model == "logistic":
        fit = logistic_fit(Xmat, y)
    else:
        raise ValidationError(f"model must be 'linear' or 'logistic', got {model!r}")

    if functional == "coefficients":
        xt_mat = np.eye(Xmat.shape[1])
        diag_only = True
        if domain is None:
            names = labels or [f"b{j}" for j in range(Xmat.shape[1])]
            domain = Domain.from_labels(names)
    elif functional == "mean_prediction":
        if xt is None:
            raise ValidationError("mean_prediction requires evaluation rows")
        xt_mat = as_matrix(xt)
        if xt_mat.shape[1] != Xmat.shape[1]:
            raise ValidationError("evaluation rows must match training columns")
        diag_only = False
        if domain is None:
            domain = Domain(np.arange(xt_mat.shape[0], dtype=float), axis_names=("index",))
    else:
        raise ValidationError(f"unknown functional {functional!r}")
    if domain.size != xt_mat.shape[0]:
        raise ValidationError("domain size must match evaluation rows")

    est, sd = prediction_stats(fit, xt_mat)

    cls = _LinearBootEngine if model == "linear" else _LogisticBootEngine
    engine = cls(Xmat, np.asarray(y, dtype=float).ravel(), xt_mat, est, sd, diag_only)
    stats = _large_grid_guard(engine, Xmat.shape[0], cfg)

    dist = MaxStatDistribution(stats, cfg.alpha)
    a = dist.quantile
    lo = est - a * sd
    hi = est + a * sd
    if model == "logistic" and functional == "mean_prediction":
        lo, hi = expit(lo), expit(hi)
    band = Band(domain, lo, hi, cfg.alpha)
    return band, dist


def _large_grid_guard(engine, n: int, cfg: BootstrapConfig) -> np.ndarray:
    """Split the bootstrap batch when grid x batch transients get large."""
    m = engine.xt.shape[0]
    if m * cfg.n_boot <= _CHUNK_ELEMS or engine.diag_only:
        return _bootstrap_maxstats(engine, n, cfg)
    # run in column blocks; streams are per-iteration so slicing the
    # iteration range preserves every draw bit for bit
    block = max(1, _CHUNK_ELEMS // m)
    parts = []
    for start in range(0, cfg.n_boot, block):
        stop = min(start + block, cfg.n_boot)
        parts.append(_bootstrap_range(engine, n, cfg, start, stop))
    return np.sort(np.concatenate(parts))


def _bootstrap_range(engine, n, cfg, start, stop):
    streams = {b: _iteration_stream(cfg.seed, b) for b in range(start, stop)}
    r = np.empty(stop - start)
    pending = np.arange(start, stop)
    attempts = np.zeros(cfg.n_boot, dtype=int)
    while pending.size:
        attempts[pending] += 1
        C = np.empty((pending.size, n))
        for row, b in enumerate(pending):
            C[row] = _counts(streams[b], n)
        rb, ok = engine.run(C)
        r[pending[ok] - start] = rb[ok]
        pending = pending[~ok]
        if pending.size and np.any(attempts[pending] >= cfg.max_refit_retries):
            raise BootstrapDegenerateError(
                f"{cfg.max_refit_retries} consecutive failed resamples for one "
                "bootstrap iteration"
            )
    return r
