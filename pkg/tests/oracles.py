"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written the slow, obvious way (or with
an unrelated algorithm entirely) so a test failure points at the
library, not at a shared bug.
"""

from __future__ import annotations

import numpy as np


# --------------------------------------------------------- containment

def brute_sci(lower, upper, mu) -> bool:
    return bool(np.all((lower <= mu) & (mu <= upper)))


def brute_upper_event(lower, upper, mu, levels) -> bool:
    """Inner/outer containment of {mu >= c} for every c, checked per level."""
    for c in levels:
        inner = lower >= c
        true_set = mu >= c
        outer = upper >= c
        if np.any(inner & ~true_set) or np.any(true_set & ~outer):
            return False
    return True


def brute_lower_event(lower, upper, mu, levels) -> bool:
    for c in levels:
        inner = upper <= c
        true_set = mu <= c
        outer = lower <= c
        if np.any(inner & ~true_set) or np.any(true_set & ~outer):
            return False
    return True


def brute_strict_upper_event(lower, upper, mu, levels) -> bool:
    """Same containment but for the strict excursion sets {mu > c}."""
    for c in levels:
        inner = lower > c
        true_set = mu > c
        outer = upper > c
        if np.any(inner & ~true_set) or np.any(true_set & ~outer):
            return False
    return True


def brute_interval_event(lower, upper, mu, pairs) -> bool:
    """Containment of {a <= mu <= b} for the given (a, b) pairs."""
    for a, b in pairs:
        inner = (lower >= a) & (upper <= b)
        true_set = (mu >= a) & (mu <= b)
        outer = (upper >= a) & (lower <= b)
        if np.any(inner & ~true_set) or np.any(true_set & ~outer):
            return False
    return True


def brute_interval_event_all_pairs(lower, upper, mu, values) -> bool:
    """Vectorized exhaustive check over every pair a < b from ``values``."""
    v = np.asarray(values, dtype=float)
    lo_ge = lower[None, :] >= v[:, None]  # (k, S): lower >= v_i
    up_le = upper[None, :] <= v[:, None]
    up_ge = upper[None, :] >= v[:, None]
    lo_le = lower[None, :] <= v[:, None]
    mu_ge = mu[None, :] >= v[:, None]
    mu_le = mu[None, :] <= v[:, None]
    k = v.size
    ii, jj = np.triu_indices(k, 1)  # pairs with v[ii] < v[jj]
    # violation for pair (i, j):
    #   inner \ true: (lower>=v_i & upper<=v_j) and not (mu>=v_i & mu<=v_j)
    #   true \ outer: (mu>=v_i & mu<=v_j) and not (upper>=v_i & lower<=v_j)
    inner = lo_ge[ii] & up_le[jj]
    true_set = mu_ge[ii] & mu_le[jj]
    outer = up_ge[ii] & lo_le[jj]
    bad = np.any(inner & ~true_set) or np.any(true_set & ~outer)
    return not bad


def random_instance(rng, max_size=20, tie_prob=0.5):
    """A random (lower, upper, mu) triple with heavy tie pressure.

    With probability tie_prob all three vectors are drawn from a small
    integer pool so exact ties across lower/upper/mu are common;
    otherwise they are continuous.
    """
    size = int(rng.integers(1, max_size + 1))
    if rng.random() < tie_prob:
        pool = rng.integers(-3, 4, size=(3, size)).astype(float)
        a, b, m = pool
    else:
        a = rng.normal(size=size)
        b = rng.normal(size=size)
        m = rng.normal(size=size)
    lower = np.minimum(a, b)
    upper = np.maximum(a, b)
    # half the time force mu inside the band so both outcomes occur often
    if rng.random() < 0.5:
        t = rng.random(size)
        m = lower + t * (upper - lower)
    return lower, upper, m


# ----------------------------------------------------------- fit oracles

def mp_ols(X, y, dps=50):
    """OLS coefficients via mpmath normal equations at high precision."""
    import mpmath as mp

    with mp.workdps(dps):
        Xm = mp.matrix(X.tolist())
        ym = mp.matrix([[float(v)] for v in y])
        XtX = Xm.T * Xm
        Xty = Xm.T * ym
        beta = mp.lu_solve(XtX, Xty)
        return np.array([float(beta[i]) for i in range(beta.rows)])


def _loglik(X, y, beta):
    eta = X @ beta
    # log(1 + e^eta) computed stably
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def newton_logistic(X, y, tol=1e-12, max_iter=200):
    """Logistic MLE by damped Newton with an Armijo backtracking line
    search on the log-likelihood; unrelated to the library's IRLS loop."""
    n, p = X.shape
    beta = np.zeros(p)
    for _ in range(max_iter):
        eta = X @ beta
        pr = 1.0 / (1.0 + np.exp(-eta))
        grad = X.T @ (y - pr)
        if np.max(np.abs(grad)) < tol:
            return beta
        H = X.T @ (X * (pr * (1.0 - pr))[:, None])
        step = np.linalg.solve(H, grad)
        f0 = _loglik(X, y, beta)
        slope = float(grad @ step)
        t = 1.0
        # near the optimum the predicted gain drops below the float
        # resolution of the log-likelihood and the Armijo comparison is
        # rounding noise; take the undamped step (quadratic phase)
        if slope > 256.0 * np.finfo(float).eps * (1.0 + abs(f0)):
            while _loglik(X, y, beta + t * step) < f0 + 1e-4 * t * slope:
                t *= 0.5
                if t < 1e-12:
                    break
        beta = beta + t * step
    return beta
