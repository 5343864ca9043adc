"""Inversion of simultaneous confidence bands into confidence sets.

A band with simultaneous coverage of the target function yields, by
thresholding its envelopes, inner and outer confidence sets for inverse
upper/lower excursion sets and inverse interval sets, simultaneously
over every level (or interval) at once. The containment_event_* helpers
evaluate that simultaneous containment exactly for a known truth field,
which is what the coverage harness counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Band, Field, IndexSet, threshold_set
from .errors import ValidationError

__all__ = [
    "ExcursionCS",
    "IntervalCS",
    "upper_excursion_cs",
    "lower_excursion_cs",
    "interval_cs",
    "sci_event",
    "breakpoint_levels",
    "containment_event_upper",
    "containment_event_lower",
    "containment_event_interval",
    "containment_event_interval_grid",
]


@dataclass(frozen=True, eq=False)
class ExcursionCS:
    """Inner/outer confidence sets for one excursion set.

    direction "ge" targets {s : mu(s) >= level}, "le" targets
    {s : mu(s) <= level}. Invariant: inner is a subset of outer.
    """

    level: float
    direction: str
    inner: IndexSet
    outer: IndexSet

    def __post_init__(self):
        if self.direction not in ("ge", "le"):
            raise ValidationError(f"direction must be 'ge' or 'le', got {self.direction!r}")
        if not self.inner.domain.equals(self.outer.domain):
            raise ValidationError("inner and outer sets must share a domain")
        if np.any(self.inner.member & ~self.outer.member):
            raise ValidationError("inner set must be contained in outer set")


@dataclass(frozen=True, eq=False)
class IntervalCS:
    """Inner/outer confidence sets for {s : lo <= mu(s) <= hi}."""

    lo: float
    hi: float
    inner: IndexSet
    outer: IndexSet

    def __post_init__(self):
        if not (float(self.lo) < float(self.hi)):
            raise ValidationError("interval requires lo < hi")
        if not self.inner.domain.equals(self.outer.domain):
            raise ValidationError("inner and outer sets must share a domain")
        if np.any(self.inner.member & ~self.outer.member):
            raise ValidationError("inner set must be contained in outer set")


def upper_excursion_cs(band: Band, level: float) -> ExcursionCS:
    """Confidence sets for the upper excursion set at one level.

    Inner set: lower envelope >= level. Outer set: upper envelope >= level.
    """
    inner = threshold_set(Field(band.domain, band.lower), level, "ge")
    outer = threshold_set(Field(band.domain, band.upper), level, "ge")
    return ExcursionCS(float(level), "ge", inner, outer)


def lower_excursion_cs(band: Band, level: float) -> ExcursionCS:
    """Confidence sets for the lower excursion set: inner thresholds the
    upper envelope, outer the lower envelope."""
    inner = threshold_set(Field(band.domain, band.upper), level, "le")
    outer = threshold_set(Field(band.domain, band.lower), level, "le")
    return ExcursionCS(float(level), "le", inner, outer)


def interval_cs(band: Band, lo: float, hi: float) -> IntervalCS:
    """Confidence sets for {s : lo <= mu(s) <= hi}, lo < hi.

    Inner: whole band inside [lo, hi]. Outer: band overlaps [lo, hi].
    """
    lo = float(lo)
    hi = float(hi)
    if not lo < hi:
        raise ValidationError("interval requires lo < hi")
    inner = IndexSet(band.domain, (band.lower >= lo) & (band.upper <= hi))
    outer = IndexSet(band.domain, (band.upper >= lo) & (band.lower <= hi))
    return IntervalCS(lo, hi, inner, outer)


def _check_pair(band: Band, truth: Field) -> np.ndarray:
    if not band.domain.equals(truth.domain):
        raise ValidationError("band and truth must share a domain")
    return truth.values


def sci_event(band: Band, truth: Field) -> bool:
    """True when the truth lies inside the band at every point."""
    mu = _check_pair(band, truth)
    return bool(np.all((band.lower <= mu) & (mu <= band.upper)))


def breakpoint_levels(band: Band, truth: Field) -> np.ndarray:
    """Sorted distinct values of the two envelopes and the truth.

    Containment over this finite level set is equivalent to containment
    over every real level, which is in turn equivalent to the band event:
    a point with mu(s) < lower(s) is exposed at level lower(s), and one
    with mu(s) > upper(s) at level mu(s).
    """
    mu = _check_pair(band, truth)
    return np.unique(np.concatenate([band.lower, band.upper, mu]))


def _sorted_levels(levels) -> np.ndarray:
    arr = np.asarray(levels, dtype=float).ravel()
    if arr.size == 0:
        return arr
    if not np.all(np.isfinite(arr)):
        raise ValidationError("levels must be finite")
    return np.sort(arr)


def containment_event_upper(band: Band, truth: Field, levels) -> bool:
    """Simultaneous two-sided containment for upper excursion sets.

    True iff for every level c in ``levels`` the inner CS is inside the
    true excursion set {mu >= c} and that set is inside the outer CS.
    A violation at point s exists iff some level falls in (mu(s), lower(s)]
    (inner too big) or in (upper(s), mu(s)] (outer too small), so one
    pass of binary searches settles all levels at once.
    """
    mu = _check_pair(band, truth)
    c = _sorted_levels(levels)
    if c.size == 0:
        return True
    hi_in = np.searchsorted(c, band.lower, side="right")
    lo_in = np.searchsorted(c, mu, side="right")
    if np.any(hi_in > lo_in):
        return False
    hi_out = np.searchsorted(c, mu, side="right")
    lo_out = np.searchsorted(c, band.upper, side="right")
    return not np.any(hi_out > lo_out)


def containment_event_lower(band: Band, truth: Field, levels) -> bool:
    """Simultaneous containment for lower excursion sets.

    Violations at s: some level in [upper(s), mu(s)) (inner too big) or
    in [mu(s), lower(s)) (outer too small).
    """
    mu = _check_pair(band, truth)
    c = _sorted_levels(levels)
    if c.size == 0:
        return True
    n_in = np.searchsorted(c, mu, side="left") - np.searchsorted(c, band.upper, side="left")
    if np.any(n_in > 0):
        return False
    n_out = np.searchsorted(c, band.lower, side="left") - np.searchsorted(c, mu, side="left")
    return not np.any(n_out > 0)


def containment_event_interval(band: Band, truth: Field, pairs) -> bool:
    """Simultaneous containment for inverse interval sets over explicit
    (lo, hi) pairs, each with lo < hi. Quadratic in pairs x points; meant
    for modest pair lists. Use containment_event_interval_grid for the
    all-pairs-from-a-value-grid protocol.
    """
    mu = _check_pair(band, truth)
    arr = np.asarray(pairs, dtype=float)
    if arr.size == 0:
        return True
    arr = arr.reshape(-1, 2)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("interval pairs must be finite")
    if not np.all(arr[:, 0] < arr[:, 1]):
        raise ValidationError("interval pairs require lo < hi")
    lo_env, hi_env = band.lower, band.upper
    for a, b in arr:
        inner = (lo_env >= a) & (hi_env <= b)
        in_truth = (a <= mu) & (mu <= b)
        if np.any(inner & ~in_truth):
            return False
        outer = (hi_env >= a) & (lo_env <= b)
        if np.any(in_truth & ~outer):
            return False
    return True


def containment_event_interval_grid(band: Band, truth: Field, values) -> bool:
    """Containment over ALL pairs (a, b), a < b, drawn from a value grid.

    Equivalent to containment_event_interval on the full i<j pair list but
    evaluated in O(size * log k). Per point with envelopes (l, u) and truth
    m, a violating pair exists in exactly these cases:

    1. a in (m, l], b = max(V) works when max(V) >= u and max(V) > a
    (inner set claims s although m < a);
    2. b in [u, m) with b > min(V) and min(V) <= l (m > b);
    3. a in (u, m], b = max(V) works when max(V) >= m and max(V) > a
    (outer set misses s although a <= m <= b via u < a);
    4. b in [m, l) with b > min(V) and min(V) <= m (l > b).

    In each case the named witness is feasible iff any witness is.
    """
    mu = _check_pair(band, truth)
    v = np.unique(np.asarray(values, dtype=float).ravel())
    if v.size and not np.all(np.isfinite(v)):
        raise ValidationError("grid values must be finite")
    if v.size < 2:
        return True
    vmin, vmax = v[0], v[-1]
    l, u = band.lower, band.upper
    k = v.size

    # case 1: smallest grid value above m, paired with vmax
    i1 = np.searchsorted(v, mu, side="right")
    ok1 = i1 < k
    a1 = v[np.minimum(i1, k - 1)]
    c1 = ok1 & (a1 <= l) & (vmax >= u) & (vmax > a1)

    # case 2: largest grid value below m, paired with vmin
    j2 = np.searchsorted(v, mu, side="left")
    ok2 = j2 > 0
    b2 = v[np.maximum(j2, 1) - 1]
    c2 = ok2 & (b2 >= u) & (vmin <= l) & (vmin < b2)

    # case 3: smallest grid value above u, paired with vmax
    i3 = np.searchsorted(v, u, side="right")
    ok3 = i3 < k
    a3 = v[np.minimum(i3, k - 1)]
    c3 = ok3 & (a3 <= mu) & (vmax >= mu) & (vmax > a3)

    # case 4: largest grid value below l, paired with vmin
    j4 = np.searchsorted(v, l, side="left")
    ok4 = j4 > 0
    b4 = v[np.maximum(j4, 1) - 1]
    c4 = ok4 & (b4 >= mu) & (vmin <= mu) & (vmin < b4)

    return not bool(np.any(c1 | c2 | c3 | c4))
