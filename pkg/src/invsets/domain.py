"""Finite evaluation domains, fields on them, bands, and index sets.

A Domain is an ordered finite collection of distinct points, each a
coordinate vector (grid scenarios) or an indexed label (coefficient
scenarios). All set logic downstream is positional: an IndexSet is a
boolean membership vector aligned with the domain's point order, and
complement means boolean negation over the full domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "Domain",
    "Field",
    "Band",
    "IndexSet",
    "threshold_set",
    "is_subset",
    "complement",
]


def _as_float_array(values, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class Domain:
    """Ordered finite set of evaluation points.

    Parameters
    ----------
    coords : array_like, shape (size, ndim)
        Point coordinates. For label-only domains these are running
        indices 0..size-1 (see ``from_labels``).
    labels : tuple of str, optional
        Per-point names for discrete domains (e.g. coefficient names).
    axis_names : tuple of str, optional
        Coordinate column names used in CSV output; defaults to ``s``
        for one dimension and ``s1..sd`` otherwise.
    """

    coords: np.ndarray
    labels: tuple[str, ...] | None = None
    axis_names: tuple[str, ...] | None = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        coords = _as_float_array(coords, "coords", 2)
        if coords.shape[0] == 0:
            raise ValidationError("domain must contain at least one point")
        if np.unique(coords, axis=0).shape[0] != coords.shape[0]:
            raise ValidationError("domain points must be distinct")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if self.labels is not None:
            labels = tuple(str(v) for v in self.labels)
            if len(labels) != coords.shape[0]:
                raise ValidationError("labels length must match number of points")
            if len(set(labels)) != len(labels):
                raise ValidationError("labels must be distinct")
            object.__setattr__(self, "labels", labels)
        names = self.axis_names
        if names is None:
            d = coords.shape[1]
            names = ("s",) if d == 1 else tuple(f"s{i+1}" for i in range(d))
        else:
            names = tuple(str(v) for v in names)
            if len(names) != coords.shape[1]:
                raise ValidationError("axis_names length must match coordinate dimension")
        object.__setattr__(self, "axis_names", names)

    @classmethod
    def from_labels(cls, labels) -> "Domain":
        labels = tuple(str(v) for v in labels)
        return cls(np.arange(len(labels), dtype=float), labels=labels, axis_names=("index",))

    @property
    def size(self) -> int:
        return self.coords.shape[0]

    @property
    def ndim(self) -> int:
        return self.coords.shape[1]

    def equals(self, other: "Domain") -> bool:
        return self is other or (
            isinstance(other, Domain)
            and self.coords.shape == other.coords.shape
            and np.array_equal(self.coords, other.coords)
            and self.labels == other.labels
        )

    def point_names(self) -> list[str]:
        """Human-readable point names, used as sample-matrix CSV headers."""
        if self.labels is not None:
            return list(self.labels)
        if self.ndim == 1:
            return [repr(float(c)) for c in self.coords[:, 0]]
        return ["|".join(repr(float(v)) for v in row) for row in self.coords]


def _check_domain(domain: Domain, values, name: str) -> np.ndarray:
    arr = _as_float_array(values, name, 1)
    if arr.shape[0] != domain.size:
        raise ValidationError(
            f"{name} has {arr.shape[0]} entries for a domain of size {domain.size}"
        )
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Field:
    """One finite real value per domain point."""

    domain: Domain
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_domain(self.domain, self.values, "values"))


@dataclass(frozen=True, eq=False)
class Band:
    """Simultaneous confidence band: pointwise lower/upper envelopes.

    Invariants: shared domain, finite values, lower <= upper everywhere,
    0 < alpha < 1. A zero-width band (lower == upper) is legal.
    """

    domain: Domain
    lower: np.ndarray
    upper: np.ndarray
    alpha: float

    def __post_init__(self):
        lo = _check_domain(self.domain, self.lower, "lower")
        hi = _check_domain(self.domain, self.upper, "upper")
        if np.any(lo > hi):
            raise ValidationError("band lower envelope exceeds upper envelope")
        if not (0.0 < float(self.alpha) < 1.0):
            raise ValidationError(f"alpha must be in (0, 1), got {self.alpha}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "alpha", float(self.alpha))


@dataclass(frozen=True, eq=False)
class IndexSet:
    """Subset of a domain as a positional boolean membership vector."""

    domain: Domain
    member: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.member)
        if arr.dtype != np.bool_:
            if not np.all((arr == 0) | (arr == 1)):
                raise ValidationError("membership must be boolean or 0/1")
            arr = arr.astype(bool)
        if arr.ndim != 1 or arr.shape[0] != self.domain.size:
            raise ValidationError("membership vector must match domain size")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "member", arr)

    @property
    def count(self) -> int:
        return int(self.member.sum())

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.member)

    def equals(self, other: "IndexSet") -> bool:
        return self.domain.equals(other.domain) and np.array_equal(self.member, other.member)


def _same_domain(a: Domain, b: Domain, what: str) -> None:
    if not a.equals(b):
        raise ValidationError(f"{what} requires matching domains")


def threshold_set(field: Field, level: float, direction: str) -> IndexSet:
    """Points where the field is >= level (``"ge"``) or <= level (``"le"``).

    Comparisons are exact, no epsilon: ties at the level are members.
    """
    level = float(level)
    if not np.isfinite(level):
        raise ValidationError("threshold level must be finite")
    if direction == "ge":
        return IndexSet(field.domain, field.values >= level)
    if direction == "le":
        return IndexSet(field.domain, field.values <= level)
    raise ValidationError(f"direction must be 'ge' or 'le', got {direction!r}")


def is_subset(a: IndexSet, b: IndexSet) -> bool:
    """True when every member of ``a`` is a member of ``b``. Empty sets are
    subsets of everything."""
    _same_domain(a.domain, b.domain, "is_subset")
    return bool(np.all(b.member | ~a.member))


def complement(a: IndexSet) -> IndexSet:
    """Set difference domain \\ a; finite-domain closure of the complement."""
    return IndexSet(a.domain, ~a.member)
