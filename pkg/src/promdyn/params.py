"""Rectangular parameter domains, subdomain partitions, and query weights.

A domain is a box in R^l. It is tiled with axis-aligned subdomains of fixed
extent: floor(span/extent) base tiles per axis anchored at the lower bound,
plus one end-aligned tile per axis when a remainder is left, so the union
always covers the box. Tiles that use an end-aligned interval overlap their
neighbours. Every subdomain trains at its 2^l corners plus the centroid; the
centroid is the reference configuration for tangent-space operations.

All distances (weights, tie-breaking, containment tolerances) are measured in
per-axis [0, 1]-normalized coordinates so axes with different physical scales
carry equal weight.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, OutOfDomainError

# Containment and exact-hit tolerance in normalized coordinates.
_NORM_TOL = 1e-12


@dataclass(frozen=True)
class ParameterAxis:
    """One coordinate of the parametric domain."""

    label: str
    lower: float
    upper: float

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ConfigError(f"axis {self.label!r}: bounds must be finite")
        if not self.upper > self.lower:
            raise ConfigError(
                f"axis {self.label!r}: degenerate range [{self.lower}, {self.upper}]"
            )

    @property
    def span(self) -> float:
        return self.upper - self.lower

    def normalize(self, x):
        return (np.asarray(x, dtype=float) - self.lower) / self.span


def _as_axes(domain) -> tuple:
    axes = []
    for k, item in enumerate(domain):
        if isinstance(item, ParameterAxis):
            axes.append(item)
        else:
            lower, upper = item
            axes.append(ParameterAxis(f"p{k}", float(lower), float(upper)))
    if not axes:
        raise ConfigError("domain needs at least one axis")
    return tuple(axes)


@dataclass(frozen=True)
class Subdomain:
    """Axis-aligned box with its training points (corners + centroid)."""

    index: int
    lower: np.ndarray
    upper: np.ndarray
    axes: tuple
    training_points: np.ndarray  # (2^l + 1, l); centroid last
    reference_index: int
    overlapping: bool = False

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def centroid(self) -> np.ndarray:
        return self.training_points[self.reference_index]

    def normalize(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return np.array([ax.normalize(q[d]) for d, ax in enumerate(self.axes)])

    def contains(self, q, tol: float = _NORM_TOL) -> bool:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.ndim,):
            raise ValueError(f"point has shape {q.shape}, expected ({self.ndim},)")
        qn = self.normalize(q)
        lo = self.normalize(self.lower)
        hi = self.normalize(self.upper)
        return bool(np.all(qn >= lo - tol) and np.all(qn <= hi + tol))


def _make_subdomain(index, lower, upper, axes, overlapping) -> Subdomain:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    corners = np.array(list(itertools.product(*zip(lower, upper))), dtype=float)
    centroid = 0.5 * (lower + upper)
    points = np.vstack([corners, centroid])
    return Subdomain(
        index=index,
        lower=lower,
        upper=upper,
        axes=axes,
        training_points=points,
        reference_index=len(points) - 1,
        overlapping=overlapping,
    )


@dataclass(frozen=True)
class ParameterGrid:
    """A partitioned domain: axes plus the subdomains tiling them."""

    axes: tuple
    subdomains: tuple
    allow_overlap: bool = True
    _point_index: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def normalize(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return np.array([ax.normalize(q[d]) for d, ax in enumerate(self.axes)])

    def contains(self, q) -> bool:
        return any(s.contains(q) for s in self.subdomains)

    def training_points(self) -> np.ndarray:
        """Unique training points over all subdomains, deterministically ordered."""
        seen = {}
        for sub in self.subdomains:
            for p in sub.training_points:
                key = tuple(np.round(self.normalize(p), 12))
                if key not in seen:
                    seen[key] = p
        return np.array([seen[k] for k in sorted(seen)], dtype=float)


def partition_grid(domain, divisions=None, *, extents=None, overlap="shift") -> ParameterGrid:
    """Tile a box domain into subdomains.

    Parameters
    ----------
    domain : sequence of (lower, upper) pairs or ParameterAxis
    divisions : per-axis integer counts for an exact, non-overlapping tiling.
    extents : per-axis physical subdomain sizes. Remainders are covered by one
        end-aligned (overlapping) tile per axis when ``overlap="shift"``.
    overlap : "shift" or "none".
    """
    axes = _as_axes(domain)
    if (divisions is None) == (extents is None):
        raise ConfigError("specify exactly one of divisions= or extents=")
    if overlap not in ("shift", "none"):
        raise ConfigError(f"unknown overlap strategy {overlap!r}")

    per_axis = []  # list over axes of [(lo, hi, shifted)]
    if divisions is not None:
        divisions = list(divisions)
        if len(divisions) != len(axes):
            raise ConfigError("divisions must give one count per axis")
        for ax, k in zip(axes, divisions):
            k = int(k)
            if k < 1:
                raise ConfigError(f"axis {ax.label!r}: divisions must be >= 1")
            edges = np.linspace(ax.lower, ax.upper, k + 1)
            per_axis.append([(edges[i], edges[i + 1], False) for i in range(k)])
    else:
        extents = list(extents)
        if len(extents) != len(axes):
            raise ConfigError("extents must give one size per axis")
        for ax, e in zip(axes, extents):
            e = float(e)
            if not 0.0 < e <= ax.span * (1.0 + 1e-12):
                raise ConfigError(
                    f"axis {ax.label!r}: extent {e} must lie in (0, {ax.span}]"
                )
            e = min(e, ax.span)
            nb = int(np.floor(ax.span / e + 1e-9))
            intervals = [(ax.lower + i * e, ax.lower + (i + 1) * e, False) for i in range(nb)]
            covered = ax.lower + nb * e
            if covered < ax.upper - 1e-9 * ax.span:
                if overlap == "none":
                    raise ConfigError(
                        f"axis {ax.label!r}: extent {e} leaves an uncovered remainder "
                        f"and overlap='none' forbids the end-aligned tile"
                    )
                intervals.append((ax.upper - e, ax.upper, True))
            per_axis.append(intervals)

    boxes = []
    for combo in itertools.product(*per_axis):
        lower = [iv[0] for iv in combo]
        upper = [iv[1] for iv in combo]
        shifted = any(iv[2] for iv in combo)
        boxes.append((shifted, lower, upper))
    boxes.sort(key=lambda b: b[0])  # base tiles first, stable within each group

    subs = tuple(
        _make_subdomain(i, lower, upper, axes, shifted)
        for i, (shifted, lower, upper) in enumerate(boxes)
    )
    return ParameterGrid(axes=axes, subdomains=subs, allow_overlap=(overlap != "none"))


def locate(grid: ParameterGrid, q) -> Subdomain:
    """Subdomain responsible for q: nearest centroid among containing boxes.

    Distances are measured in normalized coordinates; exact ties fall to the
    lowest subdomain index. Raises OutOfDomainError when no subdomain contains
    q (no extrapolation).
    """
    q = np.asarray(q, dtype=float)
    candidates = [s for s in grid.subdomains if s.contains(q)]
    if not candidates:
        raise OutOfDomainError(
            f"point {q.tolist()} lies outside the partitioned domain"
        )
    qn = grid.normalize(q)
    best = min(
        candidates,
        key=lambda s: (float(np.linalg.norm(qn - grid.normalize(s.centroid))), s.index),
    )
    return best


def interpolation_weights(sub: Subdomain, q, power: float = 2.0) -> np.ndarray:
    """Inverse-distance weights of q against the subdomain's training points.

    Shepard weights w_i = d_i^-power / sum_j d_j^-power with distances in
    normalized coordinates. A query within 1e-12 of a training point gets a
    one-hot weight vector.
    """
    q = np.asarray(q, dtype=float)
    if not sub.contains(q):
        raise OutOfDomainError(
            f"point {q.tolist()} lies outside subdomain {sub.index}"
        )
    qn = sub.normalize(q)
    pts = np.array([sub.normalize(p) for p in sub.training_points])
    d = np.linalg.norm(pts - qn, axis=1)
    hit = d < _NORM_TOL
    if np.any(hit):
        w = np.zeros(len(d))
        w[np.argmax(hit)] = 1.0
        return w
    inv = d ** (-power)
    return inv / inv.sum()
