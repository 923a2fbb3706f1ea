"""Snapshot collection and proper orthogonal decomposition bases.

Bases come from truncated SVDs of displacement snapshot matrices. Columns
carry a deterministic sign convention (the largest-magnitude entry of each
column is positive) so repeated runs and persisted artifacts are identical.
"""

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import BasisRankError

_ORTHO_TOL = 1e-10


class BasisProvenance(Enum):
    LOCAL_SNAPSHOT = "local_snapshot"
    GLOBAL_REGION = "global_region"
    GLOBAL_DOMAIN = "global_domain"
    INTERPOLATED = "interpolated"


@dataclass
class SnapshotSet:
    """Displacement snapshots of one training simulation.

    displacements has shape (n, T) with one column per saved time step;
    element_forces (n_links, T) optionally keeps the committed link forces for
    hyper-reduction training.
    """

    parameter_point: np.ndarray
    displacements: np.ndarray
    dt: float
    element_forces: np.ndarray | None = None

    def __post_init__(self):
        self.parameter_point = np.asarray(self.parameter_point, dtype=float)
        self.displacements = np.asarray(self.displacements, dtype=float)
        if self.displacements.ndim != 2:
            raise ValueError("displacements must be (n, T)")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.element_forces is not None:
            self.element_forces = np.asarray(self.element_forces, dtype=float)
            if self.element_forces.shape[1] != self.displacements.shape[1]:
                raise ValueError("element forces must cover the same time steps")

    @property
    def ndof(self) -> int:
        return self.displacements.shape[0]

    @property
    def steps(self) -> int:
        return self.displacements.shape[1]


@dataclass(frozen=True)
class ReductionBasis:
    """Orthonormal n x r basis with its origin and singular values."""

    matrix: np.ndarray
    singular_values: np.ndarray
    provenance: BasisProvenance
    origin: tuple | int | None = None

    def __post_init__(self):
        matrix = np.ascontiguousarray(self.matrix, dtype=float)
        sv = np.asarray(self.singular_values, dtype=float)
        if matrix.ndim != 2:
            raise ValueError("basis matrix must be 2-D")
        n, r = matrix.shape
        if r > n:
            raise ValueError(f"basis cannot be wider than tall ({n}x{r})")
        gram = matrix.T @ matrix
        if r and np.max(np.abs(gram - np.eye(r))) > _ORTHO_TOL:
            raise ValueError("basis columns are not orthonormal")
        if sv.shape != (r,):
            raise ValueError("need one singular value per column")
        if r and np.any(np.diff(sv) > 1e-12 * max(sv[0], 1.0)):
            raise ValueError("singular values must be non-increasing")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "singular_values", sv)

    @property
    def ndof(self) -> int:
        return self.matrix.shape[0]

    @property
    def order(self) -> int:
        return self.matrix.shape[1]

    @cached_property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.matrix.tobytes()).hexdigest()


def svd_sign_convention(u: np.ndarray) -> np.ndarray:
    """Flip columns so each column's largest-magnitude entry is positive."""
    u = u.copy()
    if u.size == 0:
        return u
    lead = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[lead, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs


def _numerical_rank(s: np.ndarray, shape) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > s[0] * max(shape) * np.finfo(float).eps))


def order_for_energy(singular_values, fraction: float) -> int:
    """Smallest order capturing the given fraction of squared singular-value energy."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("energy fraction must lie in (0, 1]")
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or not np.any(s > 0.0):
        raise ValueError("no energy to capture: all singular values are zero")
    energy = np.cumsum(s**2)
    return int(np.searchsorted(energy, fraction * energy[-1] * (1.0 - 1e-14))) + 1


def _resolve_order(r, energy, s, shape) -> int:
    if (r is None) == (energy is None):
        raise ValueError("specify exactly one of a fixed order r or an energy fraction")
    if energy is not None:
        return order_for_energy(s, energy)
    return r


def local_basis(snapshots: SnapshotSet, r: int | None = None, *,
                energy: float | None = None) -> ReductionBasis:
    """POD basis of one snapshot matrix, truncated at a fixed order ``r`` or at
    the smallest order capturing an ``energy`` fraction of squared singular values."""
    u_mat = snapshots.displacements
    U, s, _ = np.linalg.svd(u_mat, full_matrices=False)
    r = _resolve_order(r, energy, s, u_mat.shape)
    if r < 1:
        raise ValueError("reduction order must be >= 1")
    rank = _numerical_rank(s, u_mat.shape)
    if r > rank:
        raise BasisRankError(
            f"requested order {r} exceeds the numerical rank {rank} of the snapshots"
        )
    return ReductionBasis(
        matrix=svd_sign_convention(U[:, :r]),
        singular_values=s[:r],
        provenance=BasisProvenance.LOCAL_SNAPSHOT,
        origin=tuple(snapshots.parameter_point),
    )


def pooled_basis(snapshot_sets, r: int | None = None, provenance=BasisProvenance.GLOBAL_DOMAIN,
                 origin=None, *, energy: float | None = None) -> ReductionBasis:
    """POD basis of several snapshot matrices stacked column-wise."""
    mats = [s.displacements for s in snapshot_sets]
    if not mats:
        raise ValueError("need at least one snapshot set")
    pooled = np.hstack(mats)
    U, s, _ = np.linalg.svd(pooled, full_matrices=False)
    r = _resolve_order(r, energy, s, pooled.shape)
    if r < 1:
        raise ValueError("reduction order must be >= 1")
    rank = _numerical_rank(s, pooled.shape)
    if r > rank:
        raise BasisRankError(
            f"requested order {r} exceeds the numerical rank {rank} of the pooled snapshots"
        )
    return ReductionBasis(
        matrix=svd_sign_convention(U[:, :r]),
        singular_values=s[:r],
        provenance=provenance,
        origin=origin,
    )


def stack_and_compress(tangents, r_global: int | None = None, origin=None) -> ReductionBasis:
    """Orthonormal basis of the span of stacked tangent-space matrices.

    ``tangents`` is a sequence of (n, m) arrays or objects exposing
    ``.matrix``. With ``r_global=None`` the basis keeps every direction above
    the numerical-rank cutoff (untruncated).
    """
    mats = [t.matrix if hasattr(t, "matrix") else np.asarray(t, dtype=float) for t in tangents]
    if not mats:
        raise ValueError("need at least one tangent matrix")
    stacked = np.hstack(mats)
    U, s, _ = np.linalg.svd(stacked, full_matrices=False)
    rank = _numerical_rank(s, stacked.shape)
    if r_global is None:
        r = rank
    else:
        if r_global < 0:
            raise ValueError("r_global must be non-negative")
        if r_global > rank:
            raise BasisRankError(
                f"requested region order {r_global} exceeds the numerical rank {rank} "
                f"of the stacked tangents"
            )
        r = r_global
    return ReductionBasis(
        matrix=svd_sign_convention(U[:, :r]),
        singular_values=s[:r],
        provenance=BasisProvenance.GLOBAL_REGION,
        origin=origin,
    )


@dataclass
class OrderSelection:
    """Result of an order sweep: chosen order plus the full error table."""

    order: int
    satisfied: bool
    table: list = field(default_factory=list)  # dicts: r, re_u, re_sigma


def choose_order(model, snapshots: SnapshotSet, loads, err_threshold_u: float,
                 err_threshold_sigma: float | None = None, *, integrator=None,
                 r_max: int | None = None) -> OrderSelection:
    """Smallest reduction order meeting reconstruction-error thresholds.

    Sweeps r upward, rerunning the reduced model on ``loads`` and comparing
    displacement histories (and, when a sigma threshold is given, the link
    forces at the final step) against the snapshot's own response. When no
    order up to the snapshot rank satisfies the thresholds the best achieved
    order is reported with ``satisfied=False``.
    """
    from .metrics import relative_error
    from .newmark import IntegratorConfig, integrate_reduced
    from .rom import reduce_model

    if err_threshold_u <= 0.0:
        raise ValueError("displacement threshold must be positive")
    want_sigma = err_threshold_sigma is not None
    if want_sigma and snapshots.element_forces is None:
        raise ValueError("sigma threshold given but the snapshots carry no element forces")
    if integrator is None:
        integrator = IntegratorConfig(dt=snapshots.dt)

    U, s, _ = np.linalg.svd(snapshots.displacements, full_matrices=False)
    rank = _numerical_rank(s, snapshots.displacements.shape)
    if rank == 0:
        raise BasisRankError("snapshot matrix has rank zero")
    limit = rank if r_max is None else min(r_max, rank)

    table = []
    best = None
    for r in range(1, limit + 1):
        basis = ReductionBasis(
            matrix=svd_sign_convention(U[:, :r]),
            singular_values=s[:r],
            provenance=BasisProvenance.LOCAL_SNAPSHOT,
            origin=tuple(snapshots.parameter_point),
        )
        rom = reduce_model(model, basis)
        hist = integrate_reduced(rom, loads, integrator, record_element_forces=want_sigma)
        rec = rom.reconstruct(hist.displacements)  # (T, n)
        re_u = relative_error(snapshots.displacements, rec.T)
        re_sigma = None
        if want_sigma:
            re_sigma = relative_error(
                snapshots.element_forces[:, -1], hist.element_forces[:, -1]
            )
        table.append({"r": r, "re_u": re_u, "re_sigma": re_sigma})
        if best is None or re_u < best[1]:
            best = (r, re_u)
        if re_u <= err_threshold_u and (not want_sigma or re_sigma <= err_threshold_sigma):
            return OrderSelection(order=r, satisfied=True, table=table)
    return OrderSelection(order=best[0], satisfied=False, table=table)
