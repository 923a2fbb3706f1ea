"""Galerkin-reduced systems and the parametric basis variants.

Four ways to obtain a projection basis for a query point q:

* global: one POD basis pooled over every training snapshot in the domain.
* local: per subdomain, the POD basis pooled over that subdomain's training
  snapshots (the per-subdomain analog of a global basis; no interpolation).
* entries: the training bases are carried to the tangent space at the
  subdomain's centroid basis and their entries are interpolated directly;
  cost per query scales with the full model size n.
* coefficients: the tangent images are expressed in a common region basis,
  Gamma_i = B Xi_i, and only the small coefficient matrices Xi_i are
  interpolated; cost per query is independent of n. With an untruncated
  region basis this reproduces entry interpolation exactly.

Reduced systems implement the integrator's system interface, own their link
states, and count the element evaluations and interpolation operations they
perform so cost-scaling claims are measurable.
"""

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import BasisMismatchError, MissingArtifactError
from .excitation import LoadHistory
from .grassmann import TangentVector, exp_map, log_map
from .model import StructuralModel, bw_rk4_step, bw_rk4_step_with_sensitivity
from .params import Subdomain, interpolation_weights
from .pod import (
    BasisProvenance,
    ReductionBasis,
    SnapshotSet,
    local_basis,
    pooled_basis,
    stack_and_compress,
)


class Variant(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"
    ENTRIES = "entries"
    COEFFICIENTS = "coefficients"


_XI_RESIDUAL_TOL = 1e-8


class ReducedSystem:
    """Galerkin projection of a structural model onto a reduction basis.

    The linear operators are projected once; the hysteretic link forces are
    evaluated per step, either over every link or, with a hyper mesh, over the
    selected links with their ECSW weights. Link states for unselected
    elements are never touched.
    """

    def __init__(self, model: StructuralModel, basis: ReductionBasis, hyper=None):
        if basis.ndof != model.ndof:
            raise ValueError(
                f"basis has {basis.ndof} DOFs, model has {model.ndof}"
            )
        if hyper is not None:
            fingerprint_ok = hyper.basis_fingerprint == basis.fingerprint
            region_ok = (
                hyper.subdomain_index is not None
                and basis.origin == hyper.subdomain_index
            )
            if not (fingerprint_ok or region_ok):
                raise BasisMismatchError(
                    "hyper mesh was trained for a different basis "
                    f"(mesh subdomain {hyper.subdomain_index}, basis origin {basis.origin})"
                )
        self.basis = basis
        self.hyper = hyper
        V = basis.matrix
        self.mass = _symmetrize(V.T @ model.mass @ V)
        np.linalg.cholesky(self.mass)  # reduced mass must stay SPD
        self.damping = _symmetrize(V.T @ model.damping @ V)
        self.stiffness_r = _symmetrize(V.T @ model.stiffness @ V)
        self.ndof = basis.order
        self.total_elements = model.n_links

        idx_i, idx_j = model.link_pairs()
        params = model.link_params()
        if hyper is None:
            selected = np.arange(model.n_links)
            weights = np.ones(model.n_links)
        else:
            selected = np.asarray(hyper.elements, dtype=int)
            weights = np.asarray(hyper.weights, dtype=float)
        self.selected_elements = selected
        self.element_weights = weights
        rows_i = V[idx_i[selected]] if len(selected) else np.zeros((0, self.ndof))
        rows_j = np.zeros_like(rows_i)
        if len(selected):
            inter = idx_j[selected] >= 0
            rows_j[inter] = V[idx_j[selected][inter]]
        self.link_map = rows_i - rows_j  # (n_sel, r); row e is V restricted to link e
        self._k = params["stiffness"][selected]
        self._A = params["amplitude"][selected]
        self._beta = params["beta"][selected]
        self._gamma = params["gamma"][selected]
        self._w = params["exponent"][selected]
        self._zmax = params["z_max"][selected]
        self._z = np.zeros(len(selected))

        self.element_eval_count = 0
        self.interp_op_count = 0

    @property
    def is_hyper(self) -> bool:
        return self.hyper is not None

    def reset(self):
        self._z = np.zeros(len(self.selected_elements))

    def link_states(self) -> np.ndarray:
        return self._z.copy()

    def _advance(self, v_r, dt):
        x_dot = self.link_map @ v_r
        self.element_eval_count += len(self.selected_elements)
        return bw_rk4_step(self._z, x_dot, dt, self._A, self._beta, self._gamma,
                           self._w, self._zmax)

    def force(self, u_r, v_r, dt) -> np.ndarray:
        z = self._advance(v_r, dt)
        f_links = self.element_weights * self._k * self._A * z
        return self.stiffness_r @ u_r + self.link_map.T @ f_links

    def tangent(self, u_r, v_r, dt, dv_du) -> np.ndarray:
        x_dot = self.link_map @ v_r
        _, dz = bw_rk4_step_with_sensitivity(
            self._z, x_dot, dt, self._A, self._beta, self._gamma, self._w, self._zmax
        )
        self.element_eval_count += len(self.selected_elements)
        coeff = self.element_weights * self._k * self._A * dz * dv_du
        return self.stiffness_r + (self.link_map.T * coeff) @ self.link_map

    def commit(self, u_r, v_r, dt):
        self._z = self._advance(v_r, dt)

    def committed_element_forces(self):
        """Per-link committed forces; None under hyper-reduction (partial mesh)."""
        if self.is_hyper:
            return None
        return self._k * self._A * self._z

    def map_loads(self, loads: LoadHistory) -> LoadHistory:
        if loads.ndof != self.basis.ndof:
            raise ValueError(
                f"loads have {loads.ndof} DOFs, basis expects {self.basis.ndof}"
            )
        return LoadHistory(
            dt=loads.dt,
            samples=loads.samples @ self.basis.matrix,
            provenance=dict(loads.provenance) | {"projected": True},
        )

    def reconstruct(self, reduced_history: np.ndarray) -> np.ndarray:
        """Lift reduced coordinates (T, r) back to nodal fields (T, n)."""
        return np.asarray(reduced_history) @ self.basis.matrix.T


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def reduce_model(model: StructuralModel, basis: ReductionBasis, hyper=None) -> ReducedSystem:
    """Project a model onto a basis, optionally with an ECSW hyper mesh.

    A hyper mesh is accepted when the basis is the one it was trained with
    (fingerprint match) or when the basis originates from the mesh's
    subdomain (interpolated and pooled bases of that region); anything else
    raises BasisMismatchError.
    """
    return ReducedSystem(model, basis, hyper=hyper)


@dataclass(frozen=True)
class GlobalModel:
    """Factory for reduced systems built from one domain-wide basis."""

    basis: ReductionBasis

    def system_for(self, model: StructuralModel) -> ReducedSystem:
        return reduce_model(model, self.basis)


def build_global(all_snapshots, r: int) -> GlobalModel:
    """POD of all training snapshots across the parametric domain."""
    return GlobalModel(
        basis=pooled_basis(all_snapshots, r, provenance=BasisProvenance.GLOBAL_DOMAIN)
    )


@dataclass
class RegionModel:
    """Everything a subdomain needs to answer online queries.

    ``coeff_matrices[i]`` holds Xi_i with Gamma_i = region_basis @ Xi_i; with
    an untruncated region basis the factorization is exact and coefficient
    and entry interpolation coincide.
    """

    subdomain: Subdomain
    reference_basis: ReductionBasis
    tangent_locals: list
    region_basis: ReductionBasis
    coeff_matrices: list
    pooled: ReductionBasis
    hyper: object | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return self.reference_basis.order


def build_region(subdomain: Subdomain, snapshots, r_local: int,
                 r_global: int | None = None) -> RegionModel:
    """Offline construction of one subdomain's interpolation data.

    ``snapshots`` must hold one SnapshotSet per training point of the
    subdomain (any order); they are matched to the training points by
    coordinates. Tangent maps are taken at the centroid basis; a failure
    there propagates with the subdomain identified.
    """
    pts = subdomain.training_points
    matched: list = [None] * len(pts)
    for snap in snapshots:
        qn = subdomain.normalize(snap.parameter_point)
        hits = [
            i for i, p in enumerate(pts)
            if np.allclose(qn, subdomain.normalize(p), atol=1e-9, rtol=0.0)
        ]
        if not hits:
            raise ValueError(
                f"snapshot at {snap.parameter_point.tolist()} matches no training "
                f"point of subdomain {subdomain.index}"
            )
        matched[hits[0]] = snap
    missing = [pts[i].tolist() for i, s in enumerate(matched) if s is None]
    if missing:
        raise ValueError(
            f"subdomain {subdomain.index} is missing training snapshots at {missing}"
        )

    locals_ = [local_basis(s, r_local) for s in matched]
    reference = locals_[subdomain.reference_index]
    tangents = []
    for vi in locals_:
        try:
            tangents.append(log_map(reference, vi))
        except Exception as exc:
            raise type(exc)(f"subdomain {subdomain.index}: {exc}") from exc

    region_basis = stack_and_compress(tangents, r_global, origin=subdomain.index)
    B = region_basis.matrix
    coeff = [B.T @ t.matrix for t in tangents]

    # Residuals are measured against the largest tangent: the reference's own
    # tangent is a zero matrix up to roundoff and must not dominate the check.
    scale = max((float(np.linalg.norm(t.matrix)) for t in tangents), default=0.0)
    max_residual = 0.0
    if scale > 0.0:
        for t, xi in zip(tangents, coeff):
            max_residual = max(
                max_residual, float(np.linalg.norm(t.matrix - B @ xi) / scale)
            )
    if r_global is None and max_residual > _XI_RESIDUAL_TOL:
        raise ValueError(
            f"subdomain {subdomain.index}: untruncated region basis fails to "
            f"reproduce its tangents (residual {max_residual:.3e})"
        )

    pooled = pooled_basis(
        matched, r_local, provenance=BasisProvenance.GLOBAL_REGION, origin=subdomain.index
    )
    return RegionModel(
        subdomain=subdomain,
        reference_basis=reference,
        tangent_locals=tangents,
        region_basis=region_basis,
        coeff_matrices=coeff,
        pooled=pooled,
        diagnostics={"xi_residual": max_residual},
    )


def interpolate_basis(region: RegionModel, q, scheme: str | Variant = Variant.COEFFICIENTS):
    """Interpolated basis at q plus the interpolation operation count.

    The count tallies the multiply-add volume of the weighted sum only (the
    piece whose cost differs between the two schemes): coefficient matrices
    are (region order x N_m) regardless of n, tangent entries are (n x N_m).
    """
    scheme = Variant(scheme)
    if scheme not in (Variant.ENTRIES, Variant.COEFFICIENTS):
        raise ValueError(f"{scheme.value!r} is not an interpolation scheme")
    weights = interpolation_weights(region.subdomain, q)
    ops = 0
    if scheme is Variant.COEFFICIENTS:
        acc = np.zeros_like(region.coeff_matrices[0])
        for w, xi in zip(weights, region.coeff_matrices):
            if w == 0.0:
                continue
            acc += w * xi
            ops += xi.size
        gamma_q = region.region_basis.matrix @ acc
    else:
        acc = np.zeros_like(region.tangent_locals[0].matrix)
        for w, t in zip(weights, region.tangent_locals):
            if w == 0.0:
                continue
            acc += w * t.matrix
            ops += t.matrix.size
        gamma_q = acc
    tangent = TangentVector(matrix=gamma_q, reference_id=region.reference_basis.fingerprint)
    basis = exp_map(region.reference_basis, tangent)
    basis = dataclasses.replace(basis, origin=region.subdomain.index)
    return basis, ops


def _hyper_for(region: RegionModel, use_hyper: bool):
    if not use_hyper:
        return None
    if region.hyper is None:
        raise MissingArtifactError(
            f"subdomain {region.subdomain.index} has no hyper mesh; rerun the "
            f"offline stage with ECSW enabled"
        )
    return region.hyper


def query_coefficients(region: RegionModel, q, model: StructuralModel,
                       use_hyper: bool = False) -> ReducedSystem:
    """Reduced system at q via coefficient-matrix interpolation."""
    basis, ops = interpolate_basis(region, q, Variant.COEFFICIENTS)
    system = reduce_model(model, basis, hyper=_hyper_for(region, use_hyper))
    system.interp_op_count = ops
    return system


def query_entries(region: RegionModel, q, model: StructuralModel,
                  use_hyper: bool = False) -> ReducedSystem:
    """Reduced system at q via direct tangent-entry interpolation."""
    basis, ops = interpolate_basis(region, q, Variant.ENTRIES)
    system = reduce_model(model, basis, hyper=_hyper_for(region, use_hyper))
    system.interp_op_count = ops
    return system


def query_local(region: RegionModel, q, model: StructuralModel,
                use_hyper: bool = False) -> ReducedSystem:
    """Reduced system from the subdomain's pooled snapshot basis (no interpolation)."""
    if not region.subdomain.contains(q):
        from .errors import OutOfDomainError

        raise OutOfDomainError(
            f"point {np.asarray(q, dtype=float).tolist()} lies outside subdomain "
            f"{region.subdomain.index}"
        )
    return reduce_model(model, region.pooled, hyper=_hyper_for(region, use_hyper))


def query(region: RegionModel, q, model: StructuralModel, variant: str | Variant,
          use_hyper: bool = False) -> ReducedSystem:
    """Dispatch a query to the requested region variant."""
    variant = Variant(variant)
    if variant is Variant.COEFFICIENTS:
        return query_coefficients(region, q, model, use_hyper)
    if variant is Variant.ENTRIES:
        return query_entries(region, q, model, use_hyper)
    if variant is Variant.LOCAL:
        return query_local(region, q, model, use_hyper)
    raise ValueError("the global variant is served by GlobalModel, not a region")
