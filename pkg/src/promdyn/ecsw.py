"""Energy-conserving sampling and weighting (ECSW) hyper-reduction.

Training stacks the projected per-element force contributions of the
subdomain's snapshots into a matrix G (one block of r rows per sampled time
step, one column per element) with target b = G*1, the full-mesh projected
force. A sparse non-negative least-squares solve then picks few elements
whose weighted contributions reproduce that virtual work within a relative
tolerance tau:

    find sparse xi >= 0 with ||G xi - b|| <= tau ||b||.

The solver is the Lawson-Hanson active-set iteration stopped early at the
tau residual: repeatedly add the element with the largest positive gradient
of the squared residual, re-solve the unconstrained least squares on the
active set, and step back along the line segment dropping elements whose
weights would turn non-positive.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BasisMismatchError
from .model import StructuralModel
from .pod import ReductionBasis


@dataclass
class EcswTraining:
    """Projected element-force training data for one basis."""

    G: np.ndarray  # (n_samples * r, n_elements)
    b: np.ndarray
    tau: float
    basis_fingerprint: str
    subdomain_index: int | None = None
    n_samples: int = 0

    def __post_init__(self):
        self.G = np.asarray(self.G, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.G.ndim != 2 or self.b.shape != (self.G.shape[0],):
            raise ValueError("G must be 2-D with b matching its row count")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")


@dataclass
class HyperMesh:
    """Selected elements with their positive ECSW weights."""

    elements: np.ndarray
    weights: np.ndarray
    tau: float
    residual: float
    target_norm: float
    converged: bool
    basis_fingerprint: str
    subdomain_index: int | None = None

    def __post_init__(self):
        self.elements = np.asarray(self.elements, dtype=int)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.elements.shape != self.weights.shape:
            raise ValueError("need one weight per selected element")
        if np.any(self.weights <= 0.0):
            raise ValueError("hyper mesh weights must be strictly positive")

    @property
    def size(self) -> int:
        return len(self.elements)

    def to_dict(self) -> dict:
        return {
            "elements": self.elements.tolist(),
            "weights": self.weights.tolist(),
            "tau": self.tau,
            "residual": self.residual,
            "target_norm": self.target_norm,
            "converged": self.converged,
            "basis_fingerprint": self.basis_fingerprint,
            "subdomain_index": self.subdomain_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HyperMesh":
        return cls(
            elements=np.asarray(d["elements"], dtype=int),
            weights=np.asarray(d["weights"], dtype=float),
            tau=float(d["tau"]),
            residual=float(d["residual"]),
            target_norm=float(d["target_norm"]),
            converged=bool(d["converged"]),
            basis_fingerprint=d["basis_fingerprint"],
            subdomain_index=d.get("subdomain_index"),
        )


def element_projection_rows(model: StructuralModel, basis: ReductionBasis) -> np.ndarray:
    """Row e is the basis restricted to link e's DOF pair, V_i - V_j."""
    if basis.ndof != model.ndof:
        raise ValueError(f"basis has {basis.ndof} DOFs, model has {model.ndof}")
    idx_i, idx_j = model.link_pairs()
    rows = basis.matrix[idx_i].copy()
    inter = idx_j >= 0
    rows[inter] -= basis.matrix[idx_j[inter]]
    return rows


def assemble_training(model: StructuralModel, snapshots, basis: ReductionBasis,
                      sample_stride: int = 5, tau: float = 0.01,
                      subdomain_index: int | None = None) -> EcswTraining:
    """Stack projected element forces of the training snapshots into (G, b).

    Every ``sample_stride``-th time step after the initial one contributes a
    block of r rows; column e of a block is the element's recorded force
    projected through the basis. b is the row sum of G, exactly the full-mesh
    projected force at the sampled states.
    """
    if sample_stride < 1:
        raise ValueError("sample_stride must be >= 1")
    rows = element_projection_rows(model, basis)  # (n_links, r)
    blocks = []
    n_samples = 0
    for snap in snapshots:
        if snap.element_forces is None:
            raise ValueError(
                "snapshot carries no element-force records; rerun the training "
                "simulation with force recording enabled"
            )
        if snap.element_forces.shape[0] != model.n_links:
            raise ValueError("element-force records do not match the model's links")
        for t in range(sample_stride, snap.steps, sample_stride):
            f = snap.element_forces[:, t]
            blocks.append(rows.T * f)  # (r, n_links)
            n_samples += 1
    if not blocks:
        raise ValueError("no training samples; stride too large for the snapshots")
    G = np.vstack(blocks)
    return EcswTraining(
        G=G,
        b=G.sum(axis=1),
        tau=tau,
        basis_fingerprint=basis.fingerprint,
        subdomain_index=subdomain_index,
        n_samples=n_samples,
    )


def solve_sparse_nnls(training: EcswTraining, tau: float | None = None,
                      max_outer: int | None = None) -> HyperMesh:
    """Greedy sparse NNLS with the early tau stopping rule.

    Returns a mesh with ``converged=False`` (best weights found, achieved
    residual recorded) when the gradient stalls before the tolerance is met;
    the caller decides whether that is acceptable.
    """
    if tau is None:
        tau = training.tau
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must lie in (0, 1]")
    G, b = training.G, training.b
    n_el = G.shape[1]
    if max_outer is None:
        max_outer = 3 * n_el

    b_norm = float(np.linalg.norm(b))
    target = tau * b_norm
    x = np.zeros(n_el)
    active = np.zeros(n_el, dtype=bool)
    residual = b.copy()
    res_norm = b_norm
    grad_floor = 1e-12 * max(float(np.abs(G.T @ b).max()), 1.0)

    converged = res_norm <= target
    outer = 0
    while not converged and outer < max_outer:
        outer += 1
        grad = G.T @ residual
        grad[active] = -np.inf
        pick = int(np.argmax(grad))
        if grad[pick] <= grad_floor:
            break  # stagnation: nothing left that reduces the residual
        active[pick] = True

        # Inner loop: least squares on the active set, stepping back along
        # the segment to keep every active weight positive.
        while True:
            idx = np.flatnonzero(active)
            z, *_ = np.linalg.lstsq(G[:, idx], b, rcond=None)
            if np.all(z > 0.0):
                x = np.zeros(n_el)
                x[idx] = z
                break
            x_act = x[idx]
            mask = z <= 0.0
            alpha = np.min(x_act[mask] / (x_act[mask] - z[mask]))
            x_act = x_act + alpha * (z - x_act)
            x = np.zeros(n_el)
            x[idx] = np.where(x_act > 1e-14, x_act, 0.0)
            active = x > 0.0
            if not active.any():
                break
        residual = b - G @ x
        res_norm = float(np.linalg.norm(residual))
        converged = res_norm <= target

    idx = np.flatnonzero(x > 0.0)
    return HyperMesh(
        elements=idx,
        weights=x[idx],
        tau=tau,
        residual=res_norm,
        target_norm=b_norm,
        converged=bool(converged),
        basis_fingerprint=training.basis_fingerprint,
        subdomain_index=training.subdomain_index,
    )


def hyper_force(mesh: HyperMesh, basis: ReductionBasis, model: StructuralModel,
                u_r, z=None) -> np.ndarray:
    """Reduced hysteretic force as the weighted sum over the mesh elements.

    The basis must be the one the mesh was trained with (fingerprint check);
    element forces come from the committed link states unless ``z`` overrides
    them. States of unselected elements are never touched.
    """
    if mesh.basis_fingerprint != basis.fingerprint:
        raise BasisMismatchError(
            "hyper mesh was trained with a different basis (fingerprint mismatch)"
        )
    u_r = np.asarray(u_r, dtype=float)
    if u_r.shape != (basis.order,):
        raise ValueError(f"u_r has shape {u_r.shape}, expected ({basis.order},)")
    rows = element_projection_rows(model, basis)[mesh.elements]
    if z is None:
        z = model.link_states()
    f = model.link_params()["stiffness"][mesh.elements] * \
        model.link_params()["amplitude"][mesh.elements] * np.asarray(z, dtype=float)[mesh.elements]
    return rows.T @ (mesh.weights * f)
