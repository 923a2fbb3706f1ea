"""Logarithmic and exponential maps between subspaces.

A basis V_i is carried to the tangent space at a reference basis V_0 via

    L = (V_i - V_0 V_0^T V_i) (V_0^T V_i)^(-1),   L = P S Q^T (thin SVD),
    Gamma = P atan(S) Q^T

and mapped back with

    Gamma = P S Q^T,   V = V_0 Q cos(S) Q^T + P sin(S) Q^T

followed by a thin QR to scrub roundoff. The tangent matrix is horizontal
(V_0^T Gamma = 0), atan/cos/sin act on the singular values only, and the two
maps invert each other on subspaces, i.e. up to an orthonormal change of
basis within the span.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BasisMismatchError, GrassmannConditionError
from .pod import BasisProvenance, ReductionBasis

_COND_LIMIT = 1e8


@dataclass(frozen=True)
class TangentVector:
    """Horizontal tangent matrix anchored at a specific reference basis."""

    matrix: np.ndarray
    reference_id: str

    def __post_init__(self):
        matrix = np.ascontiguousarray(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValueError("tangent matrix must be 2-D")
        object.__setattr__(self, "matrix", matrix)

    @property
    def shape(self) -> tuple:
        return self.matrix.shape


def log_map(v0: ReductionBasis, vi: ReductionBasis) -> TangentVector:
    """Tangent image of span(vi) at the reference span(v0).

    Raises GrassmannConditionError when cond(V_0^T V_i) exceeds 1e8, i.e. the
    subspaces are nearly orthogonal somewhere and the map is unreliable; the
    cure is a finer partition, not a larger tolerance.
    """
    if v0.matrix.shape != vi.matrix.shape:
        raise ValueError(
            f"basis shapes differ: {v0.matrix.shape} vs {vi.matrix.shape}"
        )
    m0 = v0.matrix.T @ vi.matrix
    cond = np.linalg.cond(m0)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise GrassmannConditionError(
            f"subspaces too far apart for the tangent map "
            f"(cond(V0^T Vi) = {cond:.3e} > {_COND_LIMIT:.0e}; "
            f"reference origin {v0.origin}, target origin {vi.origin}); "
            f"repartition the parameter domain"
        )
    residual = vi.matrix - v0.matrix @ m0
    L = np.linalg.solve(m0.T, residual.T).T
    P, s, Qt = np.linalg.svd(L, full_matrices=False)
    gamma = (P * np.arctan(s)) @ Qt
    return TangentVector(matrix=gamma, reference_id=v0.fingerprint)


def exp_map(v0: ReductionBasis, tangent: TangentVector) -> ReductionBasis:
    """Map a tangent matrix at span(v0) back to an orthonormal basis."""
    if tangent.reference_id != v0.fingerprint:
        raise BasisMismatchError(
            "tangent vector was taken at a different reference basis"
        )
    if tangent.matrix.shape != v0.matrix.shape:
        raise ValueError(
            f"tangent shape {tangent.matrix.shape} does not match the "
            f"reference basis shape {v0.matrix.shape}"
        )
    P, s, Qt = np.linalg.svd(tangent.matrix, full_matrices=False)
    V = v0.matrix @ (Qt.T * np.cos(s)) @ Qt + (P * np.sin(s)) @ Qt
    Q, R = np.linalg.qr(V)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return ReductionBasis(
        matrix=Q * signs,
        singular_values=s,
        provenance=BasisProvenance.INTERPOLATED,
        origin=v0.origin,
    )


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans of two orthonormal matrices."""
    s = np.linalg.svd(a.T @ b, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))
