import numpy as np
import pytest

from promdyn.errors import BasisMismatchError, GrassmannConditionError
from promdyn.grassmann import TangentVector, exp_map, log_map, principal_angles
from promdyn.pod import BasisProvenance, ReductionBasis


def basis_from(matrix, origin=None):
    matrix = np.asarray(matrix, dtype=float)
    r = matrix.shape[1]
    return ReductionBasis(matrix=matrix, singular_values=np.ones(r),
                          provenance=BasisProvenance.LOCAL_SNAPSHOT, origin=origin)


def random_basis(n, r, seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return basis_from(q)


def nearby_basis(v0, scale, seed):
    rng = np.random.default_rng(seed)
    n, r = v0.matrix.shape
    perturbed = v0.matrix + scale * rng.standard_normal((n, r))
    q, _ = np.linalg.qr(perturbed)
    return basis_from(q)


def span_defect(a, b):
    """Spectral norm of the component of a outside span(b)."""
    return float(np.linalg.norm(a - b @ (b.T @ a), 2))


class TestLogMap:
    def test_same_subspace_gives_zero(self):
        v0 = random_basis(12, 3, 0)
        t = log_map(v0, v0)
        assert np.linalg.norm(t.matrix) < 1e-12
        assert t.matrix.shape == (12, 3)
        assert t.reference_id == v0.fingerprint

    def test_rotated_copy_gives_zero(self):
        # same span, different orthonormal frame: still the zero tangent
        v0 = random_basis(12, 3, 1)
        rng = np.random.default_rng(2)
        rot, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        vi = basis_from(v0.matrix @ rot)
        t = log_map(v0, vi)
        assert np.linalg.norm(t.matrix) < 1e-10

    def test_tangent_horizontal(self):
        # the tangent lives in the horizontal space: V0^T Gamma = 0
        v0 = random_basis(20, 4, 3)
        vi = nearby_basis(v0, 0.1, 4)
        t = log_map(v0, vi)
        assert np.linalg.norm(v0.matrix.T @ t.matrix) < 1e-10

    def test_near_orthogonal_subspace_rejected(self):
        # overlap matrix V0^T Vi close to singular: the inverse blows up and
        # the map must refuse rather than return garbage
        n = 10
        eye = np.eye(n)
        v0 = basis_from(eye[:, :3])
        delta = 1e-10
        cols = np.stack([
            eye[:, 0],
            (eye[:, 4] + delta * eye[:, 1]) / np.hypot(1, delta),
            (eye[:, 5] + delta * eye[:, 2]) / np.hypot(1, delta),
        ], axis=1)
        vi = basis_from(cols)
        with pytest.raises(GrassmannConditionError):
            log_map(v0, vi)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            log_map(random_basis(10, 3, 5), random_basis(10, 4, 6))


class TestExpMap:
    def test_zero_tangent_returns_reference(self):
        v0 = random_basis(15, 4, 7)
        t = TangentVector(matrix=np.zeros((15, 4)), reference_id=v0.fingerprint)
        v = exp_map(v0, t)
        assert span_defect(v.matrix, v0.matrix) < 1e-12
        assert v.provenance is BasisProvenance.INTERPOLATED

    def test_output_orthonormal(self):
        v0 = random_basis(25, 5, 8)
        vi = nearby_basis(v0, 0.3, 9)
        v = exp_map(v0, log_map(v0, vi))
        gram = v.matrix.T @ v.matrix
        assert np.linalg.norm(gram - np.eye(5)) < 1e-10

    def test_reference_mismatch_rejected(self):
        v0 = random_basis(15, 3, 10)
        other = random_basis(15, 3, 11)
        t = log_map(other, nearby_basis(other, 0.1, 12))
        with pytest.raises(BasisMismatchError):
            exp_map(v0, t)

    def test_round_trip_many_random_pairs(self):
        # exp(log(.)) must land back on the source subspace; measured with
        # the sine-based span defect, immune to the arccos noise floor
        worst = 0.0
        for seed in range(100):
            v0 = random_basis(18, 4, 1000 + seed)
            vi = nearby_basis(v0, 0.05 + 0.3 * (seed % 7) / 6.0, 2000 + seed)
            back = exp_map(v0, log_map(v0, vi))
            worst = max(worst, span_defect(back.matrix, vi.matrix))
        assert worst < 1e-9

    def test_geodesic_angles_grow_monotonically(self):
        v0 = random_basis(30, 3, 13)
        vi = nearby_basis(v0, 0.5, 14)
        g = log_map(v0, vi)
        prev = -1.0
        for t in (0.1, 0.25, 0.5, 0.75, 1.0):
            scaled = TangentVector(matrix=t * g.matrix, reference_id=g.reference_id)
            v = exp_map(v0, scaled)
            worst_angle = principal_angles(v0.matrix, v.matrix).max()
            assert worst_angle > prev
            prev = worst_angle

    def test_interpolated_origin_carried(self):
        v0 = random_basis(12, 3, 15)
        v0 = basis_from(v0.matrix, origin=4)
        vi = nearby_basis(v0, 0.1, 16)
        v = exp_map(v0, log_map(v0, vi))
        assert v.origin == 4


class TestPrincipalAngles:
    def test_identical_spans_zero(self):
        q = random_basis(10, 3, 17).matrix
        angles = principal_angles(q, q)
        assert np.all(angles < 1e-6)  # arccos noise floor, not exactly zero

    def test_orthogonal_spans_right_angle(self):
        eye = np.eye(8)
        angles = principal_angles(eye[:, :2], eye[:, 4:6])
        assert np.allclose(angles, np.pi / 2)

    def test_known_rotation_angle(self):
        # rotate a 1-D span by a known angle inside a 2-D plane
        theta = 0.3
        a = np.array([[1.0], [0.0], [0.0]])
        b = np.array([[np.cos(theta)], [np.sin(theta)], [0.0]])
        assert principal_angles(a, b)[0] == pytest.approx(theta, abs=1e-12)
