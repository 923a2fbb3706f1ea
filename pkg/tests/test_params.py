import itertools

import numpy as np
import pytest

from promdyn.errors import ConfigError, OutOfDomainError
from promdyn.params import (
    ParameterAxis,
    interpolation_weights,
    locate,
    partition_grid,
)

# The two-axis domain used throughout: amplitude factor x stiffness-like scale,
# deliberately spanning incommensurate magnitudes so normalization matters.
DOMAIN = [(0.1, 1.0), (1.0e4, 5.0e4)]


def test_axis_rejects_degenerate_range():
    with pytest.raises(ConfigError):
        ParameterAxis("a", 1.0, 1.0)
    with pytest.raises(ConfigError):
        ParameterAxis("a", 2.0, 1.0)


def test_single_division_identity_partition():
    grid = partition_grid([(0.0, 1.0), (0.0, 1.0)], divisions=(1, 1))
    assert len(grid.subdomains) == 1
    sub = grid.subdomains[0]
    assert np.allclose(sub.centroid, [0.5, 0.5])
    assert sub.training_points.shape == (5, 2)
    assert not sub.overlapping


def test_coarse_extent_partition_counts():
    # 0.4 x 1.6e4 tiles on the domain: 2x2 base tiles plus the end-aligned
    # covering tiles for the remainders on both axes.
    grid = partition_grid(DOMAIN, extents=(0.4, 1.6e4))
    base = [s for s in grid.subdomains if not s.overlapping]
    shifted = [s for s in grid.subdomains if s.overlapping]
    assert len(base) == 4
    assert len(shifted) == 5
    # base tiles precede shifted ones and indices are contiguous
    assert [s.index for s in grid.subdomains] == list(range(9))


def test_fine_extent_partition_counts():
    # 0.2 x 0.8e4 tiles: axis 1 gives 4 base tiles plus a remainder, axis 2
    # tiles exactly 5 times -> 20 base + 5 end-aligned
    grid = partition_grid(DOMAIN, extents=(0.2, 0.8e4))
    base = [s for s in grid.subdomains if not s.overlapping]
    shifted = [s for s in grid.subdomains if s.overlapping]
    assert len(base) == 20
    assert len(shifted) == 5
    assert len(grid.subdomains) == 25


def test_partition_covers_domain():
    grid = partition_grid(DOMAIN, extents=(0.4, 1.6e4))
    rng = np.random.default_rng(7)
    lo = np.array([0.1, 1.0e4])
    hi = np.array([1.0, 5.0e4])
    for _ in range(500):
        q = lo + rng.random(2) * (hi - lo)
        assert grid.contains(q)
    # corners included
    for corner in itertools.product(*zip(lo, hi)):
        assert grid.contains(np.array(corner))


def test_exact_tiling_has_no_shifted_tiles():
    # extents dividing the spans exactly must not spawn end-aligned tiles
    grid = partition_grid([(0.0, 1.0), (0.0, 4.0)], extents=(0.25, 1.0))
    assert all(not s.overlapping for s in grid.subdomains)
    assert len(grid.subdomains) == 16


def test_overlap_none_rejects_remainder():
    with pytest.raises(ConfigError):
        partition_grid(DOMAIN, extents=(0.4, 1.6e4), overlap="none")
    # but accepts exact tilings
    grid = partition_grid([(0.0, 1.0)], extents=(0.5,), overlap="none")
    assert len(grid.subdomains) == 2


def test_training_points_are_corners_plus_centroid():
    grid = partition_grid([(0.0, 2.0), (0.0, 4.0)], divisions=(1, 1))
    sub = grid.subdomains[0]
    pts = {tuple(p) for p in sub.training_points}
    assert pts == {(0, 0), (0, 4), (2, 0), (2, 4), (1, 2)}
    assert tuple(sub.centroid) == (1.0, 2.0)
    assert sub.reference_index == len(sub.training_points) - 1


def test_training_point_dedup_across_subdomains():
    # 1-D, 2 divisions: each subdomain contributes 2 corners + centroid, the
    # shared corner 0.5 is counted once -> 5 unique points
    grid = partition_grid([(0.0, 1.0)], divisions=(2,))
    assert len(grid.subdomains) == 2
    pts = grid.training_points()
    assert pts.shape == (5, 1)
    assert set(np.round(pts[:, 0], 12)) == {0.0, 0.25, 0.5, 0.75, 1.0}


def test_locate_centroid_maps_to_own_subdomain():
    grid = partition_grid(DOMAIN, extents=(0.4, 1.6e4))
    for sub in grid.subdomains:
        assert locate(grid, sub.centroid).index == sub.index


def test_locate_outside_domain_raises():
    grid = partition_grid(DOMAIN, extents=(0.4, 1.6e4))
    with pytest.raises(OutOfDomainError):
        locate(grid, (0.05, 2.0e4))
    with pytest.raises(OutOfDomainError):
        locate(grid, (0.5, 6.0e4))


def test_locate_shared_edge_prefers_lower_index():
    grid = partition_grid([(0.0, 1.0), (0.0, 1.0)], divisions=(2, 1))
    # the shared edge x=0.5 is equidistant from both centroids
    sub = locate(grid, (0.5, 0.3))
    assert sub.index == min(s.index for s in grid.subdomains if s.contains((0.5, 0.3)))


def test_locate_overlap_resolved_by_nearest_centroid():
    grid = partition_grid([(0.0, 1.0)], extents=(0.6,))
    # tiles: [0, 0.6] base and [0.4, 1.0] shifted; 0.55 is inside both but
    # closer to the shifted tile's centroid 0.7 than to 0.3
    assert locate(grid, (0.55,)).overlapping
    assert not locate(grid, (0.45,)).overlapping


def test_locate_containment_grid_example():
    # box [0.25, 1.75] x [16, 36] with unit-free normalized distances; the
    # query (0.62, 31) must land in this box when it is the only candidate
    grid = partition_grid([(0.25, 1.75), (16.0, 36.0)], divisions=(1, 1))
    sub = locate(grid, (0.62, 31.0))
    assert sub.contains((0.62, 31.0))
    assert sub.index == 0


def test_weights_one_hot_at_training_points():
    grid = partition_grid(DOMAIN, extents=(0.4, 1.6e4))
    sub = grid.subdomains[0]
    for k, p in enumerate(sub.training_points):
        w = interpolation_weights(sub, p)
        expected = np.zeros(len(sub.training_points))
        expected[k] = 1.0
        assert np.array_equal(w, expected)


def test_weights_shepard_formula_oracle():
    grid = partition_grid([(0.0, 1.0), (0.0, 1.0)], divisions=(1, 1))
    sub = grid.subdomains[0]
    rng = np.random.default_rng(11)
    for _ in range(50):
        q = rng.random(2)
        w = interpolation_weights(sub, q)
        # independent evaluation of d^-2 / sum d^-2 in normalized coordinates
        d = np.linalg.norm(sub.training_points - q, axis=1)
        if np.any(d < 1e-12):
            continue
        ref = d**-2.0 / np.sum(d**-2.0)
        assert np.allclose(w, ref, atol=1e-13)


def test_weights_partition_of_unity():
    grid = partition_grid(DOMAIN, extents=(0.4, 1.6e4))
    rng = np.random.default_rng(5)
    for _ in range(1000):
        sub = grid.subdomains[rng.integers(len(grid.subdomains))]
        q = sub.lower + rng.random(2) * (sub.upper - sub.lower)
        w = interpolation_weights(sub, q)
        assert np.all(w >= 0.0)
        assert abs(w.sum() - 1.0) < 1e-12


def test_weights_symmetry_between_equidistant_corners():
    grid = partition_grid([(0.0, 1.0), (0.0, 1.0)], divisions=(1, 1))
    sub = grid.subdomains[0]
    # on the vertical midline every left corner pairs with a right corner
    w = interpolation_weights(sub, (0.5, 0.2))
    pts = [tuple(p) for p in sub.training_points]
    assert w[pts.index((0.0, 0.0))] == pytest.approx(w[pts.index((1.0, 0.0))], rel=1e-12)
    assert w[pts.index((0.0, 1.0))] == pytest.approx(w[pts.index((1.0, 1.0))], rel=1e-12)


def test_weights_continuity_under_small_moves():
    grid = partition_grid(DOMAIN, extents=(0.4, 1.6e4))
    sub = grid.subdomains[2]
    rng = np.random.default_rng(13)
    span = sub.upper - sub.lower
    for _ in range(20):
        q = sub.lower + (0.2 + 0.6 * rng.random(2)) * span
        # stay away from training points so weights are smooth
        if min(np.linalg.norm(sub.normalize(q) - sub.normalize(p)) for p in sub.training_points) < 0.05:
            continue
        w0 = interpolation_weights(sub, q)
        delta = 1e-8 * span
        w1 = interpolation_weights(sub, q + delta)
        assert np.max(np.abs(w1 - w0)) < 1e-6


def test_weights_outside_subdomain_rejected():
    grid = partition_grid([(0.0, 1.0)], divisions=(2,))
    with pytest.raises(OutOfDomainError):
        interpolation_weights(grid.subdomains[0], (0.9,))


def test_locate_deterministic():
    grid = partition_grid(DOMAIN, extents=(0.4, 1.6e4))
    rng = np.random.default_rng(3)
    lo = np.array([0.1, 1.0e4])
    hi = np.array([1.0, 5.0e4])
    pts = lo + rng.random((100, 2)) * (hi - lo)
    first = [locate(grid, q).index for q in pts]
    second = [locate(grid, q).index for q in pts]
    assert first == second
