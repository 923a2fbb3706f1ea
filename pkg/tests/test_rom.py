import numpy as np
import pytest

from promdyn.errors import BasisMismatchError, MissingArtifactError, OutOfDomainError
from promdyn.newmark import IntegratorConfig, integrate, integrate_reduced
from promdyn.params import partition_grid
from promdyn.pod import BasisProvenance, ReductionBasis, SnapshotSet, local_basis
from promdyn.rom import (
    Variant,
    build_global,
    build_region,
    interpolate_basis,
    query,
    query_coefficients,
    query_entries,
    query_local,
    reduce_model,
)
from tests.conftest import make_chain, simulate_snapshot, top_sine_loads


def identity_basis(n):
    return ReductionBasis(matrix=np.eye(n), singular_values=np.ones(n),
                          provenance=BasisProvenance.LOCAL_SNAPSHOT)


def region_for(stories=3, r_local=2, amplitudes=(0.6, 1.4), steps=160, r_global=None):
    """One-axis region: training chains vary the link amplitude."""
    domain = [(min(amplitudes), max(amplitudes))]
    grid = partition_grid(domain, divisions=(1,))
    sub = grid.subdomains[0]
    snaps = []
    models = {}
    for pt in sub.training_points:
        model = make_chain(stories=stories, amplitude=float(pt[0]))
        loads = top_sine_loads(stories, steps=steps)
        s, _ = simulate_snapshot(model, loads, point=tuple(pt))
        snaps.append(s)
        models[float(pt[0])] = model
    region = build_region(sub, snaps, r_local, r_global=r_global)
    return region, models, sub


class TestReducedSystem:
    def test_projected_operators(self, chain4):
        basis = identity_basis(4)
        sys4 = reduce_model(chain4, basis)
        assert np.allclose(sys4.mass, chain4.mass)
        assert np.allclose(sys4.damping, chain4.damping)
        assert sys4.ndof == 4
        assert sys4.total_elements == 4
        assert not sys4.is_hyper

    def test_reduced_mass_spd(self, chain4):
        loads = top_sine_loads(4, steps=120)
        snaps, _ = simulate_snapshot(chain4, loads)
        basis = local_basis(snaps, 2)
        rsys = reduce_model(chain4, basis)
        eigvals = np.linalg.eigvalsh(rsys.mass)
        assert np.all(eigvals > 0.0)
        assert np.allclose(rsys.mass, rsys.mass.T)

    def test_identity_basis_matches_full_model(self, chain4):
        # r = n with the identity basis is the full model in disguise
        loads = top_sine_loads(4, steps=100)
        cfg = IntegratorConfig(dt=loads.dt)
        hist_full = integrate(chain4, loads, cfg)
        rsys = reduce_model(chain4, identity_basis(4))
        hist_red = integrate_reduced(rsys, loads, cfg)
        assert np.allclose(hist_red.displacements, hist_full.displacements,
                           rtol=0.0, atol=1e-12)

    def test_untruncated_pod_basis_reproduces_hfm(self, chain4):
        loads = top_sine_loads(4, steps=150)
        cfg = IntegratorConfig(dt=loads.dt)
        snaps, hist_full = simulate_snapshot(chain4, loads)
        basis = local_basis(snaps, 4)  # full rank: no information lost
        rsys = reduce_model(chain4, basis)
        hist_red = integrate_reduced(rsys, loads, cfg)
        recon = rsys.reconstruct(hist_red.displacements)
        err = np.linalg.norm(recon - hist_full.displacements) \
            / np.linalg.norm(hist_full.displacements)
        assert err < 1e-6

    def test_map_loads_projects(self, chain4):
        loads = top_sine_loads(4, steps=50)
        basis = local_basis(simulate_snapshot(chain4, loads)[0], 2)
        rsys = reduce_model(chain4, basis)
        red = rsys.map_loads(loads)
        assert red.samples.shape == (50, 2)
        assert np.allclose(red.samples, loads.samples @ basis.matrix)

    def test_reconstruct_shape(self, chain4):
        loads = top_sine_loads(4, steps=50)
        basis = local_basis(simulate_snapshot(chain4, loads)[0], 2)
        rsys = reduce_model(chain4, basis)
        full = rsys.reconstruct(np.zeros((7, 2)))
        assert full.shape == (7, 4)

    def test_element_eval_counter(self, chain4):
        loads = top_sine_loads(4, steps=30)
        basis = local_basis(simulate_snapshot(chain4, loads)[0], 2)
        rsys = reduce_model(chain4, basis)
        before = rsys.element_eval_count
        rsys.force(np.zeros(2), np.zeros(2), 0.01)
        assert rsys.element_eval_count == before + 4  # every link advanced


class TestGlobalModel:
    def test_build_and_query(self, chain4):
        loads = top_sine_loads(4, steps=120)
        s1, _ = simulate_snapshot(chain4, loads, point=(0.0,))
        s2, _ = simulate_snapshot(make_chain(amplitude=1.3), loads, point=(1.0,))
        gm = build_global([s1, s2], 3)
        assert gm.basis.order == 3
        assert gm.basis.provenance is BasisProvenance.GLOBAL_DOMAIN
        rsys = gm.system_for(chain4)
        assert rsys.ndof == 3
        assert rsys.interp_op_count == 0  # no interpolation in the global route


class TestBuildRegion:
    def test_region_layout(self):
        region, _, sub = region_for()
        n_train = len(sub.training_points)
        assert len(region.tangent_locals) == n_train
        assert len(region.coeff_matrices) == n_train
        assert region.order == 2
        # the subdomain index rides on the artifacts that answer queries
        assert region.region_basis.origin == sub.index
        assert region.pooled.origin == sub.index
        # reference tangent is the zero map
        ref_idx = sub.reference_index
        assert np.linalg.norm(region.tangent_locals[ref_idx].matrix) < 1e-10

    def test_coefficients_reproduce_tangents(self):
        # untruncated region basis: Gamma_i = B Xi_i exactly
        region, _, _ = region_for()
        B = region.region_basis.matrix
        scale = max(np.linalg.norm(t.matrix) for t in region.tangent_locals)
        for t, xi in zip(region.tangent_locals, region.coeff_matrices):
            assert np.linalg.norm(t.matrix - B @ xi) <= 1e-9 * scale

    def test_snapshot_coordinate_matching(self):
        # snapshots shuffled relative to training_points still line up
        region_a, _, sub = region_for()
        snaps = []
        for pt in reversed(sub.training_points):
            model = make_chain(stories=3, amplitude=float(pt[0]))
            loads = top_sine_loads(3, steps=160)
            s, _ = simulate_snapshot(model, loads, point=tuple(pt))
            snaps.append(s)
        region_b = build_region(sub, snaps, 2)
        for ta, tb in zip(region_a.tangent_locals, region_b.tangent_locals):
            assert np.allclose(ta.matrix, tb.matrix, atol=1e-12)

    def test_missing_snapshot_rejected(self):
        _, _, sub = region_for()
        model = make_chain(stories=3)
        loads = top_sine_loads(3, steps=100)
        s, _ = simulate_snapshot(model, loads, point=tuple(sub.training_points[0]))
        with pytest.raises(ValueError):
            build_region(sub, [s], 2)


class TestQueries:
    def test_entries_equals_coefficients_untruncated(self):
        region, models, sub = region_for()
        q = (0.5 * (sub.lower[0] + sub.upper[0]) + 0.1,)
        b_coeff, _ = interpolate_basis(region, q, Variant.COEFFICIENTS)
        b_entry, _ = interpolate_basis(region, q, Variant.ENTRIES)
        # same subspace: columns may differ only by roundoff
        defect = np.linalg.norm(
            b_coeff.matrix - b_entry.matrix @ (b_entry.matrix.T @ b_coeff.matrix), 2)
        assert defect < 1e-9

    def test_training_point_recovery(self):
        # querying exactly at a training point must return that point's own
        # subspace (weights collapse to one-hot)
        region, _, sub = region_for()
        for idx in (0, 1):
            pt = tuple(sub.training_points[idx])
            got, _ = interpolate_basis(region, pt, Variant.COEFFICIENTS)
            model = make_chain(stories=3, amplitude=pt[0])
            loads = top_sine_loads(3, steps=160)
            snaps, _ = simulate_snapshot(model, loads, point=pt)
            want = local_basis(snaps, 2)
            defect = np.linalg.norm(
                want.matrix - got.matrix @ (got.matrix.T @ want.matrix), 2)
            assert defect < 1e-8

    def test_interp_op_counts_scale_differently(self):
        # coefficient matrices stay small (bounded by n_train * r columns)
        # once n outgrows them; entry interpolation keeps scaling with n
        ops = {}
        for stories in (12, 24):
            region, _, sub = region_for(stories=stories)
            q = (1.0,)
            _, ops_c = interpolate_basis(region, q, Variant.COEFFICIENTS)
            _, ops_e = interpolate_basis(region, q, Variant.ENTRIES)
            ops[stories] = (ops_c, ops_e)
        bound = 3 * 2 * 2  # n_train * r columns, r rows
        assert ops[12][0] <= bound and ops[24][0] <= bound
        assert ops[24][1] == 2 * ops[12][1]
        assert ops[24][1] > 2 * ops[24][0]

    def test_query_dispatch(self):
        region, models, sub = region_for()
        model = make_chain(stories=3, amplitude=1.0)
        q = (1.0,)
        for variant in ("coefficients", "entries", "local"):
            rsys = query(region, q, model, variant)
            assert rsys.ndof == region.order
        with pytest.raises(ValueError):
            query(region, q, model, "global")
        with pytest.raises(ValueError):
            query(region, q, model, "nonsense")

    def test_interpolated_basis_carries_origin(self):
        region, _, sub = region_for()
        basis, _ = interpolate_basis(region, (1.0,), Variant.COEFFICIENTS)
        assert basis.origin == sub.index
        assert basis.provenance is BasisProvenance.INTERPOLATED

    def test_local_query_outside_rejected(self):
        region, _, sub = region_for(amplitudes=(0.6, 1.4))
        model = make_chain(stories=3)
        with pytest.raises(OutOfDomainError):
            query_local(region, (1.5,), model)

    def test_interpolation_outside_rejected(self):
        region, _, _ = region_for(amplitudes=(0.6, 1.4))
        with pytest.raises(OutOfDomainError):
            interpolate_basis(region, (0.2,), Variant.COEFFICIENTS)

    def test_hyper_requested_but_missing(self):
        region, _, _ = region_for()
        model = make_chain(stories=3)
        with pytest.raises(MissingArtifactError):
            query_coefficients(region, (1.0,), model, use_hyper=True)

    def test_single_subdomain_local_matches_pooled_build(self):
        # with one subdomain the local variant is plain pooled POD on the
        # region's own snapshots: cross-check against a direct construction
        region, _, sub = region_for()
        snaps = []
        for pt in sub.training_points:
            model = make_chain(stories=3, amplitude=float(pt[0]))
            loads = top_sine_loads(3, steps=160)
            s, _ = simulate_snapshot(model, loads, point=tuple(pt))
            snaps.append(s)
        direct = build_global(snaps, region.pooled.order)
        assert np.allclose(np.abs(direct.basis.matrix.T @ region.pooled.matrix),
                           np.eye(region.pooled.order), atol=1e-9)


class TestInterpolatedAccuracy:
    def test_interpolated_rom_tracks_truth_between_training_points(self):
        # a mid-span query with a truncated basis should still predict the
        # response well: the whole point of the tangent-space interpolation
        region, _, sub = region_for(stories=4, r_local=3)
        for qv in (0.8, 1.05, 1.25):
            model = make_chain(stories=4, amplitude=qv)
            loads = top_sine_loads(4, steps=160)
            cfg = IntegratorConfig(dt=loads.dt)
            hist_full = integrate(model, loads, cfg)
            rsys = query_coefficients(region, (qv,), model)
            hist_red = integrate_reduced(rsys, loads, cfg)
            recon = rsys.reconstruct(hist_red.displacements)
            err = np.linalg.norm(recon - hist_full.displacements) \
                / np.linalg.norm(hist_full.displacements)
            assert err < 5e-3, f"interpolated basis drifts at q={qv}: RE={err:.2e}"
