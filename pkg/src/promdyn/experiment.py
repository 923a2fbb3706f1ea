"""Offline/online experiment pipeline over a parametric shear-chain model.

Offline: simulate the high-fidelity model at every training point of the
partitioned parameter domain, build the requested projection artifacts
(domain-global basis, per-subdomain region models, ECSW hyper meshes), and
persist everything with content hashes so an unchanged rerun recomputes
nothing.

Online: for each query point, locate the subdomain, build the requested
reduced systems from the persisted artifacts, integrate them against the
freshly simulated high-fidelity reference, and report relative errors and
timed speed-ups. Deterministic quantities go to results.csv; wall-clock
quantities go to timing.csv.
"""

import concurrent.futures
import csv
import json
import math
from pathlib import Path

import numpy as np

from . import io as pio
from .config import ExperimentConfig, from_dict as config_from_dict
from .ecsw import HyperMesh, assemble_training, solve_sparse_nnls
from .errors import (
    ConfigError,
    MissingArtifactError,
    NewtonConvergenceError,
)
from .excitation import LoadHistory, QuakeParams, derive_seed, filtered_noise_quake, sinusoid
from .grassmann import TangentVector
from .metrics import ComparisonReport, aggregate, relative_error, speedup
from .model import StructuralModel, build_shear_frame
from .newmark import IntegratorConfig, integrate, integrate_reduced
from .params import ParameterAxis, locate, partition_grid
from .pod import BasisProvenance, ReductionBasis, SnapshotSet
from .rom import GlobalModel, RegionModel, Variant, build_global, build_region, query, reduce_model

RESULTS_COLUMNS = (
    "variant", "subdomain", "order", "re_u", "re_rf", "re_sigma",
    "total_elements", "mesh_elements", "interp_ops",
)
REGION_VARIANTS = (Variant.LOCAL.value, Variant.ENTRIES.value, Variant.COEFFICIENTS.value)


def point_key(point) -> str:
    coords = "_".join(f"{c:.10g}" for c in np.asarray(point, dtype=float))
    return "p" + coords.replace("+", "")


def parse_points(text: str, ndim: int):
    """Parse '0.3,1.5e4;0.7,3e4' into a list of points."""
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            coords = [float(c) for c in chunk.split(",")]
        except ValueError:
            raise ConfigError(f"query point {chunk!r} is not a comma-separated number list")
        if len(coords) != ndim:
            raise ConfigError(
                f"query point {chunk!r} has {len(coords)} coordinates, expected {ndim}"
            )
        points.append(tuple(coords))
    if not points:
        raise ConfigError("no query points given")
    return points


class Experiment:
    """Binds a validated configuration to concrete models, loads, and grids."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        axes = [ParameterAxis(a.name, a.lower, a.upper) for a in cfg.axes]
        if cfg.grid.extents is not None:
            self.grid = partition_grid(axes, extents=cfg.grid.extents, overlap=cfg.grid.overlap)
        else:
            self.grid = partition_grid(axes, divisions=cfg.grid.divisions, overlap=cfg.grid.overlap)

    def _axis_value(self, point, name):
        for i, axis in enumerate(self.cfg.axes):
            if axis.name == name:
                return float(np.asarray(point, dtype=float)[i])
        return None

    def model_for(self, point) -> StructuralModel:
        mc = self.cfg.model
        amplitude = self._axis_value(point, "bw_amplitude")
        if amplitude is None:
            amplitude = mc.link.amplitude
        z_max = self._axis_value(point, "bw_z_max")
        if z_max is None:
            z_max = mc.link.z_max
        link = {
            "stiffness": mc.link.stiffness,
            "exponent": mc.link.exponent,
            "amplitude": amplitude,
            "z_max": z_max,
        }
        model = build_shear_frame(
            stories=mc.stories,
            story_mass=np.asarray(mc.story_mass, dtype=float),
            story_stiffness=np.asarray(mc.story_stiffness, dtype=float),
            damping_ratio=mc.damping_ratio,
            link_params=link,
        )
        if mc.geometry:
            model.meta["geometry"] = dict(mc.geometry)
        return model

    def integrator(self) -> IntegratorConfig:
        ic = self.cfg.integrator
        return IntegratorConfig(
            dt=ic.dt, newton_tol=ic.newton_tol, max_newton_iters=ic.max_newton_iters
        )

    @property
    def steps(self) -> int:
        ic = self.cfg.integrator
        return int(round(ic.t_total_s / ic.dt)) + 1

    def loads_for(self, point) -> LoadHistory:
        exc = self.cfg.excitation
        mc = self.cfg.model
        dt = self.cfg.integrator.dt
        if exc.kind == "sinusoid":
            if exc.pattern == "top":
                pattern = np.zeros(mc.stories)
                pattern[-1] = 1.0
            elif exc.pattern == "uniform":
                pattern = np.ones(mc.stories)
            else:
                pattern = np.asarray(exc.pattern, dtype=float)
            return sinusoid(exc.freq_hz, exc.amplitude, pattern, dt, self.steps)
        cutoff = self._axis_value(point, "quake_cutoff_hz")
        if cutoff is None:
            cutoff = exc.cutoff_hz
        amplitude = self._axis_value(point, "quake_amplitude")
        if amplitude is None:
            amplitude = exc.amplitude
        qp = QuakeParams(
            cutoff_hz=cutoff,
            amplitude=amplitude,
            duration_s=exc.duration_s,
            total_sim_s=self.cfg.integrator.t_total_s,
            seed=derive_seed(self.cfg.seed, point_key(point)),
        )
        masses = np.broadcast_to(np.asarray(mc.story_mass, dtype=float), (mc.stories,))
        return filtered_noise_quake(qp, masses, dt)

    def simulate(self, point, record_element_forces: bool = True):
        """High-fidelity run at one parameter point."""
        model = self.model_for(point)
        loads = self.loads_for(point)
        try:
            hist = integrate(
                model, loads, self.integrator(), record_element_forces=record_element_forces
            )
        except NewtonConvergenceError as exc:
            raise NewtonConvergenceError(
                exc.step, exc.residual,
                f"training simulation at parameter point "
                f"{np.asarray(point, dtype=float).tolist()} failed: {exc}",
            ) from exc
        snap = SnapshotSet(
            parameter_point=np.asarray(point, dtype=float),
            displacements=hist.displacements.T.copy(),
            dt=loads.dt,
            element_forces=hist.element_forces,
        )
        return snap, hist


def _simulate_worker(raw_cfg_json: str, point):
    cfg = config_from_dict(json.loads(raw_cfg_json) | {"output_dir": "unused", "workers": 1})
    exp = Experiment(cfg)
    snap, _hist = exp.simulate(tuple(point))
    return (point, snap.displacements, snap.element_forces, snap.dt)


def _snapshot_input_key(cfg: ExperimentConfig, point) -> str:
    return pio.canonical_hash({
        "kind": "snapshot",
        "model": cfg.raw["model"],
        "parameters": cfg.raw["parameters"],
        "excitation": cfg.raw["excitation"],
        "integrator": cfg.raw["integrator"],
        "seed": cfg.seed,
        "point": [f"{c:.12e}" for c in np.asarray(point, dtype=float)],
    })


def _save_snapshot(out: Path, key: str, snap: SnapshotSet):
    # no run-dependent data in here: artifact hashes must be pure functions
    # of the configuration so reruns and worker pools agree byte for byte
    d = out / "snapshots" / key
    files = [d / "displacements.mat64"]
    pio.save_matrix(files[0], snap.displacements)
    meta = {
        "point": snap.parameter_point.tolist(),
        "dt": snap.dt,
        "ndof": snap.ndof,
        "steps": snap.steps,
    }
    if snap.element_forces is not None:
        f = d / "element_forces.mat64"
        pio.save_matrix(f, snap.element_forces)
        files.append(f)
        meta["n_links"] = int(snap.element_forces.shape[0])
    mf = d / "meta.json"
    pio.save_json(mf, meta)
    files.append(mf)
    return files


def _load_snapshot(out: Path, key: str) -> SnapshotSet:
    d = out / "snapshots" / key
    meta = pio.load_json(d / "meta.json")
    forces = None
    if (d / "element_forces.mat64").exists():
        forces = pio.load_matrix(d / "element_forces.mat64")
    return SnapshotSet(
        parameter_point=np.asarray(meta["point"], dtype=float),
        displacements=pio.load_matrix(d / "displacements.mat64"),
        dt=float(meta["dt"]),
        element_forces=forces,
    )


def _save_basis(path_prefix: Path, basis: ReductionBasis) -> list:
    mat = Path(str(path_prefix) + ".mat64")
    pio.save_matrix(mat, basis.matrix)
    meta = Path(str(path_prefix) + ".json")
    origin = basis.origin
    if isinstance(origin, tuple):
        origin = list(origin)
    pio.save_json(meta, {
        "singular_values": basis.singular_values.tolist(),
        "provenance": basis.provenance.value,
        "origin": origin,
        "fingerprint": basis.fingerprint,
    })
    return [mat, meta]


def _load_basis(path_prefix: Path) -> ReductionBasis:
    matrix = pio.load_matrix(Path(str(path_prefix) + ".mat64"))
    meta = pio.load_json(Path(str(path_prefix) + ".json"))
    origin = meta["origin"]
    if isinstance(origin, list):
        origin = tuple(origin)
    basis = ReductionBasis(
        matrix=matrix,
        singular_values=np.asarray(meta["singular_values"], dtype=float),
        provenance=BasisProvenance(meta["provenance"]),
        origin=origin,
    )
    if basis.fingerprint != meta["fingerprint"]:
        raise ValueError(f"basis at {path_prefix} does not match its recorded fingerprint")
    return basis


def _save_region(out: Path, region: RegionModel) -> list:
    d = out / "regions" / f"region_{region.subdomain.index}"
    files = []
    files += _save_basis(d / "reference", region.reference_basis)
    files += _save_basis(d / "region_basis", region.region_basis)
    files += _save_basis(d / "pooled", region.pooled)
    for i, (t, xi) in enumerate(zip(region.tangent_locals, region.coeff_matrices)):
        f_t = d / f"tangent_{i}.mat64"
        f_x = d / f"xi_{i}.mat64"
        pio.save_matrix(f_t, t.matrix)
        pio.save_matrix(f_x, xi)
        files += [f_t, f_x]
    meta = d / "meta.json"
    pio.save_json(meta, {
        "subdomain_index": region.subdomain.index,
        "lower": region.subdomain.lower.tolist(),
        "upper": region.subdomain.upper.tolist(),
        "training_points": region.subdomain.training_points.tolist(),
        "n_training": len(region.tangent_locals),
        "order": region.order,
        "diagnostics": region.diagnostics,
    })
    files.append(meta)
    return files


def _load_region(out: Path, exp: Experiment, index: int) -> RegionModel:
    d = out / "regions" / f"region_{index}"
    if not d.exists():
        raise MissingArtifactError(
            f"region model {index} not found under {d}; run the offline stage first"
        )
    meta = pio.load_json(d / "meta.json")
    sub = exp.grid.subdomains[index]
    if not np.allclose(sub.lower, meta["lower"]) or not np.allclose(sub.upper, meta["upper"]):
        raise MissingArtifactError(
            f"region model {index} on disk does not match the configured grid; "
            f"rerun the offline stage"
        )
    reference = _load_basis(d / "reference")
    region_basis = _load_basis(d / "region_basis")
    pooled = _load_basis(d / "pooled")
    tangents = []
    coeff = []
    for i in range(meta["n_training"]):
        tangents.append(TangentVector(
            matrix=pio.load_matrix(d / f"tangent_{i}.mat64"),
            reference_id=reference.fingerprint,
        ))
        coeff.append(pio.load_matrix(d / f"xi_{i}.mat64"))
    hyper = None
    if (d / "hyper.json").exists():
        hyper = HyperMesh.from_dict(pio.load_json(d / "hyper.json"))
    return RegionModel(
        subdomain=sub,
        reference_basis=reference,
        tangent_locals=tangents,
        region_basis=region_basis,
        coeff_matrices=coeff,
        pooled=pooled,
        hyper=hyper,
        diagnostics=dict(meta.get("diagnostics", {})),
    )


def run_offline(cfg: ExperimentConfig, tau: float | None = None) -> dict:
    """Build and persist every offline artifact; idempotent via the manifest."""
    exp = Experiment(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = pio.Manifest(out)
    stats = {
        "snapshots_computed": 0, "snapshots_skipped": 0,
        "regions_computed": 0, "regions_skipped": 0,
        "global_computed": 0, "global_skipped": 0,
        "hyper_computed": 0, "hyper_skipped": 0,
    }
    if tau is None:
        tau = cfg.ecsw.tau

    points = exp.grid.training_points()
    snapshot_keys = {}
    todo = []
    for p in points:
        key = point_key(p)
        input_key = _snapshot_input_key(cfg, p)
        snapshot_keys[key] = input_key
        if manifest.is_current(f"snapshot/{key}", input_key):
            stats["snapshots_skipped"] += 1
        else:
            todo.append((key, input_key, tuple(p)))

    cache: dict = {}
    if todo and cfg.workers > 1:
        raw_json = pio.canonical_json(dict(cfg.raw) | {"output_dir": "unused", "workers": 1,
                                                       "validation_points": []})
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(
                _simulate_worker, [raw_json] * len(todo), [t[2] for t in todo]
            ))
        for (key, input_key, p), (_, disp, forces, dt) in zip(todo, results):
            snap = SnapshotSet(np.asarray(p), disp, dt, forces)
            files = _save_snapshot(out, key, snap)
            manifest.record(f"snapshot/{key}", input_key, files)
            cache[key] = snap
            stats["snapshots_computed"] += 1
    else:
        for key, input_key, p in todo:
            snap, _hist = exp.simulate(p)
            files = _save_snapshot(out, key, snap)
            manifest.record(f"snapshot/{key}", input_key, files)
            cache[key] = snap
            stats["snapshots_computed"] += 1
    manifest.save()

    def snapshot_for(p) -> SnapshotSet:
        key = point_key(p)
        if key not in cache:
            manifest.verify(f"snapshot/{key}")
            cache[key] = _load_snapshot(out, key)
        return cache[key]

    red = cfg.reduction
    if Variant.GLOBAL.value in red.variants:
        input_key = pio.canonical_hash({
            "kind": "global",
            "snapshots": sorted(snapshot_keys.values()),
            "order": red.global_order,
        })
        if manifest.is_current("global", input_key):
            stats["global_skipped"] += 1
        else:
            gm = build_global([snapshot_for(p) for p in points], red.global_order)
            files = _save_basis(out / "global" / "basis", gm.basis)
            manifest.record("global", input_key, files)
            stats["global_computed"] += 1
        manifest.save()

    needs_regions = any(v in red.variants for v in REGION_VARIANTS) or cfg.ecsw.enabled
    regions: dict = {}
    if needs_regions:
        for sub in exp.grid.subdomains:
            keys = [snapshot_keys[point_key(p)] for p in sub.training_points]
            input_key = pio.canonical_hash({
                "kind": "region",
                "snapshots": keys,
                "r_local": red.r_local,
                "r_global": red.r_global,
                "subdomain": {
                    "index": sub.index,
                    "lower": sub.lower.tolist(),
                    "upper": sub.upper.tolist(),
                },
            })
            if manifest.is_current(f"region/{sub.index}", input_key):
                stats["regions_skipped"] += 1
            else:
                region = build_region(
                    sub, [snapshot_for(p) for p in sub.training_points],
                    red.r_local, red.r_global,
                )
                files = _save_region(out, region)
                manifest.record(f"region/{sub.index}", input_key, files)
                regions[sub.index] = region
                stats["regions_computed"] += 1
        manifest.save()

    if cfg.ecsw.enabled:
        for sub in exp.grid.subdomains:
            input_key = pio.canonical_hash({
                "kind": "hyper",
                "region": manifest.entries[f"region/{sub.index}"]["inputs"],
                "tau": tau,
                "stride": cfg.ecsw.sample_stride,
            })
            if manifest.is_current(f"hyper/{sub.index}", input_key):
                stats["hyper_skipped"] += 1
                continue
            region = regions.get(sub.index)
            if region is None:
                region = _load_region(out, exp, sub.index)
            model = exp.model_for(sub.centroid)
            training = assemble_training(
                model,
                [snapshot_for(p) for p in sub.training_points],
                region.reference_basis,
                sample_stride=cfg.ecsw.sample_stride,
                tau=tau,
                subdomain_index=sub.index,
            )
            mesh = solve_sparse_nnls(training)
            f = out / "regions" / f"region_{sub.index}" / "hyper.json"
            pio.save_json(f, mesh.to_dict())
            manifest.record(f"hyper/{sub.index}", input_key, [f])
            stats["hyper_computed"] += 1
        manifest.save()

    return stats


def _verify_artifact(manifest: pio.Manifest, key: str, remedy: str) -> None:
    try:
        manifest.verify(key)
    except (KeyError, FileNotFoundError, ValueError) as exc:
        raise MissingArtifactError(
            f"artifact {key!r} is missing or stale ({exc}); {remedy}"
        ) from exc


def _timed(run, timing):
    """Apply the timing protocol: warm-up runs discarded, median of the rest."""
    for _ in range(timing.warmup):
        run()
    times = []
    result = None
    for _ in range(timing.repeats):
        result = run()
        times.append(result.wall_time_s)
    return result, float(np.median(times))


def run_online(cfg: ExperimentConfig, points=None, variants=None,
               use_hyper: bool | None = None) -> list:
    """Evaluate the requested pROM variants at query points against fresh HFM runs."""
    exp = Experiment(cfg)
    out = Path(cfg.output_dir)
    if points is None or len(points) == 0:
        points = list(cfg.validation_points)
    if not points:
        raise ConfigError("no query points: pass them explicitly or set validation_points")
    if variants is None:
        variants = list(cfg.reduction.variants)
    for v in variants:
        Variant(v)
    if use_hyper is None:
        use_hyper = cfg.ecsw.enabled

    manifest = pio.Manifest(out)
    global_model = None
    if Variant.GLOBAL.value in variants:
        _verify_artifact(manifest, "global",
                         "run the offline stage with the global variant")
        global_model = GlobalModel(basis=_load_basis(out / "global" / "basis"))

    region_cache: dict = {}
    reports = []
    for q in points:
        q = tuple(float(c) for c in q)
        sub = locate(exp.grid, q)
        if sub.index not in region_cache and any(v in REGION_VARIANTS for v in variants):
            _verify_artifact(manifest, f"region/{sub.index}", "run the offline stage")
            region_cache[sub.index] = _load_region(out, exp, sub.index)

        loads = exp.loads_for(q)
        integrator = exp.integrator()
        hfm_model = exp.model_for(q)
        hfm_hist, hfm_wall = _timed(
            lambda: integrate(hfm_model, loads, integrator, record_element_forces=True),
            cfg.timing,
        )
        hfm_disp = hfm_hist.displacements.T  # (n, T)

        for variant in variants:
            model = exp.model_for(q)
            if variant == Variant.GLOBAL.value:
                system = global_model.system_for(model)
            else:
                system = query(region_cache[sub.index], q, model, variant, use_hyper=use_hyper)
            rom_hist, rom_wall = _timed(
                lambda: integrate_reduced(
                    system, loads, integrator, record_element_forces=not system.is_hyper
                ),
                cfg.timing,
            )
            rec = system.reconstruct(rom_hist.displacements).T  # (n, T)
            re_u = relative_error(hfm_disp, rec, denominator=cfg.re_denominator)
            re_rf = None
            re_sigma = None
            if rom_hist.element_forces is not None:
                re_rf = relative_error(
                    hfm_hist.element_forces, rom_hist.element_forces,
                    denominator=cfg.re_denominator,
                )
                re_sigma = relative_error(
                    hfm_hist.element_forces[:, -1], rom_hist.element_forces[:, -1],
                    denominator=cfg.re_denominator,
                )
            reports.append(ComparisonReport(
                query_point=q,
                variant=variant,
                re_u=re_u,
                re_rf=re_rf,
                re_sigma=re_sigma,
                hfm_wall_s=hfm_wall,
                rom_wall_s=rom_wall,
                speedup=speedup(hfm_wall, rom_wall),
                subdomain_index=sub.index,
                order=system.ndof,
                total_elements=system.total_elements,
                mesh_elements=(len(system.selected_elements) if system.is_hyper else None),
                extra={"interp_ops": system.interp_op_count},
            ))

    _write_results(out, exp, reports)
    return reports


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.12e}"
    return str(value)


def _write_results(out: Path, exp: Experiment, reports) -> None:
    d = out / "results"
    d.mkdir(parents=True, exist_ok=True)
    axis_names = [a.label for a in exp.grid.axes]
    with open(d / "results.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(axis_names + list(RESULTS_COLUMNS))
        for r in reports:
            writer.writerow(
                [f"{c:.12g}" for c in r.query_point]
                + [r.variant, r.subdomain_index, r.order, _fmt(r.re_u), _fmt(r.re_rf),
                   _fmt(r.re_sigma), r.total_elements,
                   "" if r.mesh_elements is None else r.mesh_elements,
                   r.extra.get("interp_ops", "")]
            )
    with open(d / "timing.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(axis_names + ["variant", "hfm_wall_s", "rom_wall_s", "speedup"])
        for r in reports:
            writer.writerow(
                [f"{c:.12g}" for c in r.query_point]
                + [r.variant, _fmt(r.hfm_wall_s), _fmt(r.rom_wall_s), _fmt(r.speedup)]
            )


_SUMMARY_HEADER = (
    "variant", "count", "mean_re_u", "max_re_u", "mean_re_rf", "max_re_rf",
    "mean_re_sigma", "max_re_sigma",
)


def report(cfg: ExperimentConfig) -> dict:
    """Aggregate results.csv into summary.csv and error_grid.csv."""
    out = Path(cfg.output_dir)
    d = out / "results"
    results = d / "results.csv"
    rows = []
    if results.exists():
        with open(results, newline="") as fh:
            rows = list(csv.DictReader(fh))
    if not rows:
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "summary.csv", "w", newline="") as fh:
            csv.writer(fh).writerow(_SUMMARY_HEADER)
        with open(d / "error_grid.csv", "w", newline="") as fh:
            csv.writer(fh).writerow(
                [a.name for a in cfg.axes] + ["variant", "re_u", "re_rf", "re_sigma"]
            )
        print(f"nothing to report yet: no evaluations under {results} "
              f"(run the online stage first); wrote empty summaries")
        return {}

    n_axes = len(cfg.axes)
    axis_names = list(rows[0])[:n_axes]
    reports = []
    for row in rows:
        reports.append(ComparisonReport(
            query_point=tuple(float(row[a]) for a in axis_names),
            variant=row["variant"],
            re_u=float(row["re_u"]),
            re_rf=float(row["re_rf"]) if row["re_rf"] else None,
            re_sigma=float(row["re_sigma"]) if row["re_sigma"] else None,
        ))
    summary = aggregate(reports)

    with open(d / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SUMMARY_HEADER)
        for variant, row in summary.items():
            writer.writerow([
                variant, row["count"],
                _fmt(row["mean_re_u"]), _fmt(row["max_re_u"]),
                _fmt(row["mean_re_rf"]), _fmt(row["max_re_rf"]),
                _fmt(row["mean_re_sigma"]), _fmt(row["max_re_sigma"]),
            ])
    with open(d / "error_grid.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(axis_names + ["variant", "re_u", "re_rf", "re_sigma"])
        for r in reports:
            writer.writerow(
                [f"{c:.12g}" for c in r.query_point]
                + [r.variant, _fmt(r.re_u), _fmt(r.re_rf), _fmt(r.re_sigma)]
            )
    return summary


def verify(cfg: ExperimentConfig | None = None) -> list:
    """Fast invariant battery; returns (name, ok, detail) triples."""
    from .grassmann import exp_map, log_map
    from .params import interpolation_weights
    from .pod import svd_sign_convention

    checks = []
    rng = np.random.default_rng(20240817)

    grid = (
        Experiment(cfg).grid if cfg is not None
        else partition_grid([(0.0, 1.0), (0.0, 2.0)], extents=(0.4, 0.9))
    )
    lo = np.array([ax.lower for ax in grid.axes])
    hi = np.array([ax.upper for ax in grid.axes])
    worst_pu = 0.0
    locate_ok = True
    for _ in range(200):
        q = lo + rng.random(len(lo)) * (hi - lo)
        try:
            sub = locate(grid, q)
        except Exception:
            locate_ok = False
            break
        w = interpolation_weights(sub, q)
        worst_pu = max(worst_pu, abs(w.sum() - 1.0), -min(w.min(), 0.0))
    checks.append(("locate total on domain", locate_ok, "200 random interior points"))
    checks.append(("weights partition of unity", worst_pu < 1e-12, f"worst defect {worst_pu:.2e}"))

    n, r = 24, 4
    worst_span = 0.0
    worst_ortho = 0.0
    for _ in range(20):
        v0_mat, _ = np.linalg.qr(rng.standard_normal((n, r)))
        v0 = ReductionBasis(v0_mat, np.ones(r), BasisProvenance.LOCAL_SNAPSHOT)
        vi_mat, _ = np.linalg.qr(v0_mat + 0.2 * rng.standard_normal((n, r)))
        vi = ReductionBasis(vi_mat, np.ones(r), BasisProvenance.LOCAL_SNAPSHOT)
        back = exp_map(v0, log_map(v0, vi))
        # sine of the largest principal angle: precise where arccos is not
        span_defect = float(np.linalg.norm(back.matrix - vi_mat @ (vi_mat.T @ back.matrix), ord=2))
        worst_span = max(worst_span, span_defect)
        gram = back.matrix.T @ back.matrix
        worst_ortho = max(worst_ortho, float(np.max(np.abs(gram - np.eye(r)))))
    checks.append(("tangent maps round trip", worst_span < 1e-9, f"worst span defect {worst_span:.2e}"))
    checks.append(("mapped bases orthonormal", worst_ortho < 1e-10, f"worst defect {worst_ortho:.2e}"))

    q_sig = rng.standard_normal((6, 9))
    ok_metric = (
        relative_error(q_sig, q_sig) == 0.0
        and abs(relative_error(q_sig, np.zeros_like(q_sig)) - 1.0) < 1e-15
        and abs(relative_error(q_sig, 1.5 * q_sig) - 0.5) < 1e-12
    )
    checks.append(("relative error identities", ok_metric, "RE(q,q)=0, RE(q,0)=1, scaling"))

    u = rng.standard_normal((8, 5))
    s1 = svd_sign_convention(np.linalg.svd(u, full_matrices=False)[0])
    s2 = svd_sign_convention(np.linalg.svd(u.copy(), full_matrices=False)[0])
    lead = np.take_along_axis(s1, np.argmax(np.abs(s1), axis=0)[None, :], axis=0)
    checks.append((
        "svd sign convention deterministic",
        bool(np.array_equal(s1, s2) and np.all(lead > 0)),
        "column leads positive",
    ))

    from .model import BoucWenLink, bw_rk4_step
    link = BoucWenLink.from_saturation(0, None, 1.0, amplitude=0.8, z_max=2.0, exponent=1.5)
    z = 0.0
    for _ in range(4000):
        z = float(bw_rk4_step(np.array([z]), np.array([1.0]), 0.005,
                              np.array([link.amplitude]), np.array([link.beta]),
                              np.array([link.gamma]), np.array([link.exponent]),
                              np.array([link.z_max]))[0])
    ok_sat = abs(z - link.z_max) < 0.01 * link.z_max
    checks.append(("hysteretic state saturates", ok_sat, f"z -> {z:.4f}, z_max {link.z_max:.4f}"))

    return checks
