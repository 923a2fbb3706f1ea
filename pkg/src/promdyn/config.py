"""Experiment configuration: strict JSON schema with unknown-key rejection.

Every block is validated eagerly with the offending path named in the error;
unknown keys are rejected rather than ignored so typos cannot silently change
an experiment. The validated canonical dict (defaults applied) is kept on the
config for provenance hashing.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

VARIANT_NAMES = ("global", "local", "entries", "coefficients")
AXIS_NAMES = ("bw_amplitude", "bw_z_max", "quake_cutoff_hz", "quake_amplitude")


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigError(f"{path}: missing required key {key!r}")
    return d.pop(key)


def _reject_unknown(d: dict, path: str):
    if d:
        raise ConfigError(f"{path}: unknown keys {sorted(d)}")


def _number(value, path: str, *, positive=False, non_negative=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if positive and value <= 0.0:
        raise ConfigError(f"{path}: must be positive, got {value}")
    if non_negative and value < 0.0:
        raise ConfigError(f"{path}: must be non-negative, got {value}")
    return value


def _integer(value, path: str, *, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value}")
    return value


def _number_or_list(value, path: str, length: int):
    if isinstance(value, (list, tuple)):
        if len(value) != length:
            raise ConfigError(f"{path}: expected {length} values, got {len(value)}")
        return tuple(_number(v, f"{path}[{i}]", positive=True) for i, v in enumerate(value))
    return _number(value, path, positive=True)


@dataclass(frozen=True)
class LinkBase:
    stiffness: float
    exponent: float
    amplitude: float | None = None
    z_max: float | None = None


@dataclass(frozen=True)
class ModelConfig:
    stories: int
    story_mass: float | tuple
    story_stiffness: float | tuple
    damping_ratio: float
    link: LinkBase
    geometry: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AxisConfig:
    name: str
    lower: float
    upper: float


@dataclass(frozen=True)
class GridConfig:
    extents: tuple | None
    divisions: tuple | None
    overlap: str


@dataclass(frozen=True)
class ExcitationConfig:
    kind: str
    freq_hz: float | None = None
    amplitude: float | None = None
    pattern: str | tuple = "top"
    cutoff_hz: float | None = None
    duration_s: float | None = None


@dataclass(frozen=True)
class IntegratorSection:
    dt: float
    t_total_s: float
    newton_tol: float
    max_newton_iters: int


@dataclass(frozen=True)
class ReductionConfig:
    r_local: int
    r_global: int | None
    global_order: int
    variants: tuple


@dataclass(frozen=True)
class EcswConfig:
    enabled: bool
    tau: float
    sample_stride: int


@dataclass(frozen=True)
class TimingConfig:
    repeats: int
    warmup: int


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig
    axes: tuple
    grid: GridConfig
    excitation: ExcitationConfig
    integrator: IntegratorSection
    reduction: ReductionConfig
    ecsw: EcswConfig
    re_denominator: str
    timing: TimingConfig
    workers: int
    output_dir: str
    seed: int
    validation_points: tuple = ()
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def axis_names(self) -> tuple:
        return tuple(a.name for a in self.axes)


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be an object")
    data = json.loads(json.dumps(data))  # deep copy, reject non-JSON input

    model_d = dict(_require(data, "model", "$"))
    stories = _integer(_require(model_d, "stories", "model"), "model.stories", minimum=1)
    story_mass = _number_or_list(_require(model_d, "story_mass", "model"), "model.story_mass", stories)
    story_stiffness = _number_or_list(
        _require(model_d, "story_stiffness", "model"), "model.story_stiffness", stories
    )
    damping = _number(_require(model_d, "damping_ratio", "model"), "model.damping_ratio", non_negative=True)
    if damping >= 1.0:
        raise ConfigError(f"model.damping_ratio: must be < 1, got {damping}")
    link_d = dict(_require(model_d, "link", "model"))
    link = LinkBase(
        stiffness=_number(_require(link_d, "stiffness", "model.link"), "model.link.stiffness", positive=True),
        exponent=_number(_require(link_d, "exponent", "model.link"), "model.link.exponent"),
        amplitude=(
            _number(link_d.pop("amplitude"), "model.link.amplitude", positive=True)
            if "amplitude" in link_d else None
        ),
        z_max=(
            _number(link_d.pop("z_max"), "model.link.z_max", positive=True)
            if "z_max" in link_d else None
        ),
    )
    if link.exponent < 1.0:
        raise ConfigError(f"model.link.exponent: must be >= 1, got {link.exponent}")
    _reject_unknown(link_d, "model.link")
    geometry = model_d.pop("geometry", {})
    if not isinstance(geometry, dict):
        raise ConfigError("model.geometry: must be an object (free-form metadata)")
    _reject_unknown(model_d, "model")
    model = ModelConfig(
        stories=stories, story_mass=story_mass, story_stiffness=story_stiffness,
        damping_ratio=damping, link=link, geometry=geometry,
    )

    params_d = dict(_require(data, "parameters", "$"))
    axes_list = _require(params_d, "axes", "parameters")
    _reject_unknown(params_d, "parameters")
    if not isinstance(axes_list, list) or not axes_list:
        raise ConfigError("parameters.axes: need at least one axis")
    axes = []
    for i, axis_d in enumerate(axes_list):
        axis_d = dict(axis_d)
        path = f"parameters.axes[{i}]"
        name = _require(axis_d, "name", path)
        if name not in AXIS_NAMES:
            raise ConfigError(f"{path}.name: unknown axis {name!r}; allowed {AXIS_NAMES}")
        lower = _number(_require(axis_d, "lower", path), f"{path}.lower")
        upper = _number(_require(axis_d, "upper", path), f"{path}.upper")
        if upper <= lower:
            raise ConfigError(f"{path}: degenerate range [{lower}, {upper}]")
        _reject_unknown(axis_d, path)
        axes.append(AxisConfig(name=name, lower=lower, upper=upper))
    names = [a.name for a in axes]
    if len(set(names)) != len(names):
        raise ConfigError("parameters.axes: duplicate axis names")
    if "bw_amplitude" in names and model.link.amplitude is not None:
        raise ConfigError("model.link.amplitude conflicts with the bw_amplitude axis")
    if "bw_amplitude" not in names and model.link.amplitude is None:
        raise ConfigError("model.link.amplitude required (no bw_amplitude axis)")
    if "bw_z_max" in names and model.link.z_max is not None:
        raise ConfigError("model.link.z_max conflicts with the bw_z_max axis")
    if "bw_z_max" not in names and model.link.z_max is None:
        raise ConfigError("model.link.z_max required (no bw_z_max axis)")

    grid_d = dict(_require(data, "grid", "$"))
    overlap = grid_d.pop("overlap", "shift")
    if overlap not in ("shift", "none"):
        raise ConfigError(f"grid.overlap: must be 'shift' or 'none', got {overlap!r}")
    extents = grid_d.pop("extents", None)
    divisions = grid_d.pop("divisions", None)
    _reject_unknown(grid_d, "grid")
    if (extents is None) == (divisions is None):
        raise ConfigError("grid: specify exactly one of extents or divisions")
    if extents is not None:
        if not isinstance(extents, list) or len(extents) != len(axes):
            raise ConfigError("grid.extents: need one extent per parameter axis")
        extents = tuple(_number(e, f"grid.extents[{i}]", positive=True) for i, e in enumerate(extents))
    if divisions is not None:
        if not isinstance(divisions, list) or len(divisions) != len(axes):
            raise ConfigError("grid.divisions: need one count per parameter axis")
        divisions = tuple(_integer(d, f"grid.divisions[{i}]", minimum=1) for i, d in enumerate(divisions))
    grid = GridConfig(extents=extents, divisions=divisions, overlap=overlap)

    exc_d = dict(_require(data, "excitation", "$"))
    kind = _require(exc_d, "kind", "excitation")
    if kind == "sinusoid":
        freq = _number(_require(exc_d, "freq_hz", "excitation"), "excitation.freq_hz", positive=True)
        amplitude = _number(_require(exc_d, "amplitude", "excitation"), "excitation.amplitude", positive=True)
        pattern = exc_d.pop("pattern", "top")
        if isinstance(pattern, list):
            if len(pattern) != stories:
                raise ConfigError("excitation.pattern: need one entry per story")
            pattern = tuple(_number(p, "excitation.pattern[]") for p in pattern)
        elif pattern not in ("top", "uniform"):
            raise ConfigError(
                f"excitation.pattern: must be 'top', 'uniform' or a per-story list, got {pattern!r}"
            )
        excitation = ExcitationConfig(kind=kind, freq_hz=freq, amplitude=amplitude, pattern=pattern)
    elif kind == "filtered_noise":
        duration = _number(_require(exc_d, "duration_s", "excitation"), "excitation.duration_s", positive=True)
        cutoff = None
        if "quake_cutoff_hz" not in names:
            cutoff = _number(_require(exc_d, "cutoff_hz", "excitation"), "excitation.cutoff_hz", positive=True)
        elif "cutoff_hz" in exc_d:
            raise ConfigError("excitation.cutoff_hz conflicts with the quake_cutoff_hz axis")
        amplitude = None
        if "quake_amplitude" not in names:
            amplitude = _number(_require(exc_d, "amplitude", "excitation"), "excitation.amplitude", positive=True)
        elif "amplitude" in exc_d:
            raise ConfigError("excitation.amplitude conflicts with the quake_amplitude axis")
        excitation = ExcitationConfig(kind=kind, amplitude=amplitude, cutoff_hz=cutoff, duration_s=duration)
    else:
        raise ConfigError(f"excitation.kind: unknown kind {kind!r}")
    _reject_unknown(exc_d, "excitation")
    if kind != "filtered_noise" and any(n.startswith("quake_") for n in names):
        raise ConfigError("quake_* axes require excitation.kind = 'filtered_noise'")

    int_d = dict(_require(data, "integrator", "$"))
    integrator = IntegratorSection(
        dt=_number(int_d.pop("dt", 0.01), "integrator.dt", positive=True),
        t_total_s=_number(_require(int_d, "t_total_s", "integrator"), "integrator.t_total_s", positive=True),
        newton_tol=_number(int_d.pop("newton_tol", 1e-8), "integrator.newton_tol", positive=True),
        max_newton_iters=_integer(int_d.pop("max_newton_iters", 30), "integrator.max_newton_iters", minimum=1),
    )
    _reject_unknown(int_d, "integrator")

    red_d = dict(_require(data, "reduction", "$"))
    r_local = _integer(_require(red_d, "r_local", "reduction"), "reduction.r_local", minimum=1)
    r_global = red_d.pop("r_global", None)
    if r_global is not None:
        r_global = _integer(r_global, "reduction.r_global", minimum=0)
    global_order = red_d.pop("global_order", None)
    if global_order is None:
        global_order = r_local
    else:
        global_order = _integer(global_order, "reduction.global_order", minimum=1)
    variants = red_d.pop("variants", list(VARIANT_NAMES))
    if not isinstance(variants, list) or not variants:
        raise ConfigError("reduction.variants: need a non-empty list")
    for v in variants:
        if v not in VARIANT_NAMES:
            raise ConfigError(f"reduction.variants: unknown variant {v!r}; allowed {VARIANT_NAMES}")
    _reject_unknown(red_d, "reduction")
    reduction = ReductionConfig(
        r_local=r_local, r_global=r_global, global_order=global_order, variants=tuple(variants)
    )

    ecsw_d = dict(data.pop("ecsw", {}))
    enabled = ecsw_d.pop("enabled", False)
    if not isinstance(enabled, bool):
        raise ConfigError("ecsw.enabled: must be a boolean")
    tau = _number(ecsw_d.pop("tau", 0.01), "ecsw.tau", positive=True)
    if tau > 1.0:
        raise ConfigError(f"ecsw.tau: must lie in (0, 1], got {tau}")
    stride = _integer(ecsw_d.pop("sample_stride", 5), "ecsw.sample_stride", minimum=1)
    _reject_unknown(ecsw_d, "ecsw")
    ecsw = EcswConfig(enabled=enabled, tau=tau, sample_stride=stride)

    metrics_d = dict(data.pop("metrics", {}))
    re_denominator = metrics_d.pop("re_denominator", "reference")
    if re_denominator not in ("reference", "literal"):
        raise ConfigError(
            f"metrics.re_denominator: must be 'reference' or 'literal', got {re_denominator!r}"
        )
    _reject_unknown(metrics_d, "metrics")

    timing_d = dict(data.pop("timing", {}))
    timing = TimingConfig(
        repeats=_integer(timing_d.pop("repeats", 3), "timing.repeats", minimum=1),
        warmup=_integer(timing_d.pop("warmup", 1), "timing.warmup", minimum=0),
    )
    _reject_unknown(timing_d, "timing")

    workers = _integer(data.pop("workers", 1), "workers", minimum=1)
    output_dir = _require(data, "output_dir", "$")
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("output_dir: must be a non-empty string")
    seed = _integer(_require(data, "seed", "$"), "seed", minimum=0)

    validation_points = data.pop("validation_points", [])
    if not isinstance(validation_points, list):
        raise ConfigError("validation_points: must be a list of points")
    vpts = []
    for i, p in enumerate(validation_points):
        if not isinstance(p, list) or len(p) != len(axes):
            raise ConfigError(f"validation_points[{i}]: need {len(axes)} coordinates")
        vpts.append(tuple(_number(c, f"validation_points[{i}][{j}]") for j, c in enumerate(p)))

    _reject_unknown(data, "$")

    raw = {
        "model": {
            "stories": stories,
            "story_mass": list(story_mass) if isinstance(story_mass, tuple) else story_mass,
            "story_stiffness": list(story_stiffness) if isinstance(story_stiffness, tuple) else story_stiffness,
            "damping_ratio": damping,
            "link": {k: v for k, v in (
                ("stiffness", link.stiffness), ("exponent", link.exponent),
                ("amplitude", link.amplitude), ("z_max", link.z_max),
            ) if v is not None},
            "geometry": geometry,
        },
        "parameters": {"axes": [{"name": a.name, "lower": a.lower, "upper": a.upper} for a in axes]},
        "grid": {
            "overlap": overlap,
            **({"extents": list(extents)} if extents is not None else {}),
            **({"divisions": list(divisions)} if divisions is not None else {}),
        },
        "excitation": {k: (list(v) if isinstance(v, tuple) else v) for k, v in (
            ("kind", excitation.kind), ("freq_hz", excitation.freq_hz),
            ("amplitude", excitation.amplitude),
            ("pattern", excitation.pattern if excitation.kind == "sinusoid" else None),
            ("cutoff_hz", excitation.cutoff_hz), ("duration_s", excitation.duration_s),
        ) if v is not None},
        "integrator": {
            "dt": integrator.dt, "t_total_s": integrator.t_total_s,
            "newton_tol": integrator.newton_tol, "max_newton_iters": integrator.max_newton_iters,
        },
        "reduction": {
            "r_local": r_local, "r_global": r_global, "global_order": global_order,
            "variants": list(variants),
        },
        "ecsw": {"enabled": enabled, "tau": tau, "sample_stride": stride},
        "metrics": {"re_denominator": re_denominator},
        "seed": seed,
    }

    return ExperimentConfig(
        model=model, axes=tuple(axes), grid=grid, excitation=excitation,
        integrator=integrator, reduction=reduction, ecsw=ecsw,
        re_denominator=re_denominator, timing=timing, workers=workers,
        output_dir=output_dir, seed=seed, validation_points=tuple(vpts), raw=raw,
    )


def from_file(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return from_dict(data)
