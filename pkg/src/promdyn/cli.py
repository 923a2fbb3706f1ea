"""Command-line entry points for the offline/online/report/verify workflow.

Exit codes: 0 on success, 2 for configuration and workflow errors (bad or
missing config, artifacts not built yet), 3 for numeric failures (divergent
Newton iteration, ill-conditioned tangent maps, rank or domain violations,
failed verification checks).
"""

import argparse
import sys

import numpy as np

from . import config as config_mod
from . import experiment
from .errors import (
    ConfigError,
    MissingArtifactError,
    PromdynError,
)
from .rom import Variant

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _add_config_arg(p):
    p.add_argument("--config", required=True, help="experiment configuration (JSON)")
    p.add_argument("--out", default=None, help="override the configured output directory")
    p.add_argument("--seed", type=int, default=None, help="override the configured master seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promdyn",
        description="Parametric model reduction for hysteretic shear-frame dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_off = sub.add_parser("offline", help="simulate training points and build reduction artifacts")
    _add_config_arg(p_off)
    p_off.add_argument("--tau", type=float, default=None, help="override the ECSW tolerance")

    p_on = sub.add_parser("online", help="evaluate reduced models at query points")
    _add_config_arg(p_on)
    p_on.add_argument(
        "--points", default=None,
        help="query points 'a,b;c,d' (defaults to the configured validation points)",
    )
    p_on.add_argument(
        "--variants", default=None,
        help="comma-separated subset of global,local,entries,coefficients",
    )
    p_on.add_argument(
        "--hyper", dest="hyper", action="store_true", default=None,
        help="force ECSW hyper-reduction on",
    )
    p_on.add_argument(
        "--no-hyper", dest="hyper", action="store_false",
        help="force ECSW hyper-reduction off",
    )

    p_rep = sub.add_parser("report", help="aggregate online results into summary tables")
    _add_config_arg(p_rep)

    p_ver = sub.add_parser("verify", help="run the internal invariant checks")
    p_ver.add_argument("--config", default=None, help="optional configuration to check against")
    return parser


def _load_config(args) -> config_mod.ExperimentConfig:
    cfg = config_mod.from_file(args.config)
    out = getattr(args, "out", None)
    seed = getattr(args, "seed", None)
    if out is None and seed is None:
        return cfg
    raw = dict(cfg.raw)
    raw["output_dir"] = out if out else cfg.output_dir
    raw["seed"] = cfg.seed if seed is None else seed
    raw["workers"] = cfg.workers
    raw["timing"] = {"repeats": cfg.timing.repeats, "warmup": cfg.timing.warmup}
    raw["validation_points"] = [list(p) for p in cfg.validation_points]
    return config_mod.from_dict(raw)


def _cmd_offline(args) -> int:
    cfg = _load_config(args)
    stats = experiment.run_offline(cfg, tau=args.tau)
    for key in sorted(stats):
        print(f"{key}: {stats[key]}")
    return EXIT_OK


def _cmd_online(args) -> int:
    cfg = _load_config(args)
    points = None
    if args.points:
        points = experiment.parse_points(args.points, len(cfg.axes))
    variants = None
    if args.variants:
        variants = [v.strip() for v in args.variants.split(",") if v.strip()]
        for v in variants:
            try:
                Variant(v)
            except ValueError:
                raise ConfigError(f"unknown variant {v!r}") from None
    reports = experiment.run_online(cfg, points=points, variants=variants, use_hyper=args.hyper)
    for r in reports:
        point = ", ".join(f"{c:g}" for c in r.query_point)
        extras = ""
        if r.mesh_elements is not None:
            extras = f"  mesh {r.mesh_elements}/{r.total_elements}"
        re_rf = f"{r.re_rf:.3e}" if r.re_rf is not None else "n/a"
        print(
            f"[{point}] {r.variant:<12} subdomain {r.subdomain_index}  order {r.order}  "
            f"RE_u {r.re_u:.3e}  RE_rf {re_rf}  speedup {r.speedup:.2f}x{extras}"
        )
    print(f"wrote {len(reports)} evaluations to {cfg.output_dir}/results/")
    return EXIT_OK


def _cmd_report(args) -> int:
    cfg = _load_config(args)
    summary = experiment.report(cfg)
    for variant, row in summary.items():
        print(
            f"{variant:<12} n={row['count']}  mean RE_u {row['mean_re_u']:.3e}  "
            f"max RE_u {row['max_re_u']:.3e}"
        )
    print(f"wrote summary.csv and error_grid.csv to {cfg.output_dir}/results/")
    return EXIT_OK


def _cmd_verify(args) -> int:
    cfg = None
    if args.config:
        cfg = config_mod.from_file(args.config)
    checks = experiment.verify(cfg)
    failed = 0
    for name, ok, detail in checks:
        status = "pass" if ok else "FAIL"
        print(f"[{status}] {name}: {detail}")
        failed += 0 if ok else 1
    if failed:
        print(f"{failed} of {len(checks)} checks failed")
        return EXIT_NUMERIC
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "offline": _cmd_offline,
        "online": _cmd_online,
        "report": _cmd_report,
        "verify": _cmd_verify,
    }[args.command]
    try:
        return handler(args)
    except (ConfigError, MissingArtifactError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PromdynError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
