"""Relative error norms, speed-up, and per-variant aggregation."""

import math
from dataclasses import dataclass, field

import numpy as np


def relative_error(reference, candidate, denominator: str = "reference") -> float:
    """Relative Euclidean error between two response quantities.

    Multi-dimensional histories are flattened column-major so the norm runs
    over every DOF and time step. The default denominator is the reference
    energy sqrt(q_ref . q_ref); ``denominator="literal"`` uses the mixed inner
    product sqrt(q_ref . q_cand) instead and returns NaN when that product is
    negative.
    """
    q_ref = np.asarray(reference, dtype=float).flatten(order="F")
    q_cand = np.asarray(candidate, dtype=float).flatten(order="F")
    if q_ref.shape != q_cand.shape:
        raise ValueError(
            f"shape mismatch: reference {np.shape(reference)} vs candidate {np.shape(candidate)}"
        )
    num = float(np.linalg.norm(q_ref - q_cand))
    if denominator == "reference":
        den = float(np.linalg.norm(q_ref))
        if den == 0.0:
            raise ValueError("reference signal is identically zero")
    elif denominator == "literal":
        inner = float(q_ref @ q_cand)
        if inner < 0.0:
            return math.nan
        den = math.sqrt(inner)
        if den == 0.0:
            raise ValueError("literal denominator is zero")
    else:
        raise ValueError(f"unknown denominator mode {denominator!r}")
    return num / den


def speedup(hfm_wall_s: float, rom_wall_s: float) -> float:
    if hfm_wall_s <= 0.0 or rom_wall_s <= 0.0:
        raise ValueError("wall times must be positive")
    return hfm_wall_s / rom_wall_s


@dataclass
class ComparisonReport:
    """One ROM-vs-HFM evaluation at a query point."""

    query_point: tuple
    variant: str
    re_u: float
    re_rf: float | None = None
    re_sigma: float | None = None
    hfm_wall_s: float | None = None
    rom_wall_s: float | None = None
    speedup: float | None = None
    subdomain_index: int | None = None
    order: int | None = None
    total_elements: int | None = None
    mesh_elements: int | None = None
    extra: dict = field(default_factory=dict)


def aggregate(reports) -> dict:
    """Mean/max of each error metric per variant (NaN-safe, None-skipping)."""
    by_variant: dict = {}
    for rep in reports:
        by_variant.setdefault(rep.variant, []).append(rep)
    out = {}
    for variant, reps in sorted(by_variant.items()):
        row = {"count": len(reps)}
        for name in ("re_u", "re_rf", "re_sigma"):
            values = [getattr(r, name) for r in reps]
            values = [v for v in values if v is not None and not math.isnan(v)]
            row[f"mean_{name}"] = float(np.mean(values)) if values else math.nan
            row[f"max_{name}"] = float(np.max(values)) if values else math.nan
        speedups = [r.speedup for r in reps if r.speedup is not None]
        row["mean_speedup"] = float(np.mean(speedups)) if speedups else math.nan
        out[variant] = row
    return out
