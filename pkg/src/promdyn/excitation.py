"""Deterministic load histories: sinusoidal nodal loads and synthetic quakes.

A synthetic quake is seeded Gaussian white noise pushed through a 4th-order
zero-phase Butterworth low-pass, normalized to unit variance, scaled to the
requested amplitude, and applied as ground acceleration, i.e. a nodal force
-m_i * a_g(t) on every excited DOF. The record is zero after the excitation
window while the simulation keeps running.
"""

import hashlib
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np
import scipy.signal


@dataclass(frozen=True)
class LoadHistory:
    """Sampled nodal loads: row k holds f(t_k) with t_k = k*dt."""

    dt: float
    samples: np.ndarray  # (T, n)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2:
            raise ValueError(f"samples must be 2-D (T, n), got shape {samples.shape}")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if not np.all(np.isfinite(samples)):
            raise ValueError("load samples must be finite")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "provenance", MappingProxyType(dict(self.provenance)))

    @property
    def steps(self) -> int:
        return self.samples.shape[0]

    @property
    def ndof(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return (self.steps - 1) * self.dt


@dataclass(frozen=True)
class QuakeParams:
    cutoff_hz: float
    amplitude: float
    duration_s: float
    total_sim_s: float
    seed: int

    def __post_init__(self):
        if self.cutoff_hz <= 0.0:
            raise ValueError("cutoff frequency must be positive")
        if self.amplitude <= 0.0:
            raise ValueError("amplitude must be positive")
        if self.duration_s <= 0.0:
            raise ValueError("excitation duration must be positive")
        if self.total_sim_s < self.duration_s:
            raise ValueError("total simulation time must cover the excitation window")


def sinusoid(freq_hz: float, amplitude: float, dof_pattern, dt: float, steps: int) -> LoadHistory:
    """Sinusoidal nodal load f_i(t_k) = pattern_i * amplitude * sin(2*pi*f*t_k)."""
    if freq_hz <= 0.0:
        raise ValueError("frequency must be positive")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    nyquist = 0.5 / dt
    if freq_hz >= nyquist:
        raise ValueError(
            f"frequency {freq_hz} Hz is not resolvable at dt={dt} (Nyquist {nyquist} Hz)"
        )
    if steps < 1:
        raise ValueError("need at least one sample")
    pattern = np.asarray(dof_pattern, dtype=float)
    if pattern.ndim != 1:
        raise ValueError("dof_pattern must be a vector")
    t = np.arange(steps) * dt
    samples = np.outer(amplitude * np.sin(2.0 * np.pi * freq_hz * t), pattern)
    return LoadHistory(
        dt=dt,
        samples=samples,
        provenance={"kind": "sinusoid", "freq_hz": freq_hz, "amplitude": amplitude},
    )


def filtered_noise_quake(params: QuakeParams, mass_diag, dt: float, excited_dofs=None) -> LoadHistory:
    """Synthetic ground-motion loads, deterministic for a given seed."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    nyquist = 0.5 / dt
    if params.cutoff_hz >= nyquist:
        raise ValueError(
            f"cutoff {params.cutoff_hz} Hz is not resolvable at dt={dt} (Nyquist {nyquist} Hz)"
        )
    mass_diag = np.asarray(mass_diag, dtype=float)
    if mass_diag.ndim != 1 or np.any(mass_diag <= 0.0):
        raise ValueError("mass_diag must be a vector of positive masses")
    n = len(mass_diag)
    # inclusive time grid t = 0 .. total_sim_s, matching the sinusoid path
    steps_total = int(round(params.total_sim_s / dt)) + 1
    steps_exc = int(round(params.duration_s / dt))
    if steps_exc < 16:
        raise ValueError("excitation window too short for the low-pass filter")

    rng = np.random.default_rng(params.seed)
    noise = rng.standard_normal(steps_exc)
    sos = scipy.signal.butter(4, params.cutoff_hz, btype="low", fs=1.0 / dt, output="sos")
    accel = scipy.signal.sosfiltfilt(sos, noise)  # forward-backward, zero phase
    std = accel.std()
    if std == 0.0:
        raise ValueError("filtered noise degenerated to a constant record")
    accel = accel / std * params.amplitude

    if excited_dofs is None:
        excited_dofs = np.arange(n)
    excited_dofs = np.asarray(excited_dofs, dtype=int)
    samples = np.zeros((steps_total, n))
    samples[:steps_exc, excited_dofs] = -np.outer(accel, mass_diag[excited_dofs])
    return LoadHistory(
        dt=dt,
        samples=samples,
        provenance={
            "kind": "filtered_noise_quake",
            "seed": params.seed,
            "cutoff_hz": params.cutoff_hz,
            "amplitude": params.amplitude,
            "duration_s": params.duration_s,
        },
    )


def derive_seed(master_seed: int, index) -> int:
    """Stable per-sample seed hashed from (master seed, sample identifier)."""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little") & 0x7FFFFFFFFFFFFFFF
