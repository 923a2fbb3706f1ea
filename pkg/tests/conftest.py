import numpy as np
import pytest

from promdyn.excitation import sinusoid
from promdyn.model import build_shear_frame
from promdyn.newmark import IntegratorConfig, integrate
from promdyn.pod import SnapshotSet


def make_chain(stories=4, amplitude=1.0, z_max=0.02, stiffness=2.0e5,
               story_mass=1000.0, story_stiffness=8.0e5, damping_ratio=0.02,
               exponent=1.5):
    return build_shear_frame(
        stories=stories,
        story_mass=story_mass,
        story_stiffness=story_stiffness,
        damping_ratio=damping_ratio,
        link_params={
            "stiffness": stiffness,
            "amplitude": amplitude,
            "z_max": z_max,
            "exponent": exponent,
        },
    )


def top_sine_loads(stories, dt=0.01, steps=200, freq_hz=1.3, amplitude=4.0e4):
    pattern = np.zeros(stories)
    pattern[-1] = 1.0
    return sinusoid(freq_hz, amplitude, pattern, dt, steps)


def simulate_snapshot(model, loads, record_forces=True, point=(0.0,)):
    cfg = IntegratorConfig(dt=loads.dt)
    hist = integrate(model, loads, cfg, record_element_forces=record_forces)
    return SnapshotSet(
        parameter_point=np.asarray(point, dtype=float),
        displacements=hist.displacements.T.copy(),
        dt=loads.dt,
        element_forces=hist.element_forces,
    ), hist


@pytest.fixture
def chain4():
    return make_chain(stories=4)
