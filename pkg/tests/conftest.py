"""Shared fixtures; the packages live under src/ and are imported top-level."""
import sys
from pathlib import Path

import numpy as np
import pytest

SRC = Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from estimator import solve_riccati  # noqa: E402
from lti import Signal  # noqa: E402
from road import JdpParams  # noqa: E402
from storage.config import WORKERS_ENV  # noqa: E402
from vehicle import VehicleInstance, VehicleParams, make_fleet  # noqa: E402


@pytest.fixture(autouse=True)
def _no_worker_override(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)


@pytest.fixture
def base_params():
    return VehicleParams()


@pytest.fixture
def exact_vehicle(base_params):
    """Vehicle whose model equals its plant."""
    return VehicleInstance.create(1, base_params, base_params)


@pytest.fixture
def road_params():
    return JdpParams()


@pytest.fixture
def driftless_params():
    """Jump-diffusion statistics without a mean jump."""
    return JdpParams(lam=0.5, mu_eta=np.zeros(2))


@pytest.fixture
def exact_design(exact_vehicle, road_params):
    return solve_riccati(exact_vehicle.model, road_params)


@pytest.fixture
def fleet_pair(base_params):
    return make_fleet(2, base_params, 0.1, 0.05, master_seed=7, trial=0)


def sine_signal(freqs, amplitude=0.05, horizon=6.0, dt=0.005):
    """Two-channel sum of sines, each starting at zero."""
    t = dt * np.arange(int(round(horizon / dt)) + 1)
    data = np.vstack([amplitude * np.sin(2 * np.pi * f * t) for f in freqs])
    return Signal(data, dt)


TINY_EXPERIMENT = """
[fleet]
vehicles = 2

[privacy]
n1 = 1
n2 = 1

[run]
trials = 2
master_seed = 5
dt = 0.005
horizon = 3.0
settle_time = 1.0
t_trim = 0.5
"""


@pytest.fixture
def tiny_config(tmp_path):
    """Two vehicles, two short trials: enough to drive the whole harness."""
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_EXPERIMENT)
    return path
