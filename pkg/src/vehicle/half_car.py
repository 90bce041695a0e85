"""Reduced front half-car model and heterogeneous fleets."""
import logging
from dataclasses import dataclass, fields, replace
from typing import List

import numpy as np
from scipy import stats

from lti import StateSpace
from utils.seeding import FLEET, MODEL, derive_seed

logger = logging.getLogger(__name__)

_TRUNCATION = 3.0


@dataclass(frozen=True)
class VehicleParams:
    """Physical half-car parameters.

    Attributes:
        m_b: Sprung mass (kg).
        I_x: Roll moment of inertia (kg m^2).
        k_s: Suspension stiffness (N/m).
        c_s: Suspension damping (N s/m).
        L1: Left tip to centre of gravity (m).
        L2: Right tip to centre of gravity (m).
    """

    m_b: float = 700.0
    I_x: float = 500.0
    k_s: float = 30000.0
    c_s: float = 2500.0
    L1: float = 0.75
    L2: float = 0.75

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{f.name} must be strictly positive, got {value}")
            object.__setattr__(self, f.name, value)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def build_half_car(p: VehicleParams) -> StateSpace:
    """State-space half-car with x = [q1, q2, z', theta'], w = [w_l, w_r], y = [z1'', z2''].

    The suspension velocities in the heave and roll equations are substituted
    from the first two state equations, so damping couples the road input
    straight into the accelerations (non-zero D).
    """
    m, I, k, c, L1, L2 = p.m_b, p.I_x, p.k_s, p.c_s, p.L1, p.L2

    # x1' and x2' rows
    A = np.zeros((4, 4))
    B = np.zeros((4, 2))
    A[0] = [0.0, 0.0, 1.0, L1]
    B[0] = [-1.0, 0.0]
    A[1] = [0.0, 0.0, 1.0, -L2]
    B[1] = [0.0, -1.0]

    # m x3' = -k x1 - c x1' - k x2 - c x2'
    A[2] = (np.array([-k, -k, 0.0, 0.0]) - c * A[0] - c * A[1]) / m
    B[2] = (-c * B[0] - c * B[1]) / m

    # (1/2) I x4' = -L1 k x1 - L1 c x1' + L2 k x2 + L2 c x2'
    A[3] = (np.array([-L1 * k, L2 * k, 0.0, 0.0]) - L1 * c * A[0] + L2 * c * A[1]) / (0.5 * I)
    B[3] = (-L1 * c * B[0] + L2 * c * B[1]) / (0.5 * I)

    # y1 = x3' + L1 x4', y2 = x3' - L2 x4'
    C = np.vstack([A[2] + L1 * A[3], A[2] - L2 * A[3]])
    D = np.vstack([B[2] + L1 * B[3], B[2] - L2 * B[3]])
    return StateSpace(A, B, C, D)


def perturb_params(p: VehicleParams, rel_sigma: float, rng_seed: int) -> VehicleParams:
    """Multiply every parameter by an independent unit-mean random factor.

    Factors are normal with standard deviation ``rel_sigma``, truncated at
    three standard deviations (rescaled so the truncated spread is exact).
    """
    if not 0.0 <= rel_sigma < 0.3:
        raise ValueError(f"rel_sigma must lie in [0, 0.3), got {rel_sigma}")
    if rel_sigma == 0.0:
        return replace(p)
    dist = stats.truncnorm(-_TRUNCATION, _TRUNCATION)
    rng = np.random.default_rng(rng_seed)
    names = [f.name for f in fields(p)]
    draws = dist.rvs(size=len(names), random_state=rng) / dist.std()
    values = {name: getattr(p, name) * (1.0 + rel_sigma * z) for name, z in zip(names, draws)}
    return VehicleParams(**values)


@dataclass(frozen=True, eq=False)
class VehicleInstance:
    """One fleet member: true plant and its own imperfect model of itself."""

    id: int
    true_params: VehicleParams
    model_params: VehicleParams
    plant: StateSpace
    model: StateSpace

    @classmethod
    def create(cls, vehicle_id: int, true_params: VehicleParams,
               model_params: VehicleParams) -> "VehicleInstance":
        return cls(vehicle_id, true_params, model_params,
                   build_half_car(true_params), build_half_car(model_params))


def make_fleet(size: int, base: VehicleParams, rel_sigma_fleet: float,
               rel_sigma_model: float, master_seed: int, trial: int = 0) -> List[VehicleInstance]:
    """Heterogeneous fleet for one trial.

    Each vehicle's true parameters scatter around ``base``; its model
    parameters scatter around its own true parameters.
    """
    fleet = []
    for j in range(1, size + 1):
        true_p = perturb_params(base, rel_sigma_fleet, derive_seed(master_seed, trial, j, FLEET))
        model_p = perturb_params(true_p, rel_sigma_model, derive_seed(master_seed, trial, j, MODEL))
        fleet.append(VehicleInstance.create(j, true_p, model_p))
    logger.debug("trial %d: built fleet of %d vehicles", trial, size)
    return fleet
