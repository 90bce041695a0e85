"""Jump-diffusion road input shared by every vehicle in a trial."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from lti import Signal
from utils.validators import Validators

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class JdpParams:
    """Jump-diffusion parameters.

    Attributes:
        lam: Poisson jump rate per channel (jumps/s).
        mu_eta: Mean jump size, one entry per wheel track (m/s).
        sigma_eta: Jump-size covariance (m^2/s^2).
        sigma_zeta: Diffusion matrix; ``sigma_zeta @ sigma_zeta.T`` is the Wiener covariance.
        shared_arrivals: Both tracks jump at the same instants when True.
    """

    lam: float = 0.5
    mu_eta: np.ndarray = field(default_factory=lambda: np.array([-0.05, -0.05]))
    sigma_eta: np.ndarray = field(default_factory=lambda: np.diag([0.0004, 0.0004]))
    sigma_zeta: np.ndarray = field(default_factory=lambda: 0.01 * np.eye(2))
    shared_arrivals: bool = True

    def __post_init__(self):
        mu = np.asarray(self.mu_eta, dtype=float).reshape(-1)
        sig_eta = np.atleast_2d(np.asarray(self.sigma_eta, dtype=float))
        sig_zeta = np.atleast_2d(np.asarray(self.sigma_zeta, dtype=float))
        checks = [
            Validators.validate_non_negative("lambda", self.lam),
            Validators.validate_vector("mu_eta", mu, 2),
            Validators.validate_matrix("sigma_eta", sig_eta, (2, 2), psd=True),
            Validators.validate_matrix("sigma_zeta", sig_zeta, (2, 2)),
        ]
        problems = [msg for ok, msg in checks if not ok]
        if problems:
            raise ValueError("; ".join(problems))
        for name, value in (("mu_eta", mu), ("sigma_eta", sig_eta), ("sigma_zeta", sig_zeta)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def jump_mean_rate(self) -> np.ndarray:
        """lambda * mu_eta, the mean drift contributed by jumps."""
        return self.lam * self.mu_eta

    @property
    def sigma_bar(self) -> np.ndarray:
        """Total per-unit-time input covariance of jumps plus diffusion."""
        mu = self.mu_eta.reshape(-1, 1)
        return (self.sigma_zeta @ self.sigma_zeta.T
                + self.lam * (mu @ mu.T)
                + self.lam * self.sigma_eta)

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "mu_eta": self.mu_eta.tolist(),
            "sigma_eta": self.sigma_eta.tolist(),
            "sigma_zeta": self.sigma_zeta.tolist(),
            "shared_arrivals": self.shared_arrivals,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "JdpParams":
        return cls(lam=doc["lambda"],
                   mu_eta=np.array(doc["mu_eta"], dtype=float),
                   sigma_eta=np.array(doc["sigma_eta"], dtype=float),
                   sigma_zeta=np.array(doc["sigma_zeta"], dtype=float),
                   shared_arrivals=bool(doc.get("shared_arrivals", True)))


@dataclass(frozen=True, eq=False)
class RoadRealization:
    """One sampled road input w = [w_l, w_r] plus its provenance."""

    w: Signal
    seed: int
    params: JdpParams
    jump_counts: Tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.w.channels != 2:
            raise ValueError(f"road input must have 2 channels, got {self.w.channels}")


def n_samples_for(horizon: float, dt: float) -> int:
    """Samples covering [0, horizon] inclusive."""
    return int(round(horizon / dt)) + 1


def generate_road(params: JdpParams, horizon: float, dt: float, seed: int) -> RoadRealization:
    """Sample a jump-diffusion road velocity on a uniform grid.

    A jump of size J in step k becomes a one-sample pulse J/dt so that the
    integrated displacement carries the full jump. The diffusion part is a
    Wiener increment scaled by ``sigma_zeta`` and divided by dt.

    Args:
        params: Jump-diffusion parameters.
        horizon: Duration in seconds.
        dt: Sample period in seconds.
        seed: Seed for every random draw.

    Returns:
        RoadRealization with a 2-channel signal of ``round(horizon/dt) + 1`` samples.
    """
    for ok, msg in (Validators.validate_positive("horizon", horizon),
                    Validators.validate_positive("dt", dt)):
        if not ok:
            raise ValueError(msg)

    n = n_samples_for(horizon, dt)
    rng = np.random.default_rng(seed)

    if params.shared_arrivals:
        shared = rng.poisson(params.lam * dt, size=n)
        counts = np.vstack([shared, shared])
    else:
        counts = rng.poisson(params.lam * dt, size=(2, n))

    jumps = np.zeros((2, n))
    if params.shared_arrivals:
        steps = np.repeat(np.arange(n), counts[0])
        if steps.size:
            sizes = rng.multivariate_normal(params.mu_eta, params.sigma_eta,
                                            size=steps.size, method="eigh")
            np.add.at(jumps.T, steps, sizes)
    else:
        std = np.sqrt(np.diag(params.sigma_eta))
        for ch in range(2):
            steps = np.repeat(np.arange(n), counts[ch])
            if steps.size:
                sizes = rng.normal(params.mu_eta[ch], std[ch], size=steps.size)
                np.add.at(jumps[ch], steps, sizes)

    increments = rng.normal(0.0, np.sqrt(dt), size=(2, n))
    w = jumps / dt + (params.sigma_zeta @ increments) / dt

    total = (int(counts[0].sum()), int(counts[1].sum()))
    logger.debug("road seed %d: %d samples, jumps per channel %s", seed, n, total)
    return RoadRealization(Signal(w, dt), int(seed), params, total)


def road_profile(real: Union[RoadRealization, Signal]) -> Signal:
    """Displacement profile: cumulative trapezoidal integral of each velocity channel."""
    w = real.w if isinstance(real, RoadRealization) else real
    if w.n_samples < 2:
        return w.with_data(np.zeros_like(w.data))
    profile = cumulative_trapezoid(w.data, dx=w.dt, axis=1, initial=0.0)
    return w.with_data(profile)


def export_csv(real: RoadRealization, path: Path, profile: Optional[bool] = False) -> Path:
    """Write ``t, w_l, w_r`` (and the displacement columns when ``profile``) to CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = [real.w.times, real.w.data[0], real.w.data[1]]
    header = "t,w_l,w_r"
    if profile:
        disp = road_profile(real)
        columns += [disp.data[0], disp.data[1]]
        header += ",z_l,z_r"
    np.savetxt(path, np.column_stack(columns), delimiter=",", header=header, comments="")
    return path
