"""Estimation error measures."""
from typing import Optional

import numpy as np

from lti import Signal
from road import road_profile
from utils.errors import DimensionError

VELOCITY = "velocity"
PROFILE = "profile"


def mse(w_hat: Signal, w_true: Signal, space: str = PROFILE, t_trim: float = 0.0,
        t_end: Optional[float] = None) -> float:
    """Mean over channels and samples of the squared estimation error.

    In profile space both signals are integrated from their first sample
    before the window ``[t_trim, t_end)`` is cut out.
    """
    if not w_hat.compatible_with(w_true):
        raise DimensionError("estimate and truth must have matching shape and dt")
    if space == PROFILE:
        w_hat, w_true = road_profile(w_hat), road_profile(w_true)
    elif space != VELOCITY:
        raise ValueError(f"space must be '{VELOCITY}' or '{PROFILE}', got {space!r}")
    err = (w_hat - w_true).window(t_trim, t_end)
    return float(np.mean(err.data ** 2))
