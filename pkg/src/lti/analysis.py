"""Frequency-domain comparisons of systems."""
from typing import Optional, Union

import numpy as np

from utils.errors import DimensionError
from .settings import analysis_grid
from .signal import FrequencyResponse
from .statespace import StateSpace
from .transfer import TransferMatrix

System = Union[TransferMatrix, StateSpace]


def frequency_response(G: System, omegas: Optional[np.ndarray] = None) -> FrequencyResponse:
    """Sample ``G(jω)`` on a grid (the analysis grid by default)."""
    omegas = analysis_grid() if omegas is None else np.asarray(omegas, dtype=float)
    return FrequencyResponse(omegas, G.evaluate(1j * omegas))


def _values(G, omegas: np.ndarray) -> np.ndarray:
    if isinstance(G, FrequencyResponse):
        return G.values
    return frequency_response(G, omegas).values


def response_distance(G, H, omegas: Optional[np.ndarray] = None) -> float:
    """Worst-case Frobenius distance of two responses over a grid.

    Normalized by ``max(1, max ||G(jω)||_F)``. Either argument may also be a
    precomputed FrequencyResponse on the same grid.
    """
    omegas = analysis_grid() if omegas is None else np.asarray(omegas, dtype=float)
    g = _values(G, omegas)
    h = _values(H, omegas)
    if g.shape != h.shape:
        raise DimensionError(f"response shapes differ: {g.shape} vs {h.shape}")
    diff = np.sqrt(np.sum(np.abs(g - h) ** 2, axis=(0, 1)))
    scale = max(1.0, float(np.max(np.sqrt(np.sum(np.abs(g) ** 2, axis=(0, 1))))))
    return float(np.max(diff) / scale)

