"""Numerical defaults for the LTI machinery."""
import numpy as np

# Hurwitz margin: max Re(eig) must be below -EPS_STAB.
EPS_STAB = 1e-9

# Zero/pole pairs closer than this (relative to magnitude) are cancelled.
CANCEL_TOL = 1e-7

# Default integration step in seconds.
DEFAULT_DT = 1e-3

# Analysis grid.
GRID_POINTS = 512
GRID_MIN = 1e-2
GRID_MAX = 1e3

# tf_inverse rejects when min|det| < ratio * max|det| over the grid.
DET_SINGULAR_RATIO = 1e-10

# apply_filter rejects responses larger than this.
AMPLIFICATION_GUARD = 1e8

# simulate aborts when any state magnitude exceeds this.
OVERFLOW_GUARD = 1e12


def analysis_grid(points: int = GRID_POINTS, low: float = GRID_MIN,
                  high: float = GRID_MAX) -> np.ndarray:
    """Log-spaced angular frequencies (rad/s) used for analysis."""
    return np.logspace(np.log10(low), np.log10(high), points)
