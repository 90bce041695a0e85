"""Validation utilities."""
from typing import Tuple, Optional, Sequence
import numpy as np


class Validators:
    """Collection of validation utilities.

    Every check returns ``(is_valid, error_message)``; callers decide whether a
    failure is fatal.
    """

    @staticmethod
    def validate_positive(name: str, value) -> Tuple[bool, Optional[str]]:
        """Check that a scalar is finite and strictly positive."""
        try:
            v = float(value)
        except (TypeError, ValueError):
            return False, f"{name} must be a number"
        if not np.isfinite(v) or v <= 0:
            return False, f"{name} must be strictly positive"
        return True, None

    @staticmethod
    def validate_non_negative(name: str, value) -> Tuple[bool, Optional[str]]:
        """Check that a scalar is finite and not negative."""
        try:
            v = float(value)
        except (TypeError, ValueError):
            return False, f"{name} must be a number"
        if not np.isfinite(v) or v < 0:
            return False, f"{name} must be non-negative"
        return True, None

    @staticmethod
    def validate_range(name: str, value, low: float, high: float,
                       low_open: bool = False,
                       high_open: bool = False) -> Tuple[bool, Optional[str]]:
        """Check that ``value`` lies in the given interval."""
        try:
            v = float(value)
        except (TypeError, ValueError):
            return False, f"{name} must be a number"
        below = v <= low if low_open else v < low
        above = v >= high if high_open else v > high
        if not np.isfinite(v) or below or above:
            left = "(" if low_open else "["
            right = ")" if high_open else "]"
            return False, f"{name} must lie in {left}{low}, {high}{right}"
        return True, None

    @staticmethod
    def validate_min_int(name: str, value, minimum: int) -> Tuple[bool, Optional[str]]:
        """Check that ``value`` is an integer no smaller than ``minimum``."""
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            return False, f"{name} must be an integer"
        if value < minimum:
            return False, f"{name} must be at least {minimum}"
        return True, None

    @staticmethod
    def validate_gamma(value) -> Tuple[bool, Optional[str]]:
        """Input-observer gain must exceed one half."""
        try:
            v = float(value)
        except (TypeError, ValueError):
            return False, "gamma must be a number"
        if not np.isfinite(v) or v <= 0.5:
            return False, "gamma must exceed 0.5"
        return True, None

    @staticmethod
    def validate_matrix(name: str, value, shape: Tuple[int, int],
                        psd: bool = False) -> Tuple[bool, Optional[str]]:
        """Check a matrix literal for shape, finiteness and optionally PSD-ness."""
        try:
            m = np.asarray(value, dtype=float)
        except (TypeError, ValueError):
            return False, f"{name} must be a numeric matrix"
        if m.shape != shape:
            return False, f"{name} must have shape {shape}, got {m.shape}"
        if not np.all(np.isfinite(m)):
            return False, f"{name} must be finite"
        if psd:
            sym = 0.5 * (m + m.T)
            if np.min(np.linalg.eigvalsh(sym)) < -1e-12 * max(1.0, np.abs(sym).max()):
                return False, f"{name} must be positive semi-definite (negative variances)"
        return True, None

    @staticmethod
    def validate_vector(name: str, value, length: int) -> Tuple[bool, Optional[str]]:
        """Check a vector literal for length and finiteness."""
        try:
            v = np.asarray(value, dtype=float)
        except (TypeError, ValueError):
            return False, f"{name} must be a numeric vector"
        if v.shape != (length,):
            return False, f"{name} must have length {length}"
        if not np.all(np.isfinite(v)):
            return False, f"{name} must be finite"
        return True, None

    @staticmethod
    def validate_left_half_band(name: str, band: Sequence[float]) -> Tuple[bool, Optional[str]]:
        """A real-part band must be ordered and strictly inside the left half plane."""
        try:
            lo, hi = (float(b) for b in band)
        except (TypeError, ValueError):
            return False, f"{name} must be a pair of numbers"
        if not lo < hi:
            return False, f"{name} must be an increasing pair"
        if hi >= 0:
            return False, f"{name} must lie in the open left half plane"
        return True, None

    @staticmethod
    def validate_band(name: str, band: Sequence[float]) -> Tuple[bool, Optional[str]]:
        """Check an ordered pair of finite numbers."""
        try:
            lo, hi = (float(b) for b in band)
        except (TypeError, ValueError):
            return False, f"{name} must be a pair of numbers"
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
            return False, f"{name} must be an ordered pair"
        return True, None
