"""Sampled multi-channel signals and frequency responses."""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from utils.errors import DimensionError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled time series over one road-segment traversal.

    Attributes:
        data: Array of shape (channels, N).
        dt: Sample period in seconds.
        t0: Start time in seconds.
    """

    data: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[np.newaxis, :]
        if data.ndim != 2 or data.shape[1] < 1:
            raise DimensionError(f"signal data must be channels x N with N >= 1, got {data.shape}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not np.all(np.isfinite(data)):
            raise ValueError("signal contains non-finite samples")
        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "t0", float(self.t0))

    @classmethod
    def zeros(cls, channels: int, n_samples: int, dt: float, t0: float = 0.0) -> "Signal":
        return cls(np.zeros((channels, n_samples)), dt, t0)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    @property
    def duration(self) -> float:
        return self.dt * self.n_samples

    def compatible_with(self, other: "Signal") -> bool:
        return (self.channels == other.channels
                and self.n_samples == other.n_samples
                and np.isclose(self.dt, other.dt, rtol=1e-12, atol=0.0))

    def _check(self, other: "Signal"):
        if not self.compatible_with(other):
            raise DimensionError(
                f"signals not composable: {self.channels}x{self.n_samples}@{self.dt} "
                f"vs {other.channels}x{other.n_samples}@{other.dt}"
            )

    def with_data(self, data: np.ndarray) -> "Signal":
        return Signal(data, self.dt, self.t0)

    def __add__(self, other: "Signal") -> "Signal":
        self._check(other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other: "Signal") -> "Signal":
        self._check(other)
        return self.with_data(self.data - other.data)

    def __neg__(self) -> "Signal":
        return self.with_data(-self.data)

    def __mul__(self, scalar: Union[int, float]) -> "Signal":
        return self.with_data(float(scalar) * self.data)

    __rmul__ = __mul__

    def norm(self) -> float:
        """L2 norm over all channels and samples."""
        return float(np.linalg.norm(self.data))

    def relative_distance(self, reference: "Signal") -> float:
        """Relative L2 distance ``||self - reference|| / ||reference||``."""
        self._check(reference)
        ref = reference.norm()
        diff = float(np.linalg.norm(self.data - reference.data))
        if ref == 0.0:
            return diff
        return diff / ref

    def masked_before(self, t_trim: float) -> "Signal":
        """Copy with every sample earlier than ``t0 + t_trim`` set to zero."""
        data = np.array(self.data)
        k = int(np.ceil(t_trim / self.dt - 1e-9)) if t_trim > 0 else 0
        data[:, :min(k, self.n_samples)] = 0.0
        return self.with_data(data)

    def padded_to(self, n_samples: int) -> "Signal":
        """Copy extended with trailing zeros to ``n_samples``."""
        if n_samples < self.n_samples:
            raise DimensionError(f"cannot pad {self.n_samples} samples down to {n_samples}")
        data = np.zeros((self.channels, n_samples))
        data[:, :self.n_samples] = self.data
        return self.with_data(data)

    def head(self, n_samples: int) -> "Signal":
        """The first ``n_samples`` samples."""
        if not 1 <= n_samples <= self.n_samples:
            raise DimensionError(f"cannot take {n_samples} of {self.n_samples} samples")
        return self.with_data(self.data[:, :n_samples])

    def window(self, start: float, stop: Optional[float] = None) -> "Signal":
        """Samples with ``start <= t - t0 < stop`` (to the end when ``stop`` is None)."""
        first = int(np.ceil(start / self.dt - 1e-9)) if start > 0 else 0
        last = self.n_samples if stop is None else int(np.ceil(stop / self.dt - 1e-9))
        first = min(first, self.n_samples - 1)
        last = max(first + 1, min(last, self.n_samples))
        return Signal(self.data[:, first:last], self.dt, self.t0 + first * self.dt)


@dataclass(frozen=True, eq=False)
class FrequencyResponse:
    """Samples of a p x m response on ω >= 0 (conjugate symmetry implied)."""

    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if omegas.ndim != 1 or omegas.size < 2:
            raise DimensionError("frequency grid needs at least two points")
        if np.any(omegas < 0) or np.any(np.diff(omegas) <= 0):
            raise ValueError("frequency grid must be non-negative and strictly increasing")
        if values.ndim != 3 or values.shape[2] != omegas.size:
            raise DimensionError(f"values must be p x m x K, got {values.shape}")
        object.__setattr__(self, "omegas", _frozen(omegas))
        object.__setattr__(self, "values", _frozen(values))

    @property
    def shape(self):
        return self.values.shape[:2]

    def peak_gain(self) -> float:
        """Largest spectral norm over the grid."""
        mats = np.moveaxis(self.values, 2, 0)
        return float(np.max(np.linalg.norm(mats, ord=2, axis=(1, 2))))
