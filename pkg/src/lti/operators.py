"""Products of transfer matrices evaluated frequency by frequency.

Learning filters are chains such as ``S⁻¹ T T_prev⁻¹ S_prev``. Realizing the
chain symbolically compounds cancellation errors, so it is kept as a list of
factors and only multiplied out on a frequency grid.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from utils.errors import DimensionError
from .settings import analysis_grid
from .transfer import TransferMatrix

logger = logging.getLogger(__name__)

# relative singular-value level below which a regularized inverse kicks in
TIKHONOV_LEVEL = 1e-6
# reciprocal condition number treated as exactly singular
_SINGULAR_RCOND = 1e-15


@dataclass(frozen=True)
class Factor:
    """One link of a ResponseProduct.

    Attributes:
        system: Square or rectangular transfer matrix.
        inverted: Use the pointwise inverse of ``system``.
        regularized: For inverted factors, fall back to a Tikhonov inverse
            where the smallest singular value drops below
            ``TIKHONOV_LEVEL`` times the factor's peak norm.
    """

    system: TransferMatrix
    inverted: bool = False
    regularized: bool = False


class ResponseProduct:
    """``sign * F1 F2 ... Fk`` with optional inverted factors.

    Exposes ``p``, ``m`` and ``evaluate(s)`` so it can be passed anywhere a
    TransferMatrix response is expected (``apply_filter``, ``response_distance``).
    """

    def __init__(self, factors: Sequence[Factor], sign: float = 1.0,
                 reference_grid: Optional[np.ndarray] = None):
        if not factors:
            raise DimensionError("a product needs at least one factor")
        self.factors: Tuple[Factor, ...] = tuple(factors)
        self.sign = float(sign)
        shapes = [self._shape(f) for f in self.factors]
        for (_, left_m), (right_p, _) in zip(shapes, shapes[1:]):
            if left_m != right_p:
                raise DimensionError(f"cannot chain factors with shapes {shapes}")
        self.p = shapes[0][0]
        self.m = shapes[-1][1]
        grid = analysis_grid() if reference_grid is None else np.asarray(reference_grid)
        # peak norms fix the Tikhonov level independently of the evaluation grid
        self._scales = [
            float(np.max(np.linalg.norm(np.moveaxis(f.system.evaluate(1j * grid), 2, 0), ord=2, axis=(1, 2))))
            if f.inverted and f.regularized else 0.0
            for f in self.factors
        ]
        self.regularized_points: int = 0

    @staticmethod
    def _shape(f: Factor) -> Tuple[int, int]:
        p, m = f.system.shape
        if f.inverted:
            if p != m:
                raise DimensionError("only square factors can be inverted")
            return m, p
        return p, m

    @property
    def shape(self) -> Tuple[int, int]:
        return self.p, self.m

    def _inverse_values(self, f: Factor, scale: float, s: np.ndarray) -> np.ndarray:
        M = np.moveaxis(f.system.evaluate(s), 2, 0)
        sv = np.linalg.svd(M, compute_uv=False)
        smin, smax = sv[:, -1], sv[:, 0]
        n = M.shape[1]
        out = np.empty_like(M)

        if f.regularized:
            weak = smin < TIKHONOV_LEVEL * scale
        else:
            weak = np.zeros(s.size, dtype=bool)
        singular = ~weak & ((smax == 0) | (smin <= _SINGULAR_RCOND * smax))
        fine = ~weak & ~singular

        if np.any(fine):
            out[fine] = np.linalg.inv(M[fine])
        if np.any(singular):
            out[singular] = np.inf
        if np.any(weak):
            delta = (TIKHONOV_LEVEL * scale) ** 2
            Mw = M[weak]
            Mh = np.conj(np.swapaxes(Mw, 1, 2))
            out[weak] = Mh @ np.linalg.inv(Mw @ Mh + delta * np.eye(n))
            for k in np.flatnonzero(weak):
                logger.debug("regularized inverse at s=%s (sigma_min=%.3e)", s[k], smin[k])
            self.regularized_points += int(weak.sum())
            logger.warning("Tikhonov inverse used at %d of %d frequencies", int(weak.sum()), s.size)
        return out

    def evaluate(self, s) -> np.ndarray:
        """Response at complex points ``s`` as a (p, m, K) array."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        acc = None
        with np.errstate(invalid="ignore", over="ignore"):
            for f, scale in zip(self.factors, self._scales):
                if f.inverted:
                    vals = self._inverse_values(f, scale, s)
                else:
                    vals = np.moveaxis(f.system.evaluate(s), 2, 0)
                acc = vals if acc is None else acc @ vals
        return np.moveaxis(self.sign * acc, 0, 2)

    def exact(self) -> "ResponseProduct":
        """The same chain with every inverse taken exactly."""
        factors = [Factor(f.system, f.inverted) for f in self.factors]
        return ResponseProduct(factors, self.sign)

    def __matmul__(self, other) -> "ResponseProduct":
        """Chain with another product or a plain transfer matrix on the right."""
        if isinstance(other, ResponseProduct):
            return ResponseProduct(self.factors + other.factors, self.sign * other.sign)
        if isinstance(other, TransferMatrix):
            return ResponseProduct(self.factors + (Factor(other),), self.sign)
        return NotImplemented

    def __rmatmul__(self, other) -> "ResponseProduct":
        if isinstance(other, TransferMatrix):
            return ResponseProduct((Factor(other),) + self.factors, self.sign)
        return NotImplemented

    def __neg__(self) -> "ResponseProduct":
        out = ResponseProduct.__new__(ResponseProduct)
        out.__dict__.update(self.__dict__)
        out.sign = -self.sign
        out.regularized_points = 0
        return out

    def __repr__(self) -> str:
        parts = [("inv" if f.inverted else "") + f"{f.system.shape}" for f in self.factors]
        return f"ResponseProduct(sign={self.sign:+g}, factors=[{', '.join(parts)}])"
