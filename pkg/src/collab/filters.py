"""Optimal learning filters between consecutive vehicles."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lti import (
    Factor,
    ResponseProduct,
    Signal,
    TransferMatrix,
    analysis_grid,
    filter_periodic,
    check_invertible,
)
from utils.errors import ConditioningError, SingularityError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LearningFilters:
    """L1 acts on the predecessor's learning signal, L2 on its mismatch.

    Both are kept as factor chains and evaluated per frequency; ``exact()``
    drops the Tikhonov fallback.
    """

    L1: ResponseProduct
    L2: ResponseProduct

    @property
    def regularized_points(self) -> int:
        return self.L1.regularized_points + self.L2.regularized_points


@dataclass(frozen=True)
class FilterResiduals:
    """Normalized grid residuals of both optimality conditions."""

    road_term: float
    learning_term: float

    def within(self, tol: float) -> bool:
        return self.road_term <= tol and self.learning_term <= tol


def build_filters(T_prev: TransferMatrix, S_prev: TransferMatrix, T_own: TransferMatrix,
                  S_own: TransferMatrix, regularize: bool = True,
                  omegas: Optional[np.ndarray] = None) -> LearningFilters:
    """L1 = S⁻¹ T T_prev⁻¹ S_prev and L2 = -S⁻¹ T T_prev⁻¹.

    Args:
        T_prev: Predecessor's (possibly obfuscated) road sensitivity.
        S_prev: Predecessor's (possibly obfuscated) learning sensitivity.
        T_own: Own road sensitivity.
        S_own: Own learning sensitivity.
        regularize: Allow a Tikhonov inverse of ``T_prev`` where it is nearly
            singular; otherwise near-singularity is a ConditioningError.
        omegas: Grid for the invertibility checks.

    Raises:
        ConditioningError: ``S_own`` singular, or ``T_prev`` singular with
            regularization disabled.
    """
    try:
        check_invertible(S_own, omegas)
    except SingularityError as exc:
        raise ConditioningError(f"own learning sensitivity is singular: {exc}", omega=exc.omega) from exc
    try:
        check_invertible(T_prev, omegas)
    except SingularityError as exc:
        if not regularize:
            raise ConditioningError(f"predecessor road sensitivity is singular: {exc}",
                                    omega=exc.omega) from exc
        logger.warning("predecessor road sensitivity nearly singular (%s); using Tikhonov inverse", exc)

    head = [Factor(S_own, inverted=True), Factor(T_own), Factor(T_prev, inverted=True, regularized=regularize)]
    L1 = ResponseProduct(head + [Factor(S_prev)])
    L2 = ResponseProduct(head, sign=-1.0)
    return LearningFilters(L1, L2)


def _values(op, omegas: np.ndarray) -> np.ndarray:
    return np.moveaxis(op.evaluate(1j * omegas), 2, 0)


def filter_residuals(filters: LearningFilters, T_prev: TransferMatrix, S_prev: TransferMatrix,
                     T_own: TransferMatrix, S_own: TransferMatrix,
                     omegas: Optional[np.ndarray] = None) -> FilterResiduals:
    """Residuals of ``T - S L1 S_prev⁻¹ T_prev = 0`` and ``S L2 + S L1 S_prev⁻¹ = 0``.

    Each is the worst Frobenius norm on the grid divided by the peak norm of
    the corresponding operand (``T_own`` and ``S L1 S_prev⁻¹``).
    """
    omegas = analysis_grid() if omegas is None else np.asarray(omegas)
    inv_S_prev = ResponseProduct([Factor(S_prev, inverted=True)])
    propagated = _values(S_own @ filters.L1 @ inv_S_prev, omegas)
    road = _values(T_own, omegas) - propagated @ _values(T_prev, omegas)
    learning = _values(S_own @ filters.L2, omegas) + propagated

    def norm(x):
        return np.sqrt(np.sum(np.abs(x) ** 2, axis=(1, 2)))

    road_scale = max(float(np.max(norm(_values(T_own, omegas)))), np.finfo(float).tiny)
    learning_scale = max(float(np.max(norm(propagated))), np.finfo(float).tiny)
    return FilterResiduals(float(np.max(norm(road))) / road_scale,
                           float(np.max(norm(learning))) / learning_scale)


def update_learning_signal(filters: LearningFilters, w_f_prev: Signal, e_prev: Signal,
                           n_samples: Optional[int] = None) -> Signal:
    """w_f = L1 w_f_prev + L2 e_prev on the relay grid of the inputs.

    Both filters contain the inverse of the own learning sensitivity, which
    vanishes at DC, so the zero-frequency bin is left out. The result is cut
    to the first ``n_samples`` samples when given.
    """
    w_f = (filter_periodic(filters.L1, w_f_prev, exclude_dc=True)
           + filter_periodic(filters.L2, e_prev, exclude_dc=True))
    return w_f if n_samples is None else w_f.head(n_samples)
