"""Numerical checks that obfuscation leaves accuracy intact but hides dynamics."""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from collab.metrics import mse
from lti import Factor, ResponseProduct, Signal, TransferMatrix, analysis_grid, response_distance
from utils.errors import DimensionError
from .message import ObfuscatorFamily, RelayMessage
from .obfuscator import Obfuscator

logger = logging.getLogger(__name__)

ACCURACY_TOL = 1e-4
FILTER_TOL = 1e-6


def _or_identity(psi, size: int = 2):
    return TransferMatrix.identity(size) if psi is None else psi


def accuracy_preserving(family: ObfuscatorFamily, omegas: Optional[np.ndarray] = None,
                        tol: float = FILTER_TOL) -> bool:
    """Whether a general family reduces to the accuracy-preserving form.

    That form has ``T1 = e = S1``, ``T2 = I`` and ``w = S2^-1``, compared
    response-wise on the grid.
    """
    omegas = analysis_grid() if omegas is None else np.asarray(omegas)
    eye = TransferMatrix.identity(2)
    s1 = _or_identity(family.psi_s1)
    checks = {
        "psi_t1 == psi_s1": response_distance(_or_identity(family.psi_t1), s1, omegas),
        "psi_e == psi_s1": response_distance(_or_identity(family.psi_e), s1, omegas),
        "psi_t2 == I": response_distance(_or_identity(family.psi_t2), eye, omegas),
        "psi_w psi_s2 == I": response_distance(
            ResponseProduct([Factor(_or_identity(family.psi_w)), Factor(_or_identity(family.psi_s2))]),
            eye, omegas),
    }
    failed = [name for name, dist in checks.items() if dist > tol]
    if failed:
        logger.debug("family is not accuracy preserving: %s", ", ".join(failed))
    return not failed


def reshaping_distance(plain: Signal, obfuscated: Signal) -> float:
    """Relative L2 distance of an obfuscated signal from its plaintext."""
    return obfuscated.relative_distance(plain)


def construct_alternative_explanation(msg: RelayMessage, T_bar: TransferMatrix, S_bar: TransferMatrix,
                                      T: TransferMatrix, S: TransferMatrix,
                                      obf: Obfuscator) -> Tuple[ResponseProduct, ResponseProduct]:
    """Obfuscators under which other dynamics produce the same message.

    Given the sender's true ``T, S`` and obfuscator, returns
    ``Psi1_bar = Psi1 T T_bar^-1`` and ``Psi2_bar = S_bar^-1 T_bar T^-1 S Psi2`` so
    that ``Psi1_bar T_bar`` and ``Psi1_bar S_bar Psi2_bar`` reproduce
    ``msg.T_tilde`` and ``msg.S_tilde``.
    """
    if T_bar.shape != msg.T_tilde.shape or S_bar.shape != msg.S_tilde.shape:
        raise DimensionError("alternative dynamics must match the message shapes")
    psi1_bar = ResponseProduct([Factor(obf.psi_s1), Factor(T), Factor(T_bar, inverted=True)])
    psi2_bar = ResponseProduct([Factor(S_bar, inverted=True), Factor(T_bar), Factor(T, inverted=True),
                                Factor(S), Factor(obf.psi_s2)])
    return psi1_bar, psi2_bar


def explanation_residuals(msg: RelayMessage, T_bar: TransferMatrix, S_bar: TransferMatrix,
                          psi1_bar: ResponseProduct, psi2_bar: ResponseProduct,
                          omegas: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """Response distances of the alternative explanation from the intercepted pair."""
    road = response_distance(msg.T_tilde, psi1_bar @ T_bar, omegas)
    learning = response_distance(msg.S_tilde, psi1_bar @ S_bar @ psi2_bar, omegas)
    return road, learning


@dataclass(frozen=True)
class VehicleComparison:
    """Plain against obfuscated outcome of one vehicle."""

    vehicle_id: int
    w_f_distance: float
    w_hat_distance: float
    mse_distance: float
    L1_identity: float = 0.0
    L2_identity: float = 0.0


@dataclass(frozen=True)
class AccuracyReport:
    """Per-vehicle comparison of a plain and an obfuscated chain."""

    vehicles: List[VehicleComparison] = field(default_factory=list)
    tol: float = ACCURACY_TOL
    filter_tol: float = FILTER_TOL

    @property
    def signals_pass(self) -> bool:
        return all(max(v.w_f_distance, v.w_hat_distance, v.mse_distance) <= self.tol
                   for v in self.vehicles)

    @property
    def filters_pass(self) -> bool:
        return all(max(v.L1_identity, v.L2_identity) <= self.filter_tol for v in self.vehicles)

    @property
    def passed(self) -> bool:
        return self.signals_pass and self.filters_pass

    @property
    def worst_signal_distance(self) -> float:
        return max((max(v.w_f_distance, v.w_hat_distance) for v in self.vehicles), default=0.0)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        worst_filter = max((max(v.L1_identity, v.L2_identity) for v in self.vehicles), default=0.0)
        return (f"{status}: {len(self.vehicles)} vehicles, worst signal distance "
                f"{self.worst_signal_distance:.2e} (tol {self.tol:g}), worst filter identity "
                f"{worst_filter:.2e} (tol {self.filter_tol:g})")


def _filter_identities(plain, obfuscated, prev_obf: Optional[Obfuscator],
                       omegas: np.ndarray) -> Tuple[float, float]:
    if plain.filters is None or obfuscated.filters is None:
        return 0.0, 0.0
    L1, L2 = plain.filters.L1.exact(), plain.filters.L2.exact()
    if prev_obf is not None and not prev_obf.is_identity:
        L1 = L1 @ ResponseProduct([Factor(prev_obf.psi_s2)])
        L2 = L2 @ ResponseProduct([Factor(prev_obf.psi_s1, inverted=True)])
    return (response_distance(obfuscated.filters.L1.exact(), L1, omegas),
            response_distance(obfuscated.filters.L2.exact(), L2, omegas))


def verify_accuracy_preservation(plain_chain: Sequence, obfuscated_chain: Sequence, w_true: Signal,
                                 tol: float = ACCURACY_TOL, filter_tol: float = FILTER_TOL,
                                 t_trim: float = 0.0, t_end: Optional[float] = None,
                                 omegas: Optional[np.ndarray] = None) -> AccuracyReport:
    """Compare two chains run on identical seeds, one with obfuscators.

    Args:
        plain_chain: Sessions of the chain without obfuscation.
        obfuscated_chain: Sessions of the same chain with obfuscation.
        w_true: The road both chains drove over (for the MSE comparison).
        tol: Bound on relative signal and MSE distances.
        filter_tol: Bound on the learning-filter identities.
        t_trim: Start of the MSE window.
        t_end: End of the MSE window.
        omegas: Grid for the filter identities.
    """
    if len(plain_chain) != len(obfuscated_chain):
        raise DimensionError("chains must have the same length")
    omegas = analysis_grid() if omegas is None else np.asarray(omegas)
    rows: List[VehicleComparison] = []
    prev_obf = None
    for plain, obfuscated in zip(plain_chain, obfuscated_chain):
        mse_plain = mse(plain.w_hat, w_true, t_trim=t_trim, t_end=t_end)
        mse_obf = mse(obfuscated.w_hat, w_true, t_trim=t_trim, t_end=t_end)
        l1, l2 = _filter_identities(plain, obfuscated, prev_obf, omegas)
        rows.append(VehicleComparison(
            vehicle_id=plain.vehicle.id,
            w_f_distance=obfuscated.w_f.relative_distance(plain.w_f),
            w_hat_distance=obfuscated.w_hat.relative_distance(plain.w_hat),
            mse_distance=abs(mse_obf - mse_plain) / max(mse_plain, np.finfo(float).tiny),
            L1_identity=l1,
            L2_identity=l2,
        ))
        prev_obf = obfuscated.obfuscator
    report = AccuracyReport(rows, tol, filter_tol)
    log = logger.info if report.passed else logger.warning
    log("accuracy preservation %s", report.summary())
    return report
