"""Balanced truncation and minimal realizations on top of python-control."""
import logging
from typing import Tuple

import control as ct
import numpy as np
from scipy import linalg

from utils.errors import DiagnosticsError
from .statespace import StateSpace, is_hurwitz

logger = logging.getLogger(__name__)


def _control_call(what: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, np.linalg.LinAlgError, ct.ControlSlycot) as exc:
        raise DiagnosticsError(f"{what} failed: {exc}") from exc


def hankel_singular_values(sys: StateSpace) -> np.ndarray:
    """Hankel singular values of a Hurwitz system, in decreasing order."""
    if sys.n == 0:
        return np.zeros(0)
    if not is_hurwitz(sys):
        raise DiagnosticsError("Hankel singular values need a Hurwitz system")
    hsv = _control_call("Hankel singular value computation", ct.hsvd, sys.to_control())
    hsv = np.clip(np.real(np.ravel(hsv)), 0.0, None)
    return np.sort(hsv)[::-1]


def balanced_truncation(sys: StateSpace, r: int) -> StateSpace:
    """Reduce a stable system to order ``r``.

    The H-infinity error is bounded by twice the sum of the discarded Hankel
    singular values. Fewer than ``r`` states come back when the realization
    has fewer than ``r`` numerically non-zero Hankel singular values.

    Args:
        sys: Hurwitz system.
        r: Target order, ``1 <= r <= sys.n``.

    Returns:
        Balanced system of order at most ``r``.
    """
    if not is_hurwitz(sys):
        raise DiagnosticsError("balanced truncation needs a Hurwitz system; split off the unstable part first")
    if not 1 <= r <= sys.n:
        raise ValueError(f"target order must lie in [1, {sys.n}], got {r}")
    if r == sys.n:
        return StateSpace(sys.A, sys.B, sys.C, sys.D)
    reduced = _control_call("balanced truncation", ct.balred, sys.to_control(), r, method="truncate")
    reduced = StateSpace.from_control(reduced)
    logger.debug("balanced truncation %d -> %d", sys.n, reduced.n)
    return reduced


def truncation_bound(sys: StateSpace, r: int) -> float:
    """Twice the sum of the Hankel singular values beyond ``r``."""
    return float(2.0 * hankel_singular_values(sys)[r:].sum())


def minimal_realization(sys: StateSpace, tol: float = 0.0) -> StateSpace:
    """Drop modes that are (numerically) uncontrollable or unobservable.

    ``tol`` is the rank tolerance of the staircase reduction; zero selects
    its default. Works for unstable systems as well.
    """
    if sys.n == 0:
        return sys
    reduced = _control_call("minimal realization", ct.minreal, sys.to_control(), tol=tol, verbose=False)
    return StateSpace.from_control(reduced)


def stable_antistable_split(sys: StateSpace) -> Tuple[StateSpace, StateSpace]:
    """Additive split ``G = G_stable + G_unstable`` via an ordered Schur form.

    The feedthrough goes with the stable part.
    """
    if sys.n == 0:
        return sys, StateSpace.gain(np.zeros_like(sys.D))
    T, Z, k = linalg.schur(sys.A, output="real", sort="lhp")
    n = sys.n
    A11, A12, A22 = T[:k, :k], T[:k, k:], T[k:, k:]
    # Decouple the blocks: solve A11 X - X A22 + A12 = 0.
    X = linalg.solve_sylvester(A11, -A22, -A12) if 0 < k < n else np.zeros((k, n - k))
    Tm = np.eye(n)
    Tm[:k, k:] = X
    Tmi = np.eye(n)
    Tmi[:k, k:] = -X
    Bz = Tmi @ Z.T @ sys.B
    Cz = sys.C @ Z @ Tm
    stable = StateSpace(A11, Bz[:k], Cz[:, :k], sys.D)
    unstable = StateSpace(A22, Bz[k:], Cz[:, k:], np.zeros_like(sys.D))
    return stable, unstable
