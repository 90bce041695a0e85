"""Order-reduction attack on an intercepted relay message.

The attacker knows the order of the sender's true dynamics but nothing about
the obfuscators. It realizes the intercepted sensitivity, reduces it to the
assumed order with balanced truncation and reads off the poles.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from lti import (
    StateSpace,
    balanced_truncation,
    is_hurwitz,
    minimal_realization,
    stable_antistable_split,
    tf_to_ss,
)
from privacy import RelayMessage
from utils.errors import AttackError

logger = logging.getLogger(__name__)

TARGET_S = "S"
TARGET_T = "T"


def _as_message(msg: Union[RelayMessage, Dict[str, Any]]) -> RelayMessage:
    if isinstance(msg, RelayMessage):
        return msg
    return RelayMessage.from_dict(msg)


def _reduce(sys: StateSpace, order: int) -> StateSpace:
    if order > sys.n:
        raise AttackError(f"assumed order {order} exceeds the realization order {sys.n}")
    if order == sys.n:
        return sys
    return balanced_truncation(sys, order)


def infer_poles(msg: Union[RelayMessage, Dict[str, Any]], assumed_order: int,
                target: str = TARGET_S) -> np.ndarray:
    """Poles of the intercepted sensitivity reduced to ``assumed_order``.

    Args:
        msg: The message, or its JSON document as read off the wire.
        assumed_order: Order the attacker believes the sender's dynamics have.
        target: ``"S"`` attacks S~, ``"T"`` attacks T~.

    Returns:
        ``assumed_order`` complex poles, sorted by real then imaginary part.
    """
    if assumed_order < 1:
        raise AttackError(f"assumed order must be at least 1, got {assumed_order}")
    if target not in (TARGET_S, TARGET_T):
        raise AttackError(f"target must be '{TARGET_S}' or '{TARGET_T}', got {target!r}")
    message = _as_message(msg)
    G = message.S_tilde if target == TARGET_S else message.T_tilde

    full = tf_to_ss(G)
    minimal = minimal_realization(full)
    # a larger guess than the minimal order falls back on the redundant realization
    sys = minimal if assumed_order <= minimal.n else full
    if not is_hurwitz(sys):
        stable, unstable = stable_antistable_split(sys)
        logger.warning("intercepted realization has %d unstable modes; reducing the stable part only",
                       unstable.n)
        sys = stable
    reduced = _reduce(sys, assumed_order)
    try:
        poles = np.linalg.eigvals(reduced.A)
    except np.linalg.LinAlgError as exc:
        raise AttackError(f"reduced realization has no eigenvalues: {exc}") from exc
    logger.debug("attack on %s~: order %d -> %d", target, full.n, reduced.n)
    return np.sort_complex(poles)


def pole_matching_distance(estimated: Sequence[complex], truth: Sequence[complex]) -> float:
    """Average distance of an optimal one-to-one matching of two pole sets.

    Unmatched poles on either side cost the diameter of the truth set.
    """
    est = np.asarray(estimated, dtype=complex).ravel()
    tru = np.asarray(truth, dtype=complex).ravel()
    if est.size == 0 or tru.size == 0:
        raise AttackError("pole sets must be non-empty")
    miss = float(np.max(np.abs(tru[:, None] - tru[None, :])))
    size = max(est.size, tru.size)
    cost = np.full((size, size), miss)
    cost[:est.size, :tru.size] = np.abs(est[:, None] - tru[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / size)


def format_poles(poles: Sequence[complex]) -> str:
    """Semicolon-separated ``re+imj`` list for CSV cells."""
    return ";".join(f"{p.real:.6g}{p.imag:+.6g}j" for p in np.asarray(poles, dtype=complex))


@dataclass(frozen=True)
class AttackRecord:
    """One intercepted message and how close the attacker came."""

    trial: int
    vehicle: int
    true_poles: np.ndarray
    inferred_poles: np.ndarray
    distance: float

    FIELDS = ("trial", "vehicle", "true_poles", "inferred_poles", "distance")

    def to_row(self) -> Dict[str, Any]:
        return {
            "trial": self.trial,
            "vehicle": self.vehicle,
            "true_poles": format_poles(self.true_poles),
            "inferred_poles": format_poles(self.inferred_poles),
            "distance": f"{self.distance:.6e}",
        }


def attack_message(msg: Union[RelayMessage, Dict[str, Any]], true_poles: Sequence[complex],
                   trial: int, vehicle: int, assumed_order: Optional[int] = None) -> AttackRecord:
    """Run the attack and score it against the sender's true poles."""
    truth = np.sort_complex(np.asarray(true_poles, dtype=complex))
    order = truth.size if assumed_order is None else assumed_order
    inferred = infer_poles(msg, order)
    return AttackRecord(trial, vehicle, truth, inferred, pole_matching_distance(inferred, truth))
