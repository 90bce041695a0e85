"""The relayed message and how it is obfuscated."""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

import numpy as np

from lti import Factor, ResponseProduct, Signal, TransferMatrix, filter_periodic, tf_multiply
from lti.serialization import (
    SCHEMA,
    SchemaError,
    signal_from_dict,
    signal_to_dict,
    transfer_from_dict,
    transfer_to_dict,
)
from utils.errors import ConditioningError, DimensionError, ObfuscatorError
from .obfuscator import Obfuscator

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RelayMessage:
    """What vehicle j hands to vehicle j+1 (and what an eavesdropper sees).

    Attributes:
        T_tilde: Obfuscated sensitivity to the road.
        S_tilde: Obfuscated sensitivity to the learning signal.
        e_tilde: Obfuscated measurement-prediction mismatch.
        w_f_tilde: Obfuscated learning signal.
        sender_id: Opaque per-trial token.

    Both signals are one period of the relay grid: the sender zero-pads them
    to ``relay_length(N, padding)`` samples before filtering.
    """

    T_tilde: TransferMatrix
    S_tilde: TransferMatrix
    e_tilde: Signal
    w_f_tilde: Signal
    sender_id: str

    def __post_init__(self):
        if self.T_tilde.shape != (2, 2) or self.S_tilde.shape != (2, 2):
            raise DimensionError("relayed sensitivities must be 2x2")
        if self.e_tilde.channels != 2 or self.w_f_tilde.channels != 2:
            raise DimensionError("relayed signals must have 2 channels")
        if not self.e_tilde.compatible_with(self.w_f_tilde):
            raise DimensionError("relayed signals must share dt and length")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": SCHEMA,
            "kind": "RelayMessage",
            "sender_id": self.sender_id,
            "T_tilde": transfer_to_dict(self.T_tilde),
            "S_tilde": transfer_to_dict(self.S_tilde),
            "e_tilde": signal_to_dict(self.e_tilde),
            "w_f_tilde": signal_to_dict(self.w_f_tilde),
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "RelayMessage":
        if doc.get("schema") != SCHEMA or doc.get("kind") != "RelayMessage":
            raise SchemaError("not a RelayMessage document")
        return cls(T_tilde=transfer_from_dict(doc["T_tilde"]),
                   S_tilde=transfer_from_dict(doc["S_tilde"]),
                   e_tilde=signal_from_dict(doc["e_tilde"]),
                   w_f_tilde=signal_from_dict(doc["w_f_tilde"]),
                   sender_id=str(doc["sender_id"]))


@dataclass(frozen=True, eq=False)
class ObfuscatorFamily:
    """The six obfuscating systems of the general scheme.

    ``None`` stands for the identity; ``psi_w`` may be a factor chain so an
    exact pointwise inverse can be used. The standard scheme is the family
    ``T1 = e = S1``, ``T2 = I``, ``w = S2^-1``.
    """

    psi_t1: Optional[TransferMatrix] = None
    psi_t2: Optional[TransferMatrix] = None
    psi_s1: Optional[TransferMatrix] = None
    psi_s2: Optional[TransferMatrix] = None
    psi_e: Optional[TransferMatrix] = None
    psi_w: Optional[Union[TransferMatrix, ResponseProduct]] = None

    @classmethod
    def from_obfuscator(cls, obf: Obfuscator) -> "ObfuscatorFamily":
        """Accuracy-preserving family generated by a standard obfuscator pair."""
        psi_w = ResponseProduct([Factor(obf.psi_s2, inverted=True)])
        return cls(psi_t1=obf.psi_s1, psi_t2=None, psi_s1=obf.psi_s1, psi_s2=obf.psi_s2,
                   psi_e=obf.psi_s1, psi_w=psi_w)


def _sandwich(left: Optional[TransferMatrix], G: TransferMatrix,
              right: Optional[TransferMatrix]) -> TransferMatrix:
    out = G
    if left is not None and not left.is_identity():
        out = tf_multiply(left, out)
    if right is not None and not right.is_identity():
        out = tf_multiply(out, right)
    return out


def _filtered(psi, sig: Signal) -> Signal:
    if psi is None or (isinstance(psi, TransferMatrix) and psi.is_identity()):
        return sig
    return filter_periodic(psi, sig)


def obfuscate_general(family: ObfuscatorFamily, T: TransferMatrix, S: TransferMatrix,
                      e: Signal, w_f: Signal, sender_id: str = "") -> RelayMessage:
    """Apply an arbitrary family of obfuscating systems to the outgoing tuple."""
    return RelayMessage(
        T_tilde=_sandwich(family.psi_t1, T, family.psi_t2),
        S_tilde=_sandwich(family.psi_s1, S, family.psi_s2),
        e_tilde=_filtered(family.psi_e, e),
        w_f_tilde=_filtered(family.psi_w, w_f),
        sender_id=sender_id,
    )


def obfuscate(obf: Obfuscator, T: TransferMatrix, S: TransferMatrix, e: Signal,
              w_f: Signal, sender_id: str = "") -> RelayMessage:
    """T~ = Psi1 T, S~ = Psi1 S Psi2, e~ = Psi1 e, w_f~ = Psi2^-1 w_f."""
    if obf.is_identity:
        return RelayMessage(T, S, e, w_f, sender_id)
    try:
        return obfuscate_general(ObfuscatorFamily.from_obfuscator(obf), T, S, e, w_f, sender_id)
    except ConditioningError as exc:
        raise ObfuscatorError(f"obfuscator response is ill-conditioned on the relay grid: {exc}") from exc


def new_sender_token(rng: np.random.Generator) -> str:
    """Random hex token standing in for the sender's identity within one trial."""
    return rng.bytes(8).hex()
