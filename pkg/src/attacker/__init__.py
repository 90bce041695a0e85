"""Honest-but-curious attacker that reduces intercepted dynamics."""
from .inference import (
    TARGET_S,
    TARGET_T,
    AttackRecord,
    attack_message,
    format_poles,
    infer_poles,
    pole_matching_distance,
)

__all__ = [
    'TARGET_S',
    'TARGET_T',
    'AttackRecord',
    'attack_message',
    'format_poles',
    'infer_poles',
    'pole_matching_distance',
]
