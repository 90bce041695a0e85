"""Obfuscation of relayed messages and its verification."""
from .obfuscator import Obfuscator, generate_obfuscator, random_orders, MAX_ATTEMPTS, GAIN_RANGE
from .message import RelayMessage, ObfuscatorFamily, obfuscate, obfuscate_general, new_sender_token
from .verification import (
    ACCURACY_TOL,
    FILTER_TOL,
    AccuracyReport,
    VehicleComparison,
    accuracy_preserving,
    reshaping_distance,
    construct_alternative_explanation,
    explanation_residuals,
    verify_accuracy_preservation,
)

__all__ = [
    'Obfuscator',
    'generate_obfuscator',
    'random_orders',
    'MAX_ATTEMPTS',
    'GAIN_RANGE',
    'RelayMessage',
    'ObfuscatorFamily',
    'obfuscate',
    'obfuscate_general',
    'new_sender_token',
    'ACCURACY_TOL',
    'FILTER_TOL',
    'AccuracyReport',
    'VehicleComparison',
    'accuracy_preserving',
    'reshaping_distance',
    'construct_alternative_explanation',
    'explanation_residuals',
    'verify_accuracy_preservation',
]
