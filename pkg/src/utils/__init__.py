"""Utilities module."""
from .validators import Validators
from .errors import (
    RoadCollabError,
    DimensionError,
    DiagnosticsError,
    SingularityError,
    ConditioningError,
    DivergenceError,
    RiccatiError,
    ObfuscatorError,
    ConfigError,
    PipelineStepError,
    RunFailedError,
    SchemaError,
    AttackError,
)
from .logging_setup import configure_logging
from .seeding import derive_seed, rng_for, ROAD, FLEET, MODEL, NOISE, OBFUSCATOR, TOKEN

__all__ = [
    'Validators',
    'RoadCollabError',
    'DimensionError',
    'DiagnosticsError',
    'SingularityError',
    'ConditioningError',
    'DivergenceError',
    'RiccatiError',
    'ObfuscatorError',
    'ConfigError',
    'PipelineStepError',
    'RunFailedError',
    'SchemaError',
    'AttackError',
    'configure_logging',
    'derive_seed',
    'rng_for',
    'ROAD',
    'FLEET',
    'MODEL',
    'NOISE',
    'OBFUSCATOR',
    'TOKEN',
]
