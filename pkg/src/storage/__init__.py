"""Experiment configuration and run storage."""
from .config import (
    ConfigManager,
    ExperimentConfig,
    FleetConfig,
    EstimatorConfig,
    PrivacyConfig,
    AttackerConfig,
    RunConfig,
    WORKERS_ENV,
    validate_config,
)
from .run_manager import RunManager

__all__ = [
    'ConfigManager',
    'ExperimentConfig',
    'FleetConfig',
    'EstimatorConfig',
    'PrivacyConfig',
    'AttackerConfig',
    'RunConfig',
    'WORKERS_ENV',
    'validate_config',
    'RunManager',
]
