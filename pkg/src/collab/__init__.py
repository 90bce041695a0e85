"""Collaborative road estimation across a chain of vehicles."""
from .filters import LearningFilters, FilterResiduals, build_filters, filter_residuals, update_learning_signal
from .pipeline import (
    FREQUENCY,
    TIME,
    PassSettings,
    VehicleSession,
    sensitivity_systems,
    build_sensitivities,
    run_vehicle_pass,
    run_chain,
    mismatch_recursion,
)
from .metrics import mse, VELOCITY, PROFILE

__all__ = [
    'LearningFilters',
    'FilterResiduals',
    'build_filters',
    'filter_residuals',
    'update_learning_signal',
    'FREQUENCY',
    'TIME',
    'PassSettings',
    'VehicleSession',
    'sensitivity_systems',
    'build_sensitivities',
    'run_vehicle_pass',
    'run_chain',
    'mismatch_recursion',
    'mse',
    'VELOCITY',
    'PROFILE',
]
