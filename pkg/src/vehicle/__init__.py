"""Half-car vehicle models."""
from .half_car import (
    VehicleParams,
    VehicleInstance,
    build_half_car,
    perturb_params,
    make_fleet,
)

__all__ = ['VehicleParams', 'VehicleInstance', 'build_half_car', 'perturb_params', 'make_fleet']
