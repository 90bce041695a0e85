"""Single-vehicle estimation: Riccati-optimal state estimator plus input observer."""
from .design import (
    EstimatorDesign,
    design_gain,
    solve_riccati,
    riccati_residual,
    error_covariance,
    cost_weight,
    steady_state_cost,
    design_to_dict,
    design_from_dict,
)
from .runtime import (
    bias_steady_state,
    EstimationResult,
    run_state_estimator,
    run_input_observer,
    input_observer_system,
    estimator_as_lti,
    estimate_road,
)

__all__ = [
    'EstimatorDesign',
    'design_gain',
    'solve_riccati',
    'riccati_residual',
    'error_covariance',
    'cost_weight',
    'steady_state_cost',
    'design_to_dict',
    'design_from_dict',
    'EstimationResult',
    'run_state_estimator',
    'run_input_observer',
    'input_observer_system',
    'estimator_as_lti',
    'estimate_road',
    'bias_steady_state',
]
