"""LTI machinery: state-space systems, transfer matrices, simulation, reduction."""
from .settings import analysis_grid
from .signal import Signal, FrequencyResponse
from .statespace import StateSpace, is_hurwitz
from .transfer import (
    RationalEntry,
    TransferMatrix,
    ss_to_tf,
    tf_to_ss,
    tf_add,
    tf_multiply,
    tf_inverse,
    tf_poles,
    check_invertible,
    entry_to_ss,
)
from .simulation import simulate, apply_filter, dft_grid, filter_periodic, relay_length
from .reduction import (
    balanced_truncation,
    hankel_singular_values,
    minimal_realization,
    stable_antistable_split,
    truncation_bound,
)
from .operators import Factor, ResponseProduct, TIKHONOV_LEVEL
from .analysis import response_distance, frequency_response

__all__ = [
    'analysis_grid',
    'Signal',
    'FrequencyResponse',
    'StateSpace',
    'is_hurwitz',
    'RationalEntry',
    'TransferMatrix',
    'ss_to_tf',
    'tf_to_ss',
    'tf_add',
    'tf_multiply',
    'tf_inverse',
    'tf_poles',
    'check_invertible',
    'entry_to_ss',
    'simulate',
    'apply_filter',
    'dft_grid',
    'filter_periodic',
    'relay_length',
    'balanced_truncation',
    'hankel_singular_values',
    'minimal_realization',
    'stable_antistable_split',
    'truncation_bound',
    'response_distance',
    'frequency_response',
    'Factor',
    'ResponseProduct',
    'TIKHONOV_LEVEL',
]
