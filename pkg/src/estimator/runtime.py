"""Time-domain estimator runs and the combined y -> w_hat block."""
import logging
from dataclasses import dataclass

import numpy as np

from lti import Signal, StateSpace, simulate
from utils.errors import DimensionError
from .design import EstimatorDesign

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """Output of the single-vehicle estimator.

    Attributes:
        x_hat: State estimate (4 channels), including the constant drift term.
        w_hat_o: Initial road estimate, linear part only.
        bias_offset: The drift term's own contribution to the road estimate;
            ``w_hat_o + bias_offset`` is the full affine estimate.
    """

    x_hat: Signal
    w_hat_o: Signal
    bias_offset: Signal


def _state_estimator_system(design: EstimatorDesign, model: StateSpace,
                            with_bias: bool) -> StateSpace:
    A_cl = design.closed_loop(model)
    n = model.n
    B = -design.F
    if with_bias:
        B = np.hstack([B, design.bias_term.reshape(n, 1)])
    return StateSpace(A_cl, B, np.eye(n), np.zeros((n, B.shape[1])))


def input_observer_system(design: EstimatorDesign, model: StateSpace) -> StateSpace:
    """Observer x_hat -> w_hat as a state-space system with state epsilon."""
    gS = design.gamma * design.S_obs
    K = design.K_obs
    A = -gS
    B = gS @ K @ model.A + gS @ gS @ K
    C = -np.eye(model.m)
    D = gS @ K
    return StateSpace(A, B, C, D)


def run_state_estimator(design: EstimatorDesign, model: StateSpace, y: Signal,
                        include_bias: bool = True) -> Signal:
    """x_hat' = A x_hat + F (C x_hat - y) + (B + F D) lambda mu_eta from x_hat(0) = 0."""
    if y.channels != model.p:
        raise DimensionError(f"estimator expects {model.p} measurement channels, got {y.channels}")
    if include_bias and np.any(design.bias_term):
        u = Signal(np.vstack([y.data, np.ones((1, y.n_samples))]), y.dt, y.t0)
        return simulate(_state_estimator_system(design, model, True), u)
    return simulate(_state_estimator_system(design, model, False), y)


def run_input_observer(design: EstimatorDesign, model: StateSpace, x_hat: Signal) -> Signal:
    """Road estimate w_hat = -epsilon + gamma S K x_hat with epsilon(0) = 0."""
    if x_hat.channels != model.n:
        raise DimensionError(f"observer expects {model.n} state channels, got {x_hat.channels}")
    return simulate(input_observer_system(design, model), x_hat)


def estimator_as_lti(design: EstimatorDesign, model: StateSpace) -> StateSpace:
    """The linear block y -> w_hat: state estimator followed by input observer (6 states)."""
    return input_observer_system(design, model) @ _state_estimator_system(design, model, False)


def estimate_road(design: EstimatorDesign, model: StateSpace, y: Signal) -> EstimationResult:
    """Run both estimators and split off the constant-drift contribution.

    The drift term makes the state estimator affine. Its response to a zero
    measurement is computed separately and subtracted so that ``w_hat_o`` is
    the output of the linear block returned by :func:`estimator_as_lti`.
    """
    x_hat = run_state_estimator(design, model, y, include_bias=True)
    w_full = run_input_observer(design, model, x_hat)
    if np.any(design.bias_term):
        x_bias = run_state_estimator(design, model, Signal.zeros(model.p, y.n_samples, y.dt, y.t0))
        offset = run_input_observer(design, model, x_bias)
    else:
        offset = Signal.zeros(model.m, y.n_samples, y.dt, y.t0)
    return EstimationResult(x_hat=x_hat, w_hat_o=w_full - offset, bias_offset=offset)


def bias_steady_state(design: EstimatorDesign, model: StateSpace) -> np.ndarray:
    """Settled value of the drift term's contribution to the road estimate."""
    if not np.any(design.bias_term):
        return np.zeros(model.m)
    path = input_observer_system(design, model) @ _state_estimator_system(design, model, True)
    return np.real(path.evaluate(0.0)[:, -1, 0])
