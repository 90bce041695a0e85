"""One vehicle's pass over the shared road segment, and the sequential chain."""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from estimator import EstimatorDesign, bias_steady_state, estimate_road, estimator_as_lti, solve_riccati
from lti import Signal, StateSpace, TransferMatrix, apply_filter, relay_length, simulate, ss_to_tf
from privacy.message import RelayMessage, new_sender_token, obfuscate
from privacy.obfuscator import Obfuscator
from road import RoadRealization
from utils.errors import DimensionError, PipelineStepError, RoadCollabError
from vehicle import VehicleInstance
from .filters import LearningFilters, build_filters, update_learning_signal

logger = logging.getLogger(__name__)

FREQUENCY = "frequency"
TIME = "time"

STEP_MEASURE = 1
STEP_ESTIMATE = 2
STEP_LEARN = 3
STEP_COMBINE = 4
STEP_MISMATCH = 5
STEP_RELAY = 6


@dataclass(frozen=True)
class PassSettings:
    """Knobs shared by every vehicle pass of a chain.

    Attributes:
        noise_std: Accelerometer noise standard deviation (m/s^2).
        gamma: Input-observer gain.
        domain: ``"frequency"`` applies every linear block on the DFT grid;
            ``"time"`` integrates plant, estimator and model in time.
        padding: Zero-padding factor of the frequency-domain filters.
        regularize: Permit Tikhonov inversion of a nearly singular predecessor T.
        relay_mask: Zero the first seconds of e before relaying it.

    Relayed signals are zero-padded to ``relay_length(N, padding)`` samples and
    filtered periodically on that grid by both sender and receiver.
    """

    noise_std: float = 0.05
    gamma: float = 20.0
    domain: str = FREQUENCY
    padding: int = 2
    regularize: bool = True
    relay_mask: float = 0.0

    def __post_init__(self):
        if self.domain not in (FREQUENCY, TIME):
            raise ValueError(f"domain must be '{FREQUENCY}' or '{TIME}', got {self.domain!r}")


@dataclass(frozen=True, eq=False)
class VehicleSession:
    """Everything one vehicle computed during its pass.

    Attributes:
        vehicle: The fleet member.
        design: Its estimator design.
        T: Road-to-mismatch sensitivity (I - P_hat D) P.
        S: Learning-signal sensitivity, minus the model.
        y: Noisy accelerations.
        w_hat_o: Initial single-vehicle road estimate, drift term included.
        w_f: Learning signal from the predecessor (zero for the first vehicle).
        w_hat: Final road estimate.
        y_hat: Model prediction of the measurements from ``w_hat``.
        e: Measurement-prediction mismatch.
        filters: Learning filters built from the incoming message.
        obfuscator: Obfuscator applied to the outgoing message, if any.
        outgoing: The message handed to the next vehicle.
    """

    vehicle: VehicleInstance
    design: EstimatorDesign
    T: TransferMatrix
    S: TransferMatrix
    y: Signal
    w_hat_o: Signal
    w_f: Signal
    w_hat: Signal
    y_hat: Signal
    e: Signal
    filters: Optional[LearningFilters]
    obfuscator: Optional[Obfuscator]
    outgoing: RelayMessage


def sensitivity_systems(v: VehicleInstance, design: EstimatorDesign) -> Tuple[StateSpace, StateSpace]:
    """State-space forms of T = P - P_hat D P and S = -P_hat."""
    D = estimator_as_lti(design, v.model)
    T = v.plant - v.model @ D @ v.plant
    return T, -v.model


def build_sensitivities(v: VehicleInstance, design: EstimatorDesign) -> Tuple[TransferMatrix, TransferMatrix]:
    """Transfer matrices T and S of one vehicle."""
    T_ss, _ = sensitivity_systems(v, design)
    return ss_to_tf(T_ss), -ss_to_tf(v.model)


def _tagged(step: int, vehicle_id: int, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except RoadCollabError as exc:
        raise PipelineStepError(step, vehicle_id, exc) from exc
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise PipelineStepError(step, vehicle_id, exc) from exc


def _measure(v: VehicleInstance, w: Signal, settings: PassSettings, noise_seed: int) -> Signal:
    if settings.domain == FREQUENCY:
        y = apply_filter(v.plant, w, padding=settings.padding)
    else:
        y = simulate(v.plant, w)
    if settings.noise_std > 0:
        rng = np.random.default_rng(noise_seed)
        y = y.with_data(y.data + rng.normal(0.0, settings.noise_std, size=y.data.shape))
    return y


def _estimate(v: VehicleInstance, design: EstimatorDesign, y: Signal, settings: PassSettings) -> Signal:
    if settings.domain == FREQUENCY:
        linear = apply_filter(estimator_as_lti(design, v.model), y, padding=settings.padding)
        drift = bias_steady_state(design, v.model)
        return linear.with_data(linear.data + drift[:, None])
    result = estimate_road(design, v.model, y)
    return result.w_hat_o + result.bias_offset


def _predict(v: VehicleInstance, w_hat: Signal, settings: PassSettings) -> Signal:
    if settings.domain == FREQUENCY:
        return apply_filter(v.model, w_hat, padding=settings.padding)
    return simulate(v.model, w_hat)


def _learn(filters: LearningFilters, incoming: RelayMessage, w: Signal, padding: int) -> Signal:
    expected = relay_length(w.n_samples, padding)
    if incoming.e_tilde.n_samples != expected:
        raise DimensionError(
            f"relayed signals have {incoming.e_tilde.n_samples} samples, expected {expected}")
    return update_learning_signal(filters, incoming.w_f_tilde, incoming.e_tilde, w.n_samples)


def run_vehicle_pass(v: VehicleInstance, road: RoadRealization, incoming: Optional[RelayMessage],
                     noise_seed: int, settings: PassSettings = PassSettings(),
                     design: Optional[EstimatorDesign] = None,
                     obfuscator: Optional[Obfuscator] = None,
                     token_seed: Optional[int] = None) -> VehicleSession:
    """Run one vehicle through measurement, estimation, learning and relay.

    Args:
        v: The vehicle.
        road: Shared road realization.
        incoming: Predecessor's message, or None for the first vehicle.
        noise_seed: Seed for the measurement noise.
        settings: Pass settings.
        design: Estimator design (solved from ``v.model`` when omitted).
        obfuscator: Applied to the outgoing message when given.
        token_seed: Seed for the opaque sender token.

    Raises:
        PipelineStepError: Any failure, tagged with the step it happened in.
    """
    vid = v.id
    w = road.w
    if design is None:
        design = _tagged(STEP_ESTIMATE, vid, solve_riccati, v.model, road.params, settings.gamma)

    y = _tagged(STEP_MEASURE, vid, _measure, v, w, settings, noise_seed)
    w_hat_o = _tagged(STEP_ESTIMATE, vid, _estimate, v, design, y, settings)
    T, S = _tagged(STEP_ESTIMATE, vid, build_sensitivities, v, design)

    filters = None
    if incoming is None:
        w_f = Signal.zeros(2, w.n_samples, w.dt, w.t0)
    else:
        filters = _tagged(STEP_LEARN, vid, build_filters, incoming.T_tilde, incoming.S_tilde,
                          T, S, settings.regularize)
        w_f = _tagged(STEP_LEARN, vid, _learn, filters, incoming, w, settings.padding)
        if filters.regularized_points:
            logger.warning("vehicle %d: learning filters regularized at %d frequencies",
                           vid, filters.regularized_points)

    w_hat = _tagged(STEP_COMBINE, vid, lambda: w_hat_o + w_f)
    y_hat = _tagged(STEP_MISMATCH, vid, _predict, v, w_hat, settings)
    e = y - y_hat

    relay_e = e.masked_before(settings.relay_mask) if settings.relay_mask > 0 else e
    nfft = relay_length(w.n_samples, settings.padding)
    relay_e, relay_w_f = relay_e.padded_to(nfft), w_f.padded_to(nfft)
    token = new_sender_token(np.random.default_rng(noise_seed if token_seed is None else token_seed))
    if obfuscator is None:
        outgoing = RelayMessage(T, S, relay_e, relay_w_f, token)
    else:
        outgoing = _tagged(STEP_RELAY, vid, obfuscate, obfuscator, T, S, relay_e, relay_w_f, token)

    logger.debug("vehicle %d pass done (learning=%s, obfuscated=%s)",
                 vid, incoming is not None, obfuscator is not None)
    return VehicleSession(vehicle=v, design=design, T=T, S=S, y=y, w_hat_o=w_hat_o, w_f=w_f,
                          w_hat=w_hat, y_hat=y_hat, e=e, filters=filters,
                          obfuscator=obfuscator, outgoing=outgoing)


def run_chain(fleet: Sequence[VehicleInstance], road: RoadRealization, noise_seeds: Sequence[int],
              settings: PassSettings = PassSettings(),
              obfuscators: Optional[Sequence[Optional[Obfuscator]]] = None,
              designs: Optional[Sequence[EstimatorDesign]] = None,
              token_seeds: Optional[Sequence[int]] = None) -> List[VehicleSession]:
    """Pass the road through the fleet in order, each vehicle learning from its predecessor."""
    sessions: List[VehicleSession] = []
    incoming = None
    for idx, v in enumerate(fleet):
        session = run_vehicle_pass(
            v, road, incoming, noise_seeds[idx], settings,
            design=None if designs is None else designs[idx],
            obfuscator=None if obfuscators is None else obfuscators[idx],
            token_seed=None if token_seeds is None else token_seeds[idx],
        )
        sessions.append(session)
        incoming = session.outgoing
    return sessions


def mismatch_recursion(session: VehicleSession, w: Signal, padding: int = 2) -> Signal:
    """T w + S w_f, the mismatch predicted from the sensitivities."""
    return apply_filter(session.T, w, padding=padding) + apply_filter(session.S, session.w_f, padding=padding)
