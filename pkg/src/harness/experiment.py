"""Monte-Carlo trials of the collaborative chain and their aggregation."""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from attacker import attack_message
from collab import VehicleSession, mse, run_chain
from estimator import solve_riccati
from lti.serialization import SCHEMA, statespace_to_dict
from privacy import Obfuscator, generate_obfuscator, random_orders, verify_accuracy_preservation
from road import generate_road, road_profile
from storage import ExperimentConfig, RunManager
from utils.errors import PipelineStepError, RoadCollabError, RunFailedError
from utils.seeding import NOISE, OBFUSCATOR, ROAD, TOKEN, derive_seed
from vehicle import VehicleInstance, make_fleet
from .figures import render_figures
from .tables import attack_rows, attack_success_rate, accuracy_rows, write_tables

logger = logging.getLogger(__name__)

# a run fails outright when more than this share of trials fail
MAX_FAILURE_RATE = 0.1
# overlay traces keep every n-th sample
OVERLAY_STRIDE = 10

SESSIONS_DOC = "sessions"
MESSAGES_DOC = "messages"


@dataclass
class TrialResult:
    """Outcome of one trial as plain data (safe to send between processes)."""

    trial: int
    documents: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
    step: Optional[int] = None
    vehicle: Optional[int] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class ExperimentReport:
    """Summary of a finished run."""

    run_dir: str
    trials: int
    failures: int
    aggregate: List[Dict[str, str]]
    accuracy_passed: Optional[bool]
    attack_success_rate: Optional[float]

    def summary(self) -> str:
        lines = [f"run directory: {self.run_dir}",
                 f"trials: {self.trials} ({self.failures} failed)"]
        for row in self.aggregate:
            lines.append(f"  vehicle {row['vehicle']:>2}: mean MSE {float(row['mean_mse']):.4e} "
                         f"(std {float(row['std_mse']):.2e})")
        if self.accuracy_passed is not None:
            lines.append(f"accuracy preservation: {'PASS' if self.accuracy_passed else 'FAIL'}")
        if self.attack_success_rate is not None:
            lines.append(f"attacks above privacy threshold: {100 * self.attack_success_rate:.0f}%")
        return "\n".join(lines)


def _obfuscators(cfg: ExperimentConfig, trial: int, size: int) -> List[Obfuscator]:
    out = []
    for j in range(1, size + 1):
        seed = derive_seed(cfg.run.master_seed, trial, j, OBFUSCATOR)
        if cfg.privacy.random_orders:
            n1, n2 = random_orders(cfg.privacy.max_order, seed)
        else:
            n1, n2 = cfg.privacy.n1, cfg.privacy.n2
        out.append(generate_obfuscator(n1, n2, seed, cfg.privacy.pole_band, cfg.privacy.zero_band))
    return out


def _true_poles(v: VehicleInstance) -> np.ndarray:
    return np.sort_complex(np.linalg.eigvals(v.model.A))


def _vehicle_doc(session: VehicleSession, score: float, plain_score: Optional[float]) -> Dict[str, Any]:
    v = session.vehicle
    obf = session.obfuscator
    return {
        "id": v.id,
        "true_params": v.true_params.as_dict(),
        "model_params": v.model_params.as_dict(),
        "model": statespace_to_dict(v.model),
        "mse": score,
        "mse_plain": plain_score,
        "n1": None if obf is None else obf.n1,
        "n2": None if obf is None else obf.n2,
        "regularized_points": 0 if session.filters is None else session.filters.regularized_points,
    }


def _overlay(road_w, sessions: Sequence[VehicleSession], t_end: float) -> Dict[str, Any]:
    truth = road_profile(road_w).window(0.0, t_end)
    step = OVERLAY_STRIDE
    return {
        "dt": truth.dt * step,
        "truth": truth.data[:, ::step].tolist(),
        "estimates": {str(s.vehicle.id): road_profile(s.w_hat).window(0.0, t_end).data[:, ::step].tolist()
                      for s in sessions},
    }


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialResult:
    """Simulate one road, one fleet and the chain(s) the configuration asks for.

    Never raises for numerical failures; they are reported on the result.
    """
    master = cfg.run.master_seed
    try:
        road = generate_road(cfg.road, cfg.total_time, cfg.run.dt, derive_seed(master, trial, ROAD))
        fleet = make_fleet(cfg.fleet.vehicles, cfg.fleet.base, cfg.fleet.rel_sigma_fleet,
                           cfg.fleet.rel_sigma_model, master, trial)
        ids = [v.id for v in fleet]
        noise_seeds = [derive_seed(master, trial, j, NOISE) for j in ids]
        token_seeds = [derive_seed(master, trial, j, TOKEN) for j in ids]
        designs = [solve_riccati(v.model, cfg.road, cfg.estimator.gamma) for v in fleet]
        settings = cfg.pass_settings()

        def chain(obfuscators):
            return run_chain(fleet, road, noise_seeds, settings, obfuscators=obfuscators,
                             designs=designs, token_seeds=token_seeds)

        obfuscated = chain(_obfuscators(cfg, trial, len(fleet))) if cfg.privacy.enabled else None
        plain = chain(None) if (obfuscated is None or cfg.privacy.compare_plain) else None
        primary = obfuscated if obfuscated is not None else plain

        t_start, t_end = cfg.score_window

        def score(sessions):
            return [mse(s.w_hat, road.w, cfg.run.mse_space, t_start, t_end) for s in sessions]

        scores = score(primary)
        plain_scores = score(plain) if (plain is not None and obfuscated is not None) else [None] * len(fleet)

        accuracy = []
        if plain is not None and obfuscated is not None:
            report = verify_accuracy_preservation(plain, obfuscated, road.w, t_trim=t_start, t_end=t_end)
            accuracy = [dict(trial=trial, vehicle=r.vehicle_id, w_f_distance=r.w_f_distance,
                             w_hat_distance=r.w_hat_distance, mse_distance=r.mse_distance,
                             L1_identity=r.L1_identity, L2_identity=r.L2_identity,
                             passed=max(r.w_f_distance, r.w_hat_distance, r.mse_distance) <= report.tol
                             and max(r.L1_identity, r.L2_identity) <= report.filter_tol)
                        for r in report.vehicles]

        messages = [s.outgoing.to_dict() for s in primary]
        attacks = []
        if cfg.attacker.enabled:
            attacks = [_attack_row(doc, _true_poles(v), trial, v.id, cfg.attacker.assumed_order)
                       for doc, v in zip(messages, fleet)]
    except PipelineStepError as exc:
        logger.error("trial %d failed at step %d of vehicle %d: %s", trial, exc.step, exc.vehicle_id, exc.cause)
        return TrialResult(trial, error=str(exc), step=exc.step, vehicle=exc.vehicle_id)
    except (RoadCollabError, ValueError, np.linalg.LinAlgError) as exc:
        logger.error("trial %d failed: %s", trial, exc)
        return TrialResult(trial, error=str(exc))

    sessions_doc = {
        "schema": SCHEMA,
        "kind": "TrialSessions",
        "trial": trial,
        "privacy": cfg.privacy.enabled,
        "vehicles": [_vehicle_doc(s, m, p) for s, m, p in zip(primary, scores, plain_scores)],
        "accuracy": accuracy,
        "attack": [a for a in attacks if a is not None],
        "overlay": _overlay(road.w, primary, t_end),
    }
    messages_doc = {"schema": SCHEMA, "kind": "TrialMessages", "trial": trial, "messages": messages}
    return TrialResult(trial, documents={SESSIONS_DOC: sessions_doc, MESSAGES_DOC: messages_doc})


def _attack_row(message_doc, truth, trial: int, vehicle: int, assumed_order: int) -> Optional[Dict[str, Any]]:
    try:
        return attack_message(message_doc, truth, trial, vehicle, assumed_order).to_row()
    except (RoadCollabError, ValueError, np.linalg.LinAlgError) as exc:
        logger.warning("attack on trial %d vehicle %d failed: %s", trial, vehicle, exc)
        return None


def _run_trial_star(args):
    return run_trial(*args)


def _execute(cfg: ExperimentConfig, trials: Sequence[int]) -> List[TrialResult]:
    if cfg.run.workers <= 1 or len(trials) <= 1:
        return [run_trial(cfg, k) for k in trials]
    with ProcessPoolExecutor(max_workers=cfg.run.workers) as pool:
        # map keeps trial order, so the reduce below is deterministic
        return list(pool.map(_run_trial_star, [(cfg, k) for k in trials]))


def run_experiment(cfg: ExperimentConfig, manager: RunManager) -> ExperimentReport:
    """Run every trial, persist it and aggregate.

    Raises:
        RunFailedError: More than ``MAX_FAILURE_RATE`` of the trials failed.
    """
    manager.write_metadata({"schema": SCHEMA, "kind": "RunMetadata", "config": cfg.as_dict()})
    trials = list(range(cfg.run.trials))
    logger.info("running %d trials with %d vehicles (%d workers)",
                len(trials), cfg.fleet.vehicles, cfg.run.workers)
    results = _execute(cfg, trials)

    failures = 0
    session_docs = []
    for result in results:
        if result.failed:
            failures += 1
            manager.save_failure(result.trial, result.step, result.vehicle, result.error)
            continue
        ok, err = manager.save_trial(result.trial, result.documents)
        if not ok:
            logger.error("could not save trial %d: %s", result.trial, err)
        session_docs.append(result.documents[SESSIONS_DOC])

    if failures > MAX_FAILURE_RATE * len(trials):
        raise RunFailedError(failures, len(trials))
    if failures:
        logger.warning("%d of %d trials failed", failures, len(trials))

    rows = write_tables(manager, session_docs)
    render_figures(manager, session_docs)
    t1 = accuracy_rows(session_docs)
    return ExperimentReport(
        run_dir=str(manager.run_dir),
        trials=len(trials),
        failures=failures,
        aggregate=rows,
        accuracy_passed=all(r["passed"] == "True" for r in t1) if t1 else None,
        attack_success_rate=attack_success_rate(attack_rows(session_docs), cfg.attacker.threshold),
    )
