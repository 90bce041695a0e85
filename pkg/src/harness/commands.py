"""The four command-line verbs."""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from attacker import AttackRecord, attack_message
from lti.serialization import statespace_from_dict
from storage import ConfigManager, ExperimentConfig, RunManager, validate_config
from .experiment import MESSAGES_DOC, SESSIONS_DOC, ExperimentReport, run_experiment
from .figures import parse_poles, pole_scatter, render_figures
from .tables import attack_success_rate, write_tables

logger = logging.getLogger(__name__)


def cmd_validate(config_path: Optional[Path]) -> ExperimentConfig:
    """Parse and validate a configuration file; raises ConfigError."""
    cfg = validate_config(config_path)
    logger.info("configuration is valid: %d trials, %d vehicles", cfg.run.trials, cfg.fleet.vehicles)
    return cfg


def cmd_run(config_path: Optional[Path], output_dir: Optional[Path] = None) -> ExperimentReport:
    """Validate, create a run directory and run the experiment."""
    cfg = cmd_validate(config_path)
    base = Path(output_dir) if output_dir is not None else Path(cfg.run.output_dir)
    manager = RunManager.create(base)
    return run_experiment(cfg, manager)


def _stored_sessions(manager: RunManager) -> List[Dict[str, Any]]:
    docs = []
    for trial in manager.list_trials():
        stored = manager.load_trial(trial)
        if stored and SESSIONS_DOC in stored:
            docs.append(stored[SESSIONS_DOC])
    return docs


def _check_run_dir(run_dir: Path) -> RunManager:
    manager = RunManager(run_dir)
    if manager.read_metadata() is None:
        raise FileNotFoundError(f"{run_dir} is not a run directory (no metadata)")
    return manager


def cmd_attack(run_dir: Path, assumed_order: Optional[int] = None) -> List[Dict[str, Any]]:
    """Attack every stored message of a run and write attack.csv.

    Only the stored wire documents are read; the true poles come from
    the model realization in the session record and serve for scoring only.
    """
    manager = _check_run_dir(Path(run_dir))
    config = ConfigManager()
    stored_config = manager.read_metadata().get("config", {})
    order = assumed_order or stored_config.get("attacker", {}).get(
        "assumed_order", config.get("attacker.assumed_order"))
    threshold = stored_config.get("attacker", {}).get("threshold", config.get("attacker.threshold"))

    rows = []
    for trial in manager.list_trials():
        stored = manager.load_trial(trial) or {}
        if MESSAGES_DOC not in stored or SESSIONS_DOC not in stored:
            continue
        vehicles = stored[SESSIONS_DOC]["vehicles"]
        for msg, vehicle in zip(stored[MESSAGES_DOC]["messages"], vehicles):
            truth = np.sort_complex(statespace_from_dict(vehicle["model"]).poles())
            rows.append(attack_message(msg, truth, trial, vehicle["id"], order).to_row())
    if not rows:
        logger.warning("no stored messages found under %s", run_dir)
        return rows
    manager.write_csv("attack.csv", AttackRecord.FIELDS, rows)
    manager.figures_dir.mkdir(exist_ok=True)
    pole_scatter(parse_poles(rows[0]["true_poles"]), parse_poles(rows[0]["inferred_poles"]),
                 manager.figures_dir / "pole_scatter.svg",
                 title=f"trial {rows[0]['trial']}, vehicle {rows[0]['vehicle']}")
    rate = attack_success_rate(rows, threshold)
    logger.info("%d messages attacked; %.0f%% above the privacy threshold %.3g",
                len(rows), 100 * rate, threshold)
    return rows


def cmd_report(run_dir: Path) -> List[Dict[str, str]]:
    """Rebuild the CSV tables and figures of a run from its stored trials."""
    manager = _check_run_dir(Path(run_dir))
    docs = _stored_sessions(manager)
    if not docs:
        raise FileNotFoundError(f"no completed trials under {run_dir}")
    rows = write_tables(manager, docs)
    render_figures(manager, docs)
    return rows
