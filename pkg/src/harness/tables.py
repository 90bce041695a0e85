"""CSV tables of a run, built from the per-trial documents."""
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from attacker import AttackRecord
from storage import RunManager

AGGREGATE_FIELDS = ("vehicle", "trials", "mean_mse", "std_mse", "mean_mse_plain", "std_mse_plain")
ACCURACY_FIELDS = ("trial", "vehicle", "w_f_distance", "w_hat_distance", "mse_distance",
                   "L1_identity", "L2_identity", "passed")


def aggregate_rows(session_docs: Sequence[Dict[str, Any]]) -> List[Dict[str, str]]:
    """Per-vehicle mean and standard deviation of the MSE over trials."""
    per_vehicle: Dict[int, List[float]] = {}
    per_vehicle_plain: Dict[int, List[float]] = {}
    for doc in session_docs:
        for v in doc["vehicles"]:
            per_vehicle.setdefault(v["id"], []).append(v["mse"])
            if v.get("mse_plain") is not None:
                per_vehicle_plain.setdefault(v["id"], []).append(v["mse_plain"])
    rows = []
    for vid in sorted(per_vehicle):
        values = np.asarray(per_vehicle[vid])
        plain = np.asarray(per_vehicle_plain.get(vid, []))
        rows.append({
            "vehicle": str(vid),
            "trials": str(values.size),
            "mean_mse": f"{values.mean():.10e}",
            "std_mse": f"{values.std():.10e}",
            "mean_mse_plain": f"{plain.mean():.10e}" if plain.size else "",
            "std_mse_plain": f"{plain.std():.10e}" if plain.size else "",
        })
    return rows


def accuracy_rows(session_docs: Sequence[Dict[str, Any]]) -> List[Dict[str, str]]:
    rows = []
    for doc in session_docs:
        for r in doc.get("accuracy", []):
            row = {k: (f"{r[k]:.6e}" if isinstance(r[k], float) else str(r[k])) for k in ACCURACY_FIELDS}
            rows.append(row)
    return rows


def attack_rows(session_docs: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
    return [row for doc in session_docs for row in doc.get("attack", [])]


def write_tables(manager: RunManager, session_docs: Sequence[Dict[str, Any]]) -> List[Dict[str, str]]:
    """(Re)write aggregate.csv, accuracy.csv and attack.csv from trial documents."""
    rows = aggregate_rows(session_docs)
    manager.write_csv("aggregate.csv", AGGREGATE_FIELDS, rows)
    t1 = accuracy_rows(session_docs)
    if t1:
        manager.write_csv("accuracy.csv", ACCURACY_FIELDS, t1)
    attacks = attack_rows(session_docs)
    if attacks:
        manager.write_csv("attack.csv", AttackRecord.FIELDS, attacks)
    return rows


def attack_success_rate(rows: Sequence[Dict[str, Any]], threshold: float) -> Optional[float]:
    """Share of attacks whose pole-matching distance reached ``threshold``."""
    if not rows:
        return None
    return float(np.mean([float(r["distance"]) >= threshold for r in rows]))


