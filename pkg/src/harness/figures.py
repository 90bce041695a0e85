"""Static SVG charts of a run."""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .tables import aggregate_rows, attack_rows  # noqa: E402

logger = logging.getLogger(__name__)

# fixed metadata keeps repeated renders byte-identical
_SVG_METADATA = {"Date": None}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)
    logger.debug("wrote %s", path)
    return path


def mse_bar_chart(vehicles: Sequence[int], mean: Sequence[float], std: Sequence[float], path: Path,
                  plain_mean: Optional[Sequence[float]] = None) -> Path:
    """Mean MSE per vehicle position with one-sigma error bars."""
    x = np.arange(len(vehicles))
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.4 if plain_mean is not None else 0.6
    ax.bar(x, mean, width, yerr=std, capsize=3, label="collaborative (obfuscated)"
           if plain_mean is not None else "collaborative")
    if plain_mean is not None:
        ax.bar(x + width, plain_mean, width, alpha=0.6, label="collaborative (plain)")
    ax.set_xticks(x + (width / 2 if plain_mean is not None else 0.0))
    ax.set_xticklabels([str(v) for v in vehicles])
    ax.set_xlabel("vehicle")
    ax.set_ylabel("mean squared error")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def road_overlay(dt: float, truth: np.ndarray, estimates: Dict[str, np.ndarray], path: Path,
                 channel: int = 0) -> Path:
    """True road profile against several vehicles' estimates."""
    truth = np.asarray(truth)
    t = dt * np.arange(truth.shape[1])
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(t, truth[channel], color="black", linewidth=1.5, label="true")
    for label, est in estimates.items():
        ax.plot(t, np.asarray(est)[channel], linewidth=0.9, label=f"vehicle {label}")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("profile (m)")
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def pole_scatter(true_poles: Sequence[complex], inferred_poles: Sequence[complex], path: Path,
                 title: str = "") -> Path:
    """True poles of the sender against those the attacker inferred."""
    tp = np.asarray(true_poles, dtype=complex)
    ip = np.asarray(inferred_poles, dtype=complex)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(tp.real, tp.imag, marker="x", s=60, label="true")
    ax.scatter(ip.real, ip.imag, marker="o", facecolors="none", edgecolors="tab:red", s=50, label="inferred")
    ax.axvline(0.0, color="grey", linewidth=0.5)
    ax.set_xlabel("real")
    ax.set_ylabel("imaginary")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def parse_poles(cell: str) -> List[complex]:
    return [complex(tok) for tok in cell.split(";") if tok]


def _overlay_subset(estimates: Dict[str, Any]) -> Dict[str, Any]:
    keys = sorted(estimates, key=int)
    picked = keys if len(keys) <= 3 else [keys[0], keys[1], keys[-1]]
    return {k: estimates[k] for k in picked}


def render_figures(manager, session_docs: Sequence[Dict[str, Any]]) -> List[Path]:
    """Write every chart of a run into its figures folder."""
    out_dir = manager.figures_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    rows = aggregate_rows(session_docs)
    if rows:
        plain = [float(r["mean_mse_plain"]) for r in rows] if all(r["mean_mse_plain"] for r in rows) else None
        written.append(mse_bar_chart([int(r["vehicle"]) for r in rows],
                                     [float(r["mean_mse"]) for r in rows],
                                     [float(r["std_mse"]) for r in rows],
                                     out_dir / "mse_by_vehicle.svg", plain))
    if session_docs:
        first = session_docs[0]
        overlay = first["overlay"]
        for ch, side in enumerate(("left", "right")):
            written.append(road_overlay(overlay["dt"], overlay["truth"], _overlay_subset(overlay["estimates"]),
                                        out_dir / f"road_overlay_{side}.svg", channel=ch))
    attacks = attack_rows(session_docs)
    if attacks:
        row = attacks[0]
        written.append(pole_scatter(parse_poles(row["true_poles"]), parse_poles(row["inferred_poles"]),
                                    out_dir / "pole_scatter.svg",
                                    title=f"trial {row['trial']}, vehicle {row['vehicle']}"))
    logger.info("rendered %d figures into %s", len(written), out_dir)
    return written
