"""Run directories: numbered trial folders, CSV tables and figures."""
import csv
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

METADATA_FILE = "run_metadata.json"
FAILURE_DOC = "failure"


class RunManager:
    """Manages the output folder of one experiment run.

    Layout::

        run-<timestamp>/
            run_metadata.json
            trial-000/sessions.json, messages.json
            aggregate.csv, accuracy.csv, attack.csv
            figures/*.svg
    """

    def __init__(self, run_dir: Path):
        """Attach to an existing (or about to be created) run folder.

        Args:
            run_dir: Run directory.
        """
        self.run_dir = Path(run_dir)
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    @classmethod
    def create(cls, base_path: Path, timestamp: Optional[str] = None) -> "RunManager":
        """Create a fresh ``run-<timestamp>`` folder under ``base_path``.

        A numeric suffix is appended when the name is taken.
        """
        stamp = timestamp or datetime.now().strftime("%Y%m%d-%H%M%S")
        base_path = Path(base_path)
        candidate = base_path / f"run-{stamp}"
        suffix = 1
        while candidate.exists():
            candidate = base_path / f"run-{stamp}-{suffix}"
            suffix += 1
        candidate.mkdir(parents=True)
        manager = cls(candidate)
        manager.figures_dir.mkdir()
        logger.info("created run directory %s", candidate)
        return manager

    @property
    def figures_dir(self) -> Path:
        return self.run_dir / "figures"

    def get_trial_folder(self, trial: int) -> Path:
        """Folder of one trial (zero-padded three digits)."""
        return self.run_dir / f"trial-{trial:03d}"

    def list_trials(self) -> List[int]:
        """Indices of every trial folder, sorted."""
        if not self.run_dir.exists():
            return []
        found = []
        for item in self.run_dir.iterdir():
            if item.is_dir() and item.name.startswith("trial-") and item.name[6:].isdigit():
                found.append(int(item.name[6:]))
        return sorted(found)

    def save_trial(self, trial: int, documents: Dict[str, Any]) -> Tuple[bool, Optional[str]]:
        """Write each document as ``<name>.json`` in the trial folder.

        Returns:
            Tuple of (success, error_message).
        """
        try:
            folder = self.get_trial_folder(trial)
            folder.mkdir(parents=True, exist_ok=True)
            for name, doc in documents.items():
                _write_json(folder / f"{name}.json", doc)
            return True, None
        except (OSError, TypeError, ValueError) as e:
            return False, str(e)

    def save_failure(self, trial: int, step: Optional[int], vehicle: Optional[int],
                     message: str) -> Tuple[bool, Optional[str]]:
        return self.save_trial(trial, {FAILURE_DOC: {
            "trial": trial, "step": step, "vehicle": vehicle, "error": message}})

    def load_trial(self, trial: int) -> Optional[Dict[str, Any]]:
        """Every JSON document of a trial keyed by file stem, or None if missing."""
        folder = self.get_trial_folder(trial)
        if not folder.exists():
            return None
        docs = {}
        for path in sorted(folder.glob("*.json")):
            with open(path, "r", encoding="utf-8") as f:
                docs[path.stem] = json.load(f)
        return docs

    def write_metadata(self, metadata: Dict[str, Any]) -> Path:
        path = self.run_dir / METADATA_FILE
        _write_json(path, metadata)
        return path

    def read_metadata(self) -> Optional[Dict[str, Any]]:
        path = self.run_dir / METADATA_FILE
        if not path.exists():
            return None
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    def write_csv(self, name: str, fieldnames: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
        """Write ``name`` (e.g. ``aggregate.csv``) in the run folder."""
        path = self.run_dir / name
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
        self.logger.debug("wrote %s", path)
        return path


def _write_json(path: Path, doc: Any):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
