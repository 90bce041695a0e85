"""Experiment configuration management."""
import copy
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from collab import FREQUENCY, PROFILE, TIME, VELOCITY, PassSettings
from road import JdpParams
from utils.errors import ConfigError
from utils.validators import Validators
from vehicle import VehicleParams

logger = logging.getLogger(__name__)

WORKERS_ENV = "ROADCOLLAB_WORKERS"
# run.relay_mask value that ties the relay mask to run.t_trim
MASK_FROM_TRIM = "t_trim"


@dataclass(frozen=True)
class FleetConfig:
    vehicles: int
    rel_sigma_fleet: float
    rel_sigma_model: float
    base: VehicleParams


@dataclass(frozen=True)
class EstimatorConfig:
    gamma: float
    noise_std: float


@dataclass(frozen=True)
class PrivacyConfig:
    """Obfuscation settings.

    ``compare_plain`` also runs every trial without obfuscation on the same
    seeds so accuracy preservation can be checked.
    """

    enabled: bool
    n1: int
    n2: int
    random_orders: bool
    max_order: int
    pole_band: Tuple[Tuple[float, float], Tuple[float, float]]
    zero_band: Tuple[Tuple[float, float], Tuple[float, float]]
    compare_plain: bool


@dataclass(frozen=True)
class AttackerConfig:
    enabled: bool
    assumed_order: int
    threshold: float


@dataclass(frozen=True)
class RunConfig:
    """Monte-Carlo and numerical settings.

    Attributes:
        settle_time: Extra road driven after the scored horizon so that the
            end of the finite-horizon filters falls outside the score.
        t_trim: Start-up time left out of the score.
        relay_mask: Seconds of the mismatch zeroed before it is relayed;
            equal to ``t_trim`` unless set explicitly.
    """

    trials: int
    master_seed: int
    dt: float
    horizon: float
    settle_time: float
    t_trim: float
    workers: int
    domain: str
    padding: int
    regularize: bool
    relay_mask: float
    mse_space: str
    output_dir: str


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully defaulted and validated experiment configuration."""

    fleet: FleetConfig
    road: JdpParams
    estimator: EstimatorConfig
    privacy: PrivacyConfig
    attacker: AttackerConfig
    run: RunConfig
    source: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def pass_settings(self) -> PassSettings:
        return PassSettings(noise_std=self.estimator.noise_std, gamma=self.estimator.gamma,
                            domain=self.run.domain, padding=self.run.padding,
                            regularize=self.run.regularize, relay_mask=self.run.relay_mask)

    @property
    def score_window(self) -> Tuple[float, float]:
        """Scored part of the simulated road, in seconds from its start."""
        return self.run.t_trim, self.run.horizon

    @property
    def total_time(self) -> float:
        return self.run.settle_time + self.run.horizon

    def as_dict(self) -> Dict[str, Any]:
        """The normalized nested configuration, suitable for JSON."""
        return copy.deepcopy(self.source)


class ConfigManager:
    """Loads an experiment TOML file over the built-in defaults."""

    DEFAULTS: Dict[str, Dict[str, Any]] = {
        "fleet": {
            "vehicles": 10,
            "rel_sigma_fleet": 0.1,
            "rel_sigma_model": 0.05,
            "base": {"m_b": 700.0, "I_x": 500.0, "k_s": 30000.0, "c_s": 2500.0, "L1": 0.75, "L2": 0.75},
        },
        "road": {
            "lambda": 0.5,
            "mu_eta": [-0.05, -0.05],
            "sigma_eta": [[4e-4, 0.0], [0.0, 4e-4]],
            "sigma_zeta": [[0.01, 0.0], [0.0, 0.01]],
            "shared_arrivals": True,
        },
        "estimator": {
            "gamma": 20.0,
            "noise_std": 0.05,
        },
        "privacy": {
            "enabled": True,
            "n1": 3,
            "n2": 3,
            "random_orders": False,
            "max_order": 3,
            "pole_real_band": [-50.0, -0.5],
            "pole_imag_band": [-30.0, 30.0],
            "zero_real_band": [-50.0, -0.5],
            "zero_imag_band": [-30.0, 30.0],
            "compare_plain": True,
        },
        "attacker": {
            "enabled": True,
            "assumed_order": 4,
            "threshold": 0.5,
        },
        "run": {
            "trials": 100,
            "master_seed": 2024,
            "dt": 1e-3,
            "horizon": 10.0,
            "settle_time": 2.0,
            "t_trim": 1.0,
            "workers": 1,
            "domain": FREQUENCY,
            "padding": 2,
            "regularize": True,
            "relay_mask": MASK_FROM_TRIM,
            "mse_space": PROFILE,
            "output_dir": "runs",
        },
    }

    def __init__(self, config_path: Optional[Path] = None):
        """Load ``config_path`` (defaults only when None).

        Raises:
            ConfigError: Unreadable file, TOML syntax error or unknown keys.
        """
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")
        self.config_path = Path(config_path) if config_path is not None else None
        self._config: Dict[str, Any] = copy.deepcopy(self.DEFAULTS)
        self._load_config()
        self._apply_environment()

    def _load_config(self):
        if self.config_path is None:
            return
        try:
            with open(self.config_path, "rb") as f:
                doc = tomllib.load(f)
        except OSError as e:
            raise ConfigError([f"cannot read {self.config_path}: {e}"]) from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError([f"{self.config_path}: {e}"]) from e
        unknown: List[str] = []
        _merge(self._config, doc, "", unknown)
        if unknown:
            raise ConfigError([f"unknown key '{key}'" for key in unknown])
        self.logger.debug("loaded %s", self.config_path)

    def _apply_environment(self):
        raw = os.environ.get(WORKERS_ENV)
        if raw is None:
            return
        try:
            self._config["run"]["workers"] = int(raw)
        except ValueError as e:
            raise ConfigError([f"{WORKERS_ENV} must be an integer, got {raw!r}"]) from e
        self.logger.debug("workers overridden by %s=%s", WORKERS_ENV, raw)

    def get(self, key: str, default: Any = None) -> Any:
        """Get a value by dotted key, e.g. ``"run.trials"``."""
        node: Any = self._config
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any):
        """Set a value by dotted key; the key must already exist in the defaults."""
        *parents, leaf = key.split(".")
        node = self._config
        for part in parents:
            node = node.get(part) if isinstance(node, dict) else None
            if not isinstance(node, dict):
                raise ConfigError([f"unknown key '{key}'"])
        if leaf not in node:
            raise ConfigError([f"unknown key '{key}'"])
        node[leaf] = value

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config)

    def to_experiment_config(self) -> ExperimentConfig:
        """Validate everything and build the frozen configuration.

        Raises:
            ConfigError: Listing every violated constraint with its field path.
        """
        problems = _check(self._config)
        fleet = road = None
        if not problems:
            try:
                fleet = FleetConfig(
                    vehicles=self.get("fleet.vehicles"),
                    rel_sigma_fleet=float(self.get("fleet.rel_sigma_fleet")),
                    rel_sigma_model=float(self.get("fleet.rel_sigma_model")),
                    base=VehicleParams(**{k: float(v) for k, v in self.get("fleet.base").items()}),
                )
            except (TypeError, ValueError) as e:
                problems.append(f"fleet.base: {e}")
            try:
                road = JdpParams.from_dict(self.get("road"))
            except (TypeError, ValueError) as e:
                problems.append(f"road: {e}")
        if problems:
            raise ConfigError(problems)

        p = self._config["privacy"]
        r = self._config["run"]
        return ExperimentConfig(
            fleet=fleet,
            road=road,
            estimator=EstimatorConfig(gamma=float(self.get("estimator.gamma")),
                                      noise_std=float(self.get("estimator.noise_std"))),
            privacy=PrivacyConfig(
                enabled=p["enabled"], n1=p["n1"], n2=p["n2"], random_orders=p["random_orders"],
                max_order=p["max_order"],
                pole_band=(tuple(map(float, p["pole_real_band"])), tuple(map(float, p["pole_imag_band"]))),
                zero_band=(tuple(map(float, p["zero_real_band"])), tuple(map(float, p["zero_imag_band"]))),
                compare_plain=p["compare_plain"],
            ),
            attacker=AttackerConfig(enabled=self.get("attacker.enabled"),
                                    assumed_order=self.get("attacker.assumed_order"),
                                    threshold=float(self.get("attacker.threshold"))),
            run=RunConfig(
                trials=r["trials"], master_seed=r["master_seed"], dt=float(r["dt"]),
                horizon=float(r["horizon"]), settle_time=float(r["settle_time"]),
                t_trim=float(r["t_trim"]), workers=r["workers"], domain=r["domain"],
                padding=r["padding"], regularize=r["regularize"], relay_mask=_relay_mask(r),
                mse_space=r["mse_space"], output_dir=str(r["output_dir"]),
            ),
            source=self.to_dict(),
        )


def _merge(target: Dict[str, Any], doc: Dict[str, Any], prefix: str, unknown: List[str]):
    for key, value in doc.items():
        path = f"{prefix}{key}"
        if key not in target:
            unknown.append(path)
        elif isinstance(target[key], dict):
            if isinstance(value, dict):
                _merge(target[key], value, f"{path}.", unknown)
            else:
                unknown.append(path)
        else:
            target[key] = value


def _relay_mask(run: Dict[str, Any]) -> float:
    if run["relay_mask"] == MASK_FROM_TRIM:
        return float(run["t_trim"])
    return float(run["relay_mask"])


def _bool(
name: str, value) -> Tuple[bool, Optional[str]]:
    if isinstance(value, bool):
        return True, None
    return False, f"{name} must be true or false"


def _choice(name: str, value, choices) -> Tuple[bool, Optional[str]]:
    if value in choices:
        return True, None
    return False, f"{name} must be one of {', '.join(choices)}"


def _check(cfg: Dict[str, Any]) -> List[str]:
    v = Validators
    f, rd, e, p, a, r = (cfg[k] for k in ("fleet", "road", "estimator", "privacy", "attacker", "run"))
    checks = [
        ("fleet.vehicles", v.validate_min_int("vehicles", f["vehicles"], 1)),
        ("fleet.rel_sigma_fleet", v.validate_range("rel_sigma_fleet", f["rel_sigma_fleet"], 0.0, 0.3,
                                                   high_open=True)),
        ("fleet.rel_sigma_model", v.validate_range("rel_sigma_model", f["rel_sigma_model"], 0.0, 0.3,
                                                   high_open=True)),
        *((f"fleet.base.{k}", v.validate_positive(k, val)) for k, val in f["base"].items()),
        ("road.lambda", v.validate_non_negative("lambda", rd["lambda"])),
        ("road.mu_eta", v.validate_vector("mu_eta", rd["mu_eta"], 2)),
        ("road.sigma_eta", v.validate_matrix("sigma_eta", rd["sigma_eta"], (2, 2), psd=True)),
        ("road.sigma_zeta", v.validate_matrix("sigma_zeta", rd["sigma_zeta"], (2, 2))),
        ("road.shared_arrivals", _bool("shared_arrivals", rd["shared_arrivals"])),
        ("estimator.gamma", v.validate_gamma(e["gamma"])),
        ("estimator.noise_std", v.validate_non_negative("noise_std", e["noise_std"])),
        ("privacy.enabled", _bool("enabled", p["enabled"])),
        ("privacy.n1", v.validate_min_int("n1", p["n1"], 1)),
        ("privacy.n2", v.validate_min_int("n2", p["n2"], 1)),
        ("privacy.random_orders", _bool("random_orders", p["random_orders"])),
        ("privacy.max_order", v.validate_min_int("max_order", p["max_order"], 1)),
        ("privacy.pole_real_band", v.validate_left_half_band("pole_real_band", p["pole_real_band"])),
        ("privacy.pole_imag_band", v.validate_band("pole_imag_band", p["pole_imag_band"])),
        ("privacy.zero_real_band", v.validate_left_half_band("zero_real_band", p["zero_real_band"])),
        ("privacy.zero_imag_band", v.validate_band("zero_imag_band", p["zero_imag_band"])),
        ("privacy.compare_plain", _bool("compare_plain", p["compare_plain"])),
        ("attacker.enabled", _bool("enabled", a["enabled"])),
        ("attacker.assumed_order", v.validate_min_int("assumed_order", a["assumed_order"], 1)),
        ("attacker.threshold", v.validate_non_negative("threshold", a["threshold"])),
        ("run.trials", v.validate_min_int("trials", r["trials"], 1)),
        ("run.master_seed", v.validate_min_int("master_seed", r["master_seed"], 0)),
        ("run.dt", v.validate_positive("dt", r["dt"])),
        ("run.horizon", v.validate_positive("horizon", r["horizon"])),
        ("run.settle_time", v.validate_non_negative("settle_time", r["settle_time"])),
        ("run.t_trim", v.validate_non_negative("t_trim", r["t_trim"])),
        ("run.workers", v.validate_min_int("workers", r["workers"], 1)),
        ("run.domain", _choice("domain", r["domain"], (FREQUENCY, TIME))),
        ("run.padding", v.validate_min_int("padding", r["padding"], 1)),
        ("run.regularize", _bool("regularize", r["regularize"])),
        ("run.relay_mask", (True, None) if r["relay_mask"] == MASK_FROM_TRIM
         else v.validate_non_negative("relay_mask", r["relay_mask"])),
        ("run.mse_space", _choice("mse_space", r["mse_space"], (PROFILE, VELOCITY))),
    ]
    problems = [f"{path}: {msg}" for path, (ok, msg) in checks if not ok]
    if not problems:
        if float(r["t_trim"]) >= float(r["horizon"]):
            problems.append("run.t_trim: t_trim must be shorter than horizon")
        if float(r["dt"]) >= float(r["horizon"]):
            problems.append("run.dt: dt must be shorter than horizon")
    return problems


def validate_config(config_path: Optional[Path]) -> ExperimentConfig:
    """Parse, default and validate an experiment file.

    Raises:
        ConfigError: With one message per violated constraint.
    """
    return ConfigManager(config_path).to_experiment_config()
