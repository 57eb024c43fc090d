"""Configuration management for skewshadow experiments."""

import logging
import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from dotenv import load_dotenv

from skewshadow.model import validate as validate_params
from skewshadow.utils.exceptions import ConfigurationError

COMMANDS = ("exponent", "radius", "simulate", "sweep", "ruin", "rate")
FORMATS = ("csv", "json")

SEED_ENV = "SKEWSHADOW_SEED"
THREADS_ENV = "SKEWSHADOW_THREADS"
LOG_LEVEL_ENV = "SKEWSHADOW_LOG_LEVEL"

_SEED_LIMIT = 1 << 64


@dataclass
class ToleranceConfig:
    """Numerical tolerances."""

    statistic: float = 1e-10  # relative bisection width of k_fast
    oracle: float = 1e-9  # oracle vs d*K agreement
    ruin: float = 1e-12  # |Phi(b)|
    rate: float = 1e-12  # bisection width in t
    guard: float = 1e-9  # relative K ~ L band recomputed exactly

    def __post_init__(self):
        for item in fields(self):
            value = getattr(self, item.name)
            if not _positive(value):
                raise ConfigurationError(
                    f"tolerance {item.name} must be a positive number, got {value!r}",
                    config_key=f"tolerances.{item.name}",
                )


@dataclass
class ExperimentConfig:
    """Everything one CLI command needs, file and flags merged."""

    command: Optional[str] = None

    # Model
    lambda0: float = 0.5
    lambda1: float = 3.0

    # Sweep / estimation
    epsilon: float = 1.0
    c_values: List[float] = field(default_factory=lambda: [1.0, 3.0])
    n_values: List[int] = field(default_factory=lambda: [200, 800, 3200])
    samples: int = 2000
    seed: int = 0
    threads: int = 1

    # Single pseudo-orbit (simulate / radius)
    instance_path: Optional[str] = None
    emit_instance: Optional[str] = None
    noise: float = 1.0
    length: int = 100
    sample_index: int = 0
    check: bool = True

    # Ruin / rate tables
    ruin_levels: List[float] = field(default_factory=lambda: [3.0, 5.0, 8.0])
    eps_values: List[float] = field(default_factory=lambda: [0.05, 0.1, 0.2])
    horizon: Optional[int] = None

    # Output
    output_path: Optional[str] = None
    format: str = "csv"

    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)

    # Observability
    log_level: str = "INFO"
    log_json: bool = True
    enable_metrics: bool = False

    @property
    def tol(self) -> float:
        return self.tolerances.statistic

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Create config from dictionary."""
        data = dict(data)
        known = {item.name for item in fields(cls)}
        tolerances = dict(data.pop("tolerances", None) or {})
        if "tol" in data:
            tolerances["statistic"] = data.pop("tol")

        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(
                f"Unknown config keys: {', '.join(unknown)}", config_key=unknown[0]
            )
        try:
            return cls(tolerances=ToleranceConfig(**tolerances), **data)
        except TypeError as e:
            raise ConfigurationError(
                f"Invalid tolerances: {e}", config_key="tolerances"
            )

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        data = {item.name: getattr(self, item.name) for item in fields(self)}
        data["c_values"] = list(self.c_values)
        data["n_values"] = list(self.n_values)
        data["ruin_levels"] = list(self.ruin_levels)
        data["eps_values"] = list(self.eps_values)
        data["tolerances"] = {
            item.name: getattr(self.tolerances, item.name)
            for item in fields(self.tolerances)
        }
        return data

    def validate(self) -> None:
        """Validate configuration.

        Raises:
            ParameterError: lambda0/lambda1 violate the model constraints.
            ConfigurationError: any other field is out of range.
        """
        if self.command is not None and self.command not in COMMANDS:
            raise ConfigurationError(
                f"Unknown command: {self.command}", config_key="command"
            )

        validate_params(self.lambda0, self.lambda1)

        if self.format not in FORMATS:
            raise ConfigurationError(
                f"Unsupported output format: {self.format}", config_key="format"
            )

        if not _positive(self.epsilon):
            raise ConfigurationError("epsilon must be positive", config_key="epsilon")

        if not self.c_values or not all(_positive(c) for c in self.c_values):
            raise ConfigurationError(
                "c_values must be a non-empty list of positive numbers",
                config_key="c_values",
            )

        if not self.n_values or not all(_count(n, 1) for n in self.n_values):
            raise ConfigurationError(
                "n_values must be a non-empty list of integers >= 1",
                config_key="n_values",
            )

        if not _count(self.samples, 1):
            raise ConfigurationError(
                "samples must be an integer >= 1", config_key="samples"
            )

        if not _count(self.seed, 0) or self.seed >= _SEED_LIMIT:
            raise ConfigurationError(
                "seed must be a 64-bit unsigned integer", config_key="seed"
            )

        if not _count(self.threads, 0):
            raise ConfigurationError(
                "threads must be an integer >= 0", config_key="threads"
            )

        if not (_positive(self.noise) or self.noise == 0):
            raise ConfigurationError(
                "noise must be finite and >= 0", config_key="noise"
            )

        if not _count(self.length, 1):
            raise ConfigurationError(
                "length must be an integer >= 1", config_key="length"
            )

        if not _count(self.sample_index, 0):
            raise ConfigurationError(
                "sample_index must be an integer >= 0", config_key="sample_index"
            )

        if not self.ruin_levels or not all(_positive(c) for c in self.ruin_levels):
            raise ConfigurationError(
                "ruin_levels must be a non-empty list of positive numbers",
                config_key="ruin_levels",
            )

        if not self.eps_values or not all(_positive(e) for e in self.eps_values):
            raise ConfigurationError(
                "eps_values must be a non-empty list of positive numbers",
                config_key="eps_values",
            )

        if self.horizon is not None and not _count(self.horizon, 1):
            raise ConfigurationError(
                "horizon must be an integer >= 1", config_key="horizon"
            )

        if not isinstance(getattr(logging, str(self.log_level).upper(), None), int):
            raise ConfigurationError(
                f"Unknown log level: {self.log_level}", config_key="log_level"
            )

        if self.command == "radius" and not self.instance_path:
            raise ConfigurationError(
                "radius needs an instance file", config_key="instance_path"
            )


def _positive(value: Any) -> bool:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return False
    return math.isfinite(value) and value > 0


def _count(value: Any, minimum: int) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= minimum


def load_config(
    config_path: Optional[Union[str, Path]] = None,
    env_file: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Load configuration from file, environment variables and flag overrides.

    Precedence: overrides > environment > file > defaults.

    Args:
        config_path: Path to a YAML or JSON config file
        env_file: Path to .env file
        overrides: Values set on the command line; None entries are ignored

    Returns:
        Validated ExperimentConfig instance
    """
    # Load environment variables
    if env_file:
        load_dotenv(env_file)
    else:
        load_dotenv()  # Load from .env in current directory

    config_data: Dict[str, Any] = {}

    # JSON is a subset of YAML, so one loader covers both
    if config_path:
        config_path = Path(config_path)
        if not config_path.exists():
            raise ConfigurationError(
                f"Config file not found: {config_path}", config_key="config"
            )

        try:
            with open(config_path) as f:
                file_config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid config file: {e}", config_key="config")
        if not isinstance(file_config, dict):
            raise ConfigurationError(
                "Config file must contain a mapping", config_key="config"
            )
        config_data.update(file_config)

    _deep_merge(config_data, _load_from_env())
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    _deep_merge(config_data, flags)

    config = ExperimentConfig.from_dict(config_data)
    config.validate()

    return config


def _load_from_env() -> Dict[str, Any]:
    """Load configuration from environment variables."""
    config: Dict[str, Any] = {}

    seed = os.getenv(SEED_ENV)
    if seed:
        try:
            config["seed"] = int(seed, 0)
        except ValueError:
            raise ConfigurationError(
                f"{SEED_ENV} is not an integer: {seed!r}", config_key="seed"
            )

    threads = os.getenv(THREADS_ENV)
    if threads:
        try:
            config["threads"] = int(threads)
        except ValueError:
            raise ConfigurationError(
                f"{THREADS_ENV} is not an integer: {threads!r}", config_key="threads"
            )

    if os.getenv(LOG_LEVEL_ENV):
        config["log_level"] = os.getenv(LOG_LEVEL_ENV)

    return config


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> None:
    """Deep merge override dict into base dict."""
    for key, value in override.items():
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            _deep_merge(base[key], value)
        else:
            base[key] = value


def save_config(config: ExperimentConfig, path: Union[str, Path]) -> None:
    """Save configuration to YAML file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    try:
        with open(path, "w") as f:
            yaml.safe_dump(config.to_dict(), f, default_flow_style=False, indent=2)
    except OSError as e:
        raise ConfigurationError(f"Failed to save config: {e}")
