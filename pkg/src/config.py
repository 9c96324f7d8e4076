"""Configuration loader for sigcurve."""

import logging
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import yaml

from src.utils import ConfigError


logger = logging.getLogger(__name__)


ENV_VAR = "SIGCURVE_CONFIG"


class AppConfig:
    """Numeric configuration shared by every operation.

    Loaded from YAML (JSON files parse the same way) and merged over DEFAULTS;
    per-flag overrides win over the file.
    """

    # Default values
    DEFAULTS = {
        "differentiation_tol": 1e-3,
        "quadrature_tol": 1e-9,
        "comparison_tol": 1e-6,
        "vertex_tol": 1e-4,
        "vertex_floor": 1e-8,
        "injectivity_tol": 1e-3,
        "injectivity_separation": 0.05,
        "partition_margin": 0.05,
        "flat_tol": 1e-6,
        "max_turn_per_node": 0.5,
        "spectral_keep": 0.125,
        "integrator_steps": 4096,
        "resample_nodes": 1024,
        "resample_density": 4,
        "spline_degree": 5,
        "picard_tol": 1e-10,
        "picard_max_iterations": 200,
        "bisection_tol": 1e-12,
        "threshold_factor": 1e-3,
        "intersection_tol": 1e-3,
        "affine_exponent": "1/3",
        "seed": 0,
        "output_format": "csv",
        "workers": "auto",
    }

    POSITIVE_REALS = [
        "differentiation_tol",
        "quadrature_tol",
        "comparison_tol",
        "vertex_tol",
        "vertex_floor",
        "injectivity_tol",
        "injectivity_separation",
        "partition_margin",
        "flat_tol",
        "max_turn_per_node",
        "spectral_keep",
        "picard_tol",
        "bisection_tol",
        "threshold_factor",
        "intersection_tol",
    ]
    VALID_EXPONENTS = [Fraction(1, 2), Fraction(1, 3)]
    VALID_FORMATS = ["csv", "json"]
    VALID_SPLINE_DEGREES = [3, 5]
    MIN_NODES = 64

    def __init__(
        self,
        config_path: Optional[str] = None,
        overrides: Optional[dict[str, Any]] = None,
        load_file: bool = True,
    ):
        """Load configuration from file, then apply overrides.

        Args:
            config_path: Path to the config file. If None, uses $SIGCURVE_CONFIG
                or ~/.sigcurve/config.yaml
            overrides: Values that take precedence over the file (CLI flags)
            load_file: Skip the filesystem entirely when False

        Raises:
            ConfigError: If the file is unreadable or a value is invalid
        """
        if config_path is None:
            env_path = os.environ.get(ENV_VAR)
            if env_path:
                config_path = Path(env_path).expanduser()
            else:
                config_path = Path.home() / ".sigcurve" / "config.yaml"

        self.config_path = Path(config_path)
        self._config: dict[str, Any] = self.DEFAULTS.copy()
        if load_file:
            self._load_config()
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key not in self.DEFAULTS:
                raise ConfigError(key, "Unknown configuration key")
            self._config[key] = value
        self.validate()

    @classmethod
    def defaults(cls) -> "AppConfig":
        """Pure-default configuration; never touches the filesystem."""
        return cls(load_file=False)

    def _load_config(self) -> None:
        """Load and parse the config file."""
        if not self.config_path.exists():
            return

        try:
            with open(self.config_path, "r") as f:
                loaded = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError("yaml_syntax", f"Invalid YAML syntax: {e}")
        except Exception as e:
            raise ConfigError("file_read", f"Failed to read config file: {e}")

        if not isinstance(loaded, dict):
            raise ConfigError("file_read", "Config file must contain a mapping")
        unknown = sorted(set(loaded) - set(self.DEFAULTS))
        if unknown:
            logger.warning("Ignoring unknown config keys: %s", ", ".join(unknown))
        self._config.update({k: v for k, v in loaded.items() if k in self.DEFAULTS})

    def replace(self, **overrides: Any) -> "AppConfig":
        """Copy with some values overridden (file is not re-read)."""
        clone = AppConfig.__new__(AppConfig)
        clone.config_path = self.config_path
        clone._config = {**self._config, **{k: v for k, v in overrides.items() if v is not None}}
        clone.validate()
        return clone

    def as_dict(self) -> dict[str, Any]:
        return dict(self._config)

    @property
    def differentiation_tol(self) -> float:
        """Tolerance for in-phase and derivative-consistency checks."""
        return float(self._config["differentiation_tol"])

    @property
    def quadrature_tol(self) -> float:
        """Tolerance for numerical quadrature."""
        return float(self._config["quadrature_tol"])

    @property
    def comparison_tol(self) -> float:
        """Tolerance for equality of reals and closure checks."""
        return float(self._config["comparison_tol"])

    @property
    def vertex_tol(self) -> float:
        """Vertex threshold relative to max|kappa'|."""
        return float(self._config["vertex_tol"])

    @property
    def vertex_floor(self) -> float:
        """Absolute floor of the vertex threshold."""
        return float(self._config["vertex_floor"])

    @property
    def injectivity_tol(self) -> float:
        """Minimum sample gap (relative to signature extent) for injectivity."""
        return float(self._config["injectivity_tol"])

    @property
    def injectivity_separation(self) -> float:
        """Parameter separation (fraction of length) for injectivity pairs."""
        return float(self._config["injectivity_separation"])

    @property
    def partition_margin(self) -> float:
        """Fraction of a derivative column's sup that makes it the preferred witness."""
        return float(self._config["partition_margin"])

    @property
    def flat_tol(self) -> float:
        """Columns below this (scaled) level are treated as identically zero."""
        return float(self._config["flat_tol"])

    @property
    def max_turn_per_node(self) -> float:
        """Largest tangent turn (radians) allowed between neighbouring nodes."""
        return float(self._config["max_turn_per_node"])

    @property
    def spectral_keep(self) -> float:
        """Fourier modes kept when differentiating closed curves, as a fraction of the node count."""
        return float(self._config["spectral_keep"])

    @property
    def integrator_steps(self) -> int:
        """Fixed RK4 step count."""
        return int(self._config["integrator_steps"])

    @property
    def resample_nodes(self) -> int:
        """Arc-length nodes used when a curve is resampled."""
        return int(self._config["resample_nodes"])

    @property
    def resample_density(self) -> int:
        """Quadrature intervals per node when tabulating arc length."""
        return int(self._config["resample_density"])

    @property
    def spline_degree(self) -> int:
        """Degree of the interpolating splines (3 or 5)."""
        return int(self._config["spline_degree"])

    @property
    def picard_tol(self) -> float:
        """Stopping tolerance for Picard iteration."""
        return float(self._config["picard_tol"])

    @property
    def picard_max_iterations(self) -> int:
        """Iteration cap for Picard iteration."""
        return int(self._config["picard_max_iterations"])

    @property
    def bisection_tol(self) -> float:
        """Bracket width at which monotone inversion stops."""
        return float(self._config["bisection_tol"])

    @property
    def threshold_factor(self) -> float:
        """Default congruence threshold as a fraction of curve length."""
        return float(self._config["threshold_factor"])

    @property
    def intersection_tol(self) -> float:
        """Tolerance on self-intersection parameter sequences."""
        return float(self._config["intersection_tol"])

    @property
    def affine_exponent(self) -> float:
        """Exponent p in the affine arc length alpha = integral of kappa**p ds."""
        return float(_parse_exponent(self._config["affine_exponent"]))

    @property
    def seed(self) -> int:
        """Base seed for experiments."""
        return int(self._config["seed"])

    @property
    def output_format(self) -> str:
        """Tabular output format (csv or json)."""
        return self._config["output_format"]

    @property
    def workers(self) -> str | int:
        """Worker threads for trial fan-out ("auto" or positive int)."""
        return self._config["workers"]

    def validate(self) -> None:
        """Validate configuration values.

        Raises:
            ConfigError: If any configuration value is invalid
        """
        for key in self.POSITIVE_REALS:
            value = self._config[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
                raise ConfigError(key, f"must be a positive number, got: {value!r}")

        for key in ("integrator_steps", "resample_nodes"):
            value = self._config[key]
            if isinstance(value, bool) or not isinstance(value, int) or value < self.MIN_NODES:
                raise ConfigError(key, f"must be an integer >= {self.MIN_NODES}, got: {value!r}")

        density = self._config["resample_density"]
        if isinstance(density, bool) or not isinstance(density, int) or density < 1:
            raise ConfigError("resample_density", f"must be a positive integer, got: {density!r}")

        if self._config["spline_degree"] not in self.VALID_SPLINE_DEGREES:
            raise ConfigError("spline_degree", "Valid options: 3, 5")

        if self._config["spectral_keep"] > 0.5:
            raise ConfigError("spectral_keep", f"must be at most 0.5, got: {self._config['spectral_keep']!r}")

        iterations = self._config["picard_max_iterations"]
        if isinstance(iterations, bool) or not isinstance(iterations, int) or iterations < 1:
            raise ConfigError("picard_max_iterations", f"must be a positive integer, got: {iterations!r}")

        try:
            exponent = _parse_exponent(self._config["affine_exponent"])
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError("affine_exponent", str(e))
        if exponent not in self.VALID_EXPONENTS:
            raise ConfigError("affine_exponent", "Valid options: 1/2, 1/3")

        seed = self._config["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got: {seed!r}")

        fmt = self._config["output_format"]
        if fmt not in self.VALID_FORMATS:
            raise ConfigError("output_format",
                f"Invalid format '{fmt}'. Valid options: {', '.join(self.VALID_FORMATS)}")

        workers = self._config["workers"]
        if isinstance(workers, str):
            if workers != "auto":
                raise ConfigError("workers", "Must be 'auto' or a positive integer")
        elif isinstance(workers, int) and not isinstance(workers, bool):
            if workers < 1:
                raise ConfigError("workers", f"workers must be >= 1, got: {workers}")
        else:
            raise ConfigError("workers", f"workers must be 'auto' or int, got: {type(workers)}")

        if self._config["threshold_factor"] >= 1:
            logger.warning(
                "threshold_factor %s accepts curves whose distance exceeds their length;"
                " values around 1e-3 are typical.",
                self._config["threshold_factor"],
            )


def _parse_exponent(value: Any) -> Fraction:
    """Accept "1/3", 0.5, 1/3 (float) and return the matching Fraction."""
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(float(value)).limit_denominator(12)


_DEFAULT: Optional[AppConfig] = None


def default_config() -> AppConfig:
    """Shared pure-default configuration for library calls without a config."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = AppConfig.defaults()
    return _DEFAULT


def resolve(config: Optional[AppConfig]) -> AppConfig:
    return config if config is not None else default_config()
