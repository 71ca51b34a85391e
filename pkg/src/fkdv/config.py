from __future__ import annotations

import os
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml
from dotenv import load_dotenv

from fkdv.errors import ConfigError


@dataclass
class KernelConfig:
    grid_resolution: int = 257
    modes: int | None = None  # None: chosen per alpha from the tail bound
    lambda_resolution: int = 65


@dataclass
class ContinuationConfig:
    alpha: float = 2.0
    k: int = 1
    modes: int = 256
    max_modes: int = 2048
    s_start: float | None = None  # default 0.05 * m(k)
    s_step: float | None = None  # default 0.05 * m(k)
    s_step_max: float | None = None  # default 0.5 * m(k)
    step_grow: float = 2.0
    step_shrink: float = 0.5
    step_floor_ratio: float = 1e-6
    fast_iterations: int = 3
    newton_tol: float = 1e-11
    newton_max_iter: int = 25
    damping_floor: float = 2.0 ** -6
    stop_crest_gap: float = 1e-3  # relative to mu
    escalate_crest_gap: float = 0.05  # relative to mu
    escalate_factor: int = 4
    max_points: int = 400
    direction: int = 1
    pseudo_arclength: bool = False

    def validate(self) -> None:
        """Reject parameter combinations before any computation starts."""
        if not self.alpha > 1:
            raise ConfigError("alpha must exceed 1")
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.modes < 4 * self.k:
            raise ConfigError(f"modes must be at least 4k = {4 * self.k}")
        if self.max_modes < self.modes:
            raise ConfigError("max_modes must be at least modes")
        positive = {
            "newton_tol": self.newton_tol,
            "stop_crest_gap": self.stop_crest_gap,
            "escalate_crest_gap": self.escalate_crest_gap,
            "step_floor_ratio": self.step_floor_ratio,
        }
        for name in ("s_start", "s_step", "s_step_max"):
            value = getattr(self, name)
            if value is not None:
                positive[name] = value
        for name, value in positive.items():
            if not value > 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 < self.step_shrink < 1 < self.step_grow:
            raise ConfigError("step factors must satisfy 0 < shrink < 1 < grow")
        if not 0 < self.damping_floor <= 1:
            raise ConfigError("damping_floor must lie in (0, 1]")
        if self.newton_max_iter < 1:
            raise ConfigError("newton_max_iter must be at least 1")
        if self.escalate_factor < 2:
            raise ConfigError("escalate_factor must be at least 2")
        if self.max_points < 2:
            raise ConfigError("max_points must be at least 2")
        if self.direction not in (1, -1):
            raise ConfigError("direction must be +1 or -1")


@dataclass
class DiagnosticsConfig:
    oversample: int = 8  # grid points per mode and period
    tolerance_factor: float = 10.0
    smooth_gap_ratio: float = 0.1
    noise_floor: float = 1e-11
    exponent_samples: int = 12


@dataclass
class LoggingConfig:
    level: str = "INFO"
    file: str | None = None  # optional run log, always at DEBUG


@dataclass
class OutputConfig:
    directory: str = "out"


@dataclass
class Settings:
    kernel: KernelConfig = field(default_factory=KernelConfig)
    continuation: ContinuationConfig = field(default_factory=ContinuationConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


_ENV_VAR_PATTERN = re.compile(r"\$\{(\w+)(?::-(.*?))?\}")


def _resolve_env_vars(value: str) -> str:
    """Resolve ${VAR:-default} patterns in a string."""
    def replacer(match: re.Match) -> str:
        var_name = match.group(1)
        default = match.group(2) or ""
        return os.environ.get(var_name, default)
    return _ENV_VAR_PATTERN.sub(replacer, str(value))


def _coerce(value, target: str):
    """Convert a raw YAML scalar to the annotated dataclass field type."""
    if isinstance(value, str):
        value = _resolve_env_vars(value)
        if value.strip().lower() in ("", "null", "none", "~"):
            return None
    if value is None:
        return None
    if target.startswith("bool"):
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    if target.startswith("int"):
        return int(value)
    if target.startswith("float"):
        return float(value)
    return str(value)


def _build_section(cls, raw: dict | None):
    """Instantiate a config dataclass from a YAML mapping, ignoring unknown keys."""
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"Section for {cls.__name__} must be a mapping")
    kwargs = {}
    for f in fields(cls):
        if f.name in raw:
            try:
                kwargs[f.name] = _coerce(raw[f.name], str(f.type))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Invalid value for {f.name}: {raw[f.name]!r}") from e
            if kwargs[f.name] is None and "None" not in str(f.type):
                raise ConfigError(f"{f.name} may not be empty")
    return cls(**kwargs)


def load_settings(config_path: str | Path | None = None) -> Settings:
    """Load settings from YAML config and environment variables."""
    load_dotenv()

    if config_path is None:
        # CWD first, then the source-relative default
        cwd_path = Path.cwd() / "config" / "settings.yaml"
        src_path = Path(__file__).parent.parent.parent / "config" / "settings.yaml"
        config_path = cwd_path if cwd_path.exists() else src_path
        if not config_path.exists():
            return Settings()
    config_path = Path(config_path)

    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")

    with open(config_path) as f:
        try:
            raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Malformed config file {config_path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {config_path} must hold a mapping of sections")

    return Settings(
        kernel=_build_section(KernelConfig, raw.get("kernel")),
        continuation=_build_section(ContinuationConfig, raw.get("continuation")),
        diagnostics=_build_section(DiagnosticsConfig, raw.get("diagnostics")),
        logging=_build_section(LoggingConfig, raw.get("logging")),
        output=_build_section(OutputConfig, raw.get("output")),
    )


def with_overrides(config, **overrides):
    """Return a copy of a config dataclass with the non-None overrides applied."""
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
