"""Configuration management for moment-realizer."""

import os
from pathlib import Path
from typing import Any, Optional, Union
import yaml
from dataclasses import dataclass, field, asdict
from dotenv import load_dotenv

from .exceptions import ConfigError

DEFAULT_ENUMERATION_CAP = 2_000_000

ENV_PREFIX = "MOMENT_REALIZER_"


@dataclass
class LimitsConfig:
    """Resource caps."""
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    lp_size_cap: int = 4_000_000
    max_pivots: int = 100_000


@dataclass
class SolverConfig:
    """Solver behaviour."""
    debug_tableau: bool = False
    verify: bool = False
    default_ell0: str = "1"


@dataclass
class OutputConfig:
    """Output configuration."""
    format: str = "json"
    output_dir: str = "output"
    indent: int = 2


@dataclass
class ProcessingConfig:
    """Batch processing configuration."""
    num_workers: int = 1
    skip_existing: bool = True


SECTIONS = {
    'limits': LimitsConfig,
    'solver': SolverConfig,
    'output': OutputConfig,
    'processing': ProcessingConfig,
}

# env var suffix -> (section, key, parser)
ENV_OVERRIDES = {
    "ENUMERATION_CAP": ("limits", "enumeration_cap", int),
    "MAX_PIVOTS": ("limits", "max_pivots", int),
    "NUM_WORKERS": ("processing", "num_workers", int),
}


@dataclass
class Config:
    """Main configuration class."""
    limits: LimitsConfig = field(default_factory=LimitsConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    processing: ProcessingConfig = field(default_factory=ProcessingConfig)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "Config":
        """Load configuration from YAML file."""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Configuration file not found: {path}")

        try:
            with open(path, 'r') as f:
                data = yaml.safe_load(f) or {}

            config = cls()
            for name, section_cls in SECTIONS.items():
                if name in data:
                    setattr(config, name, section_cls(**(data[name] or {})))

            return config

        except ConfigError:
            raise
        except Exception as e:
            raise ConfigError(f"Failed to load configuration: {str(e)}")

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None,
             use_env: bool = True) -> "Config":
        """Load from a file (or defaults) and apply environment overrides."""
        config = cls.from_file(path) if path else cls()
        if use_env:
            config.apply_env()
        return config

    def apply_env(self, environ: Optional[dict] = None):
        """Apply MOMENT_REALIZER_* overrides, reading a .env file first."""
        if environ is None:
            load_dotenv()
            environ = os.environ

        for suffix, (section, key, parser) in ENV_OVERRIDES.items():
            name = ENV_PREFIX + suffix
            if name not in environ:
                continue
            raw = environ[name]
            try:
                value = parser(raw)
            except ValueError:
                raise ConfigError(f"Invalid value for {name}: {raw!r}")
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
            setattr(getattr(self, section), key, value)

    def to_dict(self) -> dict:
        return {name: asdict(getattr(self, name)) for name in SECTIONS}

    def save(self, path: Union[str, Path]):
        """Save configuration to YAML file."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(path, 'w') as f:
            yaml.dump(self.to_dict(), f, default_flow_style=False)

    def to_yaml(self) -> str:
        """Convert configuration to YAML string."""
        return yaml.dump(self.to_dict(), default_flow_style=False)

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by dot-notation key."""
        value = self
        for part in key.split('.'):
            if not hasattr(value, part):
                return default
            value = getattr(value, part)
        return value

    def set(self, key: str, value: Any):
        """Set configuration value by dot-notation key, coercing to the field type."""
        parts = key.split('.')

        if len(parts) != 2 or parts[0] not in SECTIONS:
            raise ConfigError(f"Invalid configuration key: {key}")

        section = getattr(self, parts[0])
        if not hasattr(section, parts[1]):
            raise ConfigError(f"Unknown configuration key: {key}")

        current = getattr(section, parts[1])
        if isinstance(value, str) and not isinstance(current, str):
            value = _coerce(value, type(current), key)
        setattr(section, parts[1], value)

    @classmethod
    def default_config_path(cls) -> Path:
        """Get default configuration file path."""
        locations = [
            Path.cwd() / "moment-realizer.yaml",
            Path.home() / ".config" / "moment-realizer" / "config.yaml",
            Path.home() / ".moment-realizer.yaml"
        ]

        for location in locations:
            if location.exists():
                return location

        return locations[1]

    def merge(self, other: "Config"):
        """Merge another configuration into this one."""
        for section in SECTIONS:
            other_section = getattr(other, section)
            self_section = getattr(self, section)

            for key, value in asdict(other_section).items():
                if value is not None:
                    setattr(self_section, key, value)


def _coerce(raw: str, target: type, key: str) -> Any:
    if target is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"Invalid boolean for {key}: {raw!r}")
    try:
        return target(raw)
    except ValueError:
        raise ConfigError(f"Invalid value for {key}: {raw!r}")


DEFAULT_CONFIG_TEMPLATE = """# moment-realizer configuration

limits:
  enumeration_cap: 2000000   # Max configurations enumerated per instance
  lp_size_cap: 4000000       # Max rows x columns of one LP tableau
  max_pivots: 100000         # Simplex pivot ceiling

solver:
  debug_tableau: false       # Dump simplex tableaus at DEBUG level
  verify: false              # Re-check every verdict before writing it
  default_ell0: "1"          # Total mass used when an instance omits ell0

output:
  format: json               # json or table
  output_dir: output         # Default output directory
  indent: 2                  # JSON indentation

processing:
  num_workers: 1             # Parallel workers for batch runs
  skip_existing: true        # Skip instances that already have a result file
"""


def create_default_config(path: Optional[Union[str, Path]] = None):
    """Create default configuration file."""
    if path is None:
        path = Config.default_config_path()
    else:
        path = Path(path)

    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, 'w') as f:
        f.write(DEFAULT_CONFIG_TEMPLATE)

    return path
