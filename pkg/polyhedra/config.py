"""
Settings for constructions, flex tracing and relation certification.

Values come from the environment (a .env file is honoured through python-dotenv),
optionally overridden by a JSON or TOML config file and finally by CLI flags.
"""
import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from dotenv import load_dotenv

from .errors import ConfigurationError
from .log import LEVELS, get_logger, set_level

logger = get_logger('config')

TARGETS = ('type1', 'type2', 'type3', 'steffen', 'custom')


@dataclass(frozen=True)
class Settings:
    dps: int = 50
    angle_coefficient_bound: int = 8
    pi_coefficient_bound: int = 16
    newton_tolerance: float = 1e-12
    newton_max_iterations: int = 50
    min_step_fraction: float = 1e-6
    invariant_tolerance: float = 1e-9
    samples: int = 200
    equator_samples: int = 20
    functionals: int = 5
    seed: int = 20090120
    output_dir: str = 'reports'
    log_level: str = 'INFO'


_ENV_NAMES = {
    'dps': 'FLEX_DPS',
    'angle_coefficient_bound': 'FLEX_ANGLE_BOUND',
    'pi_coefficient_bound': 'FLEX_PI_BOUND',
    'newton_tolerance': 'FLEX_NEWTON_TOL',
    'newton_max_iterations': 'FLEX_NEWTON_MAX_ITER',
    'min_step_fraction': 'FLEX_MIN_STEP_FRACTION',
    'invariant_tolerance': 'FLEX_TOLERANCE',
    'samples': 'FLEX_SAMPLES',
    'equator_samples': 'FLEX_EQUATOR_SAMPLES',
    'functionals': 'FLEX_FUNCTIONALS',
    'seed': 'FLEX_SEED',
    'output_dir': 'FLEX_OUTPUT_DIR',
    'log_level': 'FLEX_LOG_LEVEL',
}


def _coerce(name, raw):
    if name not in _ENV_NAMES:
        raise ConfigurationError(f"Unknown setting: {name}")
    kind = type(getattr(Settings(), name))
    try:
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigurationError(f"Invalid value for {name}: {raw!r}")


def load_settings(config_path=None, **overrides):
    """
    Build the effective settings.

    Args:
        config_path: Optional JSON or TOML file with Settings field names as keys
        **overrides: Explicit values (CLI flags); None values are ignored

    Returns:
        Settings: The validated settings
    """
    load_dotenv()
    values = {}
    for name, env_name in _ENV_NAMES.items():
        raw = os.environ.get(env_name)
        if raw is not None:
            values[name] = _coerce(name, raw)

    if config_path:
        values.update(read_config_file(config_path))

    for name, value in overrides.items():
        if value is not None:
            values[name] = _coerce(name, value)

    known = {f.name for f in fields(Settings)}
    unknown = set(values) - known
    if unknown:
        raise ConfigurationError(f"Unknown settings: {sorted(unknown)}")

    settings = replace(Settings(), **values)
    validate_settings(settings)
    set_level(settings.log_level)
    logger.debug(f"Effective settings: {settings}")
    return settings


def read_config_file(path):
    """Read a JSON or TOML config file into a plain dict of settings."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}")
    text = path.read_text()
    try:
        if path.suffix == '.toml':
            import tomllib
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
    except Exception as e:
        raise ConfigurationError(f"Could not parse config file {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file {path} must contain a table/object")
    unknown = sorted(set(data) - set(_ENV_NAMES))
    if unknown:
        raise ConfigurationError(f"Unknown settings in {path}: {unknown}")
    return {k: _coerce(k, v) for k, v in data.items()}


def validate_settings(settings):
    """Raise ConfigurationError when a setting violates its invariant."""
    if settings.samples < 2:
        raise ConfigurationError(f"samples must be >= 2, got {settings.samples}")
    if settings.dps < 30:
        raise ConfigurationError(f"dps must be >= 30 for relation detection, got {settings.dps}")
    for name in ('newton_tolerance', 'invariant_tolerance', 'min_step_fraction'):
        if getattr(settings, name) <= 0:
            raise ConfigurationError(f"{name} must be positive")
    if settings.angle_coefficient_bound < 1 or settings.pi_coefficient_bound < 1:
        raise ConfigurationError("coefficient bounds must be positive")
    if settings.equator_samples < 1 or settings.functionals < 1:
        raise ConfigurationError("equator_samples and functionals must be positive")
    if settings.log_level.upper() not in LEVELS:
        raise ConfigurationError(f"log_level must be one of {LEVELS}, got {settings.log_level!r}")
