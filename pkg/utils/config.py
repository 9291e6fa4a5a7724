from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from schemas.coarsening import CoarsenerChoice, GLCoarsenerConfig
from schemas.problems import BenchmarkSpec
from schemas.solver import SolverConfig
from utils.exceptions.io import ConfigFileException


class LogLevel(str, Enum):
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class LoggingSettings(BaseSettings):
    """Logging configuration"""
    model_config = SettingsConfigDict(env_prefix="GLAMG_", env_file=".env", extra="ignore")

    LOG_LEVEL: LogLevel = Field(LogLevel.WARNING)
    LOG_TO_FILE: bool = Field(False)
    LOG_DIR: str = Field("logs")
    JSON_LOGS: bool = Field(True)


class Settings(BaseSettings):
    """Main settings container: solver, benchmark sweep and logging"""
    model_config = SettingsConfigDict(
        env_prefix="GLAMG_",
        env_nested_delimiter="__",
        env_file=".env",
        extra="ignore",
    )

    solver: SolverConfig = Field(default_factory=SolverConfig)
    benchmark: BenchmarkSpec = Field(default_factory=BenchmarkSpec)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)


# Short-key resolution: a bare field name is looked up in these sections in order
_SOLVER_FIELDS = set(SolverConfig.model_fields)
_COARSENER_FIELDS = set(CoarsenerChoice.model_fields)
_GL_FIELDS = set(GLCoarsenerConfig.model_fields)
_BENCHMARK_FIELDS = set(BenchmarkSpec.model_fields)
_SECTION_PREFIXES = {
    "walks": ("solver", "coarsener", "gl", "walks"),
    "embedding": ("solver", "coarsener", "gl", "embedding"),
    "clustering": ("solver", "coarsener", "gl", "clustering"),
    "gl": ("solver", "coarsener", "gl"),
    "coarsener": ("solver", "coarsener"),
    "smoother": ("solver", "smoother"),
    "prolongation_smoothing": ("solver", "coarsener", "prolongation_smoothing"),
    "benchmark": ("benchmark",),
    "solver": ("solver",),
    "logging": ("logging",),
}


def qualify_key(key: str) -> tuple:
    """Map a flat config key onto its path inside Settings"""
    parts = tuple(p.strip() for p in key.split(".") if p.strip())
    if not parts:
        raise ValueError("empty key")
    head, rest = parts[0], parts[1:]
    if head in _SECTION_PREFIXES and rest:
        return _SECTION_PREFIXES[head] + rest
    if len(parts) == 1:
        if head in _SOLVER_FIELDS:
            return ("solver", head)
        if head in _COARSENER_FIELDS:
            return ("solver", "coarsener", head)
        if head in _GL_FIELDS:
            return ("solver", "coarsener", "gl", head)
        if head in _BENCHMARK_FIELDS:
            return ("benchmark", head)
        if head.upper() in LoggingSettings.model_fields:
            return ("logging", head.upper())
    raise ValueError(f"unknown configuration key '{key}'")


def _assign(tree: Dict[str, Any], path: tuple, value: Any) -> None:
    node = tree
    for part in path[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ValueError(f"'{'.'.join(path)}' conflicts with a scalar value")
        node = child
    node[path[-1]] = value


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Parse a flat key=value file into the nested dict Settings expects.

    Blank lines and lines starting with '#' are ignored.

    Raises:
        ConfigFileException: malformed line or unknown key (with line number)
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigFileException(f"cannot read config file: {e}", path=path, original_exception=e)

    tree: Dict[str, Any] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigFileException(f"expected key=value, got '{line}'", line_number=line_number, path=path)
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            _assign(tree, qualify_key(key), value)
        except ValueError as e:
            raise ConfigFileException(str(e), line_number=line_number, path=path)
    return tree


def merge_overrides(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Deep-merge nested dicts; override values win"""
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_overrides(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_settings(
    config_file: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Settings:
    """
    Build Settings from (lowest to highest priority) defaults, .env, environment,
    the key=value config file and explicit overrides (CLI flags).
    """
    values: Dict[str, Any] = {}
    if config_file is not None:
        values = read_config_file(config_file)
    if overrides:
        flat: Dict[str, Any] = {}
        for key, value in overrides.items():
            if value is not None:
                _assign(flat, qualify_key(key), value)
        values = merge_overrides(values, flat)
    return Settings(**values)
