"""Run configuration: command-line flags over environment over ``strategist.toml``."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from strategist.errors import InvalidInput
from strategist.llm.gateway import DEFAULT_BASE_URL, DEFAULT_MODEL, MODES
from strategist.pipeline.models import DEFAULT_INCLUDE_ROLES, Role
from strategist.query import DEFAULT_TAG, FieldTag

CONFIG_FILE = "strategist.toml"
ENGINES = ("offline", "pubmed")

_ENV = {
    "llm_api_key": "LLM_API_KEY",
    "llm_base_url": "LLM_BASE_URL",
    "llm_model": "LLM_MODEL",
    "pubmed_api_key": "PUBMED_API_KEY",
}

# toml section/key -> RunConfig attribute
_TOML_KEYS = {
    ("llm", "api_key"): "llm_api_key",
    ("llm", "base_url"): "llm_base_url",
    ("llm", "model"): "llm_model",
    ("llm", "max_attempts"): "max_attempts",
    ("pubmed", "api_key"): "pubmed_api_key",
    ("pubmed", "retmax"): "retmax",
    ("pubmed", "date_ceiling"): "date_ceiling",
    ("run", "mode"): "mode",
    ("run", "engine"): "engine",
    ("run", "entry"): "entry",
    ("run", "tag"): "tag",
    ("run", "include_roles"): "include_roles",
    ("run", "review_pass"): "review_pass",
    ("run", "parallelism"): "parallelism",
    ("paths", "manifest"): "manifest",
    ("paths", "corpus"): "corpus",
    ("paths", "fixtures"): "fixtures",
    ("paths", "output_dir"): "output_dir",
}


class ConfigError(InvalidInput):
    pass


@dataclass
class RunConfig:
    llm_api_key: str | None = None
    llm_base_url: str = DEFAULT_BASE_URL
    llm_model: str = DEFAULT_MODEL
    max_attempts: int = 3
    pubmed_api_key: str | None = None
    retmax: int = 1000
    date_ceiling: bool = True
    mode: str = "live"
    engine: str = "offline"
    entry: str = "full"
    tag: FieldTag = DEFAULT_TAG
    include_roles: frozenset[Role] = field(default_factory=lambda: DEFAULT_INCLUDE_ROLES)
    review_pass: bool = False
    parallelism: int = 1
    manifest: Path | None = None
    corpus: Path | None = None
    fixtures: Path | None = None
    output_dir: Path = Path("runs")

    @property
    def fixture_dir(self) -> Path | None:
        return self.fixtures / "llm" if self.fixtures is not None else None

    def check(self, *, needs_engine: bool = False) -> RunConfig:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")
        if self.mode in ("replay", "record") and self.fixtures is None:
            raise ConfigError(f"--mode {self.mode} requires a fixtures path (--fixtures)")
        if self.entry not in ("full", "objective", "pico_start"):
            raise ConfigError(f"unknown entry point {self.entry!r}")
        if needs_engine:
            if self.engine not in ENGINES:
                raise ConfigError(f"engine must be one of {', '.join(ENGINES)}")
            if self.engine == "offline" and self.corpus is None:
                raise ConfigError("the offline engine requires a corpus path (--corpus)")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be at least 1")
        return self


def _coerce(name: str, value: Any) -> Any:
    if value is None:
        return None
    try:
        if name == "tag":
            return value if isinstance(value, FieldTag) else FieldTag.parse(str(value))
        if name == "include_roles":
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return frozenset(v if isinstance(v, Role) else Role.parse(str(v)) for v in value)
        if name in ("manifest", "corpus", "fixtures", "output_dir"):
            return Path(value)
        if name in ("retmax", "parallelism", "max_attempts"):
            return int(value)
        if name in ("date_ceiling", "review_pass"):
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if name == "entry":
            return str(value).replace("-", "_")
    except (ValueError, InvalidInput) as exc:
        raise ConfigError(f"bad value for {name}: {exc}") from None
    return value


def read_config_file(path: Path) -> dict[str, Any]:
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    out = {}
    for section, body in data.items():
        if not isinstance(body, dict):
            raise ConfigError(f"{path}: top-level key {section!r} must be a table")
        for key, value in body.items():
            attr = _TOML_KEYS.get((section, key))
            if attr is None:
                raise ConfigError(f"{path}: unknown setting [{section}] {key}")
            out[attr] = value
    return out


def load_config(
    flags: Mapping[str, Any] | None = None,
    *,
    config_path: str | Path | None = None,
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    """Merge settings. ``flags`` entries that are None count as not given."""
    environ = os.environ if environ is None else environ
    merged: dict[str, Any] = {}
    path = Path(config_path) if config_path else Path(CONFIG_FILE)
    if config_path is not None and not path.is_file():
        raise ConfigError(f"config file {path} not found")
    if path.is_file():
        merged.update(read_config_file(path))
    for attr, var in _ENV.items():
        if environ.get(var):
            merged[attr] = environ[var]
    for key, value in (flags or {}).items():
        if value is not None:
            merged[key] = value
    known = {f.name for f in fields(RunConfig)}
    kwargs = {k: _coerce(k, v) for k, v in merged.items() if k in known}
    return RunConfig(**kwargs)
