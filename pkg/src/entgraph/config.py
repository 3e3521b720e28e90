"""Pipeline configuration: a flat JSON file with dotted-key overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace


class ConfigError(ValueError):
    """Raised with the offending key named in the message."""


@dataclass(frozen=True)
class PipelineConfig:
    k_p: int = 5000                 # predicate set size cap
    k_edge: int = 20_000_000        # selected edge cap
    k_beam: int = 50
    k_sent: int = 50
    max_fill_tokens: int = 5
    d_v: int = 768
    d_c: int = 16
    hidden: int = 16
    f_plus: str = "exp"
    k_nbr: int = 5
    positive_repetition: int = 5
    learning_rate: float = 5e-4
    seed: int = 0
    backend: str = "mock"           # "mock" or a base URL
    relaxed_match: bool = True
    lemma_backup: bool = True
    average_backup: bool = True
    head_path: str = ""             # optional trained-head checkpoint

    def validate(self) -> "PipelineConfig":
        for key in ("k_p", "k_edge", "k_beam", "k_sent", "max_fill_tokens",
                    "d_v", "d_c", "hidden", "k_nbr", "positive_repetition"):
            v = getattr(self, key)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{key}: must be a positive integer, got {v!r}")
        if self.f_plus not in ("exp", "square"):
            raise ConfigError(f"f_plus: must be 'exp' or 'square', got {self.f_plus!r}")
        if not (isinstance(self.learning_rate, (int, float))
                and self.learning_rate > 0):
            raise ConfigError(f"learning_rate: must be positive, "
                              f"got {self.learning_rate!r}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed: must be an integer, got {self.seed!r}")
        if not self.backend:
            raise ConfigError("backend: must be 'mock' or a URL")
        return self


_FIELDS = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(key, raw):
    """Parse a --set string value into the field's type."""
    default = getattr(PipelineConfig(), key)
    if isinstance(default, bool):
        if raw in ("true", "True", "1"):
            return True
        if raw in ("false", "False", "0"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc
    if isinstance(default, float):
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc
    return raw


def load_config(path=None, overrides=()) -> PipelineConfig:
    """Load a JSON config (all keys optional) and apply key=value overrides."""
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in data.items():
            if key not in _FIELDS:
                raise ConfigError(f"{key}: unknown configuration key")
            values[key] = value
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        if key not in _FIELDS:
            raise ConfigError(f"{key}: unknown configuration key")
        values[key] = _coerce(key, raw)
    return replace(PipelineConfig(), **values).validate()
