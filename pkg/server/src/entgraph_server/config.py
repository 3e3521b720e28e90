"""Server configuration.

Each of the three capabilities (generate, embed, score) points at a model
directory or is explicitly disabled with None. Disabled endpoints stay up
but answer every request with a capability error, so a partially
configured server is still a valid server.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class ConfigError(ValueError):
    pass


@dataclass
class ServerConfig:
    generator_model: str | None = None
    embedder_model: str | None = None
    scorer_model: str | None = None
    device: str = "cpu"
    # the pipeline client writes this marker where the fill goes; the
    # server swaps it for the hosted model's native sentinel token
    fill_marker: str = "<FILL>"
    fill_sentinel: str = "<extra_id_0>"
    max_fill_tokens: int = 5
    # order in which the hosted scorer emits its logits; the server
    # remaps them so the wire always carries (E, N, C)
    scorer_label_order: tuple = ("E", "N", "C")
    host: str = "127.0.0.1"
    port: int = 8400
    max_workers: int = 4

    def __post_init__(self):
        if not self.fill_marker:
            raise ConfigError("fill_marker must be non-empty")
        if self.max_fill_tokens < 1:
            raise ConfigError("max_fill_tokens must be >= 1")
        order = tuple(self.scorer_label_order)
        if sorted(order) != ["C", "E", "N"]:
            raise ConfigError(
                "scorer_label_order must be a permutation of E, N, C")
        self.scorer_label_order = order
        if self.max_workers < 1:
            raise ConfigError("max_workers must be >= 1")

    @property
    def capabilities(self) -> dict:
        return {
            "generate": self.generator_model is not None,
            "embed": self.embedder_model is not None,
            "score": self.scorer_model is not None,
        }


def load_config(path) -> ServerConfig:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    known = ServerConfig.__dataclass_fields__
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return ServerConfig(**raw)
