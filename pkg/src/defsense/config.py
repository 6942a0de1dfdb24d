"""Run configuration shared by CLI subcommands.

Config values come from an optional JSON config file, overridden by CLI
flags; the effective config is echoed into every output header for
provenance. Timestamps live only in the header and are excluded from the
hash-checked output body.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

from . import __version__
from .errors import ConfigError


@dataclass
class RunConfig:
    corpus: str | None = None
    definitions: str | None = None
    provider: str = "fallback"
    seed: int = 0
    template: str = "postfix-question"
    z: float = 1.0
    k_min: int = 2
    k_max: int = 25
    min_cluster_size: int = 3
    min_subcluster_size: int = 3
    dim: int = 256
    max_new_tokens: int = 32
    jobs: int = 1
    out: str | None = None

    def validate(self) -> None:
        if self.seed is None:
            raise ConfigError("seed", "a seed is mandatory")
        if self.k_min < 2:
            raise ConfigError("k_min", "must be >= 2")
        if self.k_max < self.k_min:
            raise ConfigError("k_max", "must be >= k_min")
        if self.min_cluster_size < 1:
            raise ConfigError("min_cluster_size", "must be >= 1")
        if self.z < 0:
            raise ConfigError("z", "must be >= 0")

    def config_hash(self) -> str:
        payload = json.dumps(dataclasses.asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def load_config(path=None, **overrides) -> RunConfig:
    """Load a JSON config file and apply non-None flag overrides."""
    values = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        fields = {f.name for f in dataclasses.fields(RunConfig)}
        for key, value in raw.items():
            if key not in fields:
                raise ConfigError(key, "unknown config key")
            values[key] = value
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def output_header(cfg: RunConfig, provider_id: str = "-",
                  timestamp: str | None = None) -> str:
    """Metadata header prepended to every output file ('# ' comment lines)."""
    lines = [
        f"# defsense {__version__}",
        f"# config_hash: {cfg.config_hash()}",
        f"# seed: {cfg.seed}",
        f"# provider: {provider_id}",
    ]
    if timestamp:
        lines.append(f"# timestamp: {timestamp}")
    return "\n".join(lines) + "\n"


def strip_header(text: str) -> str:
    """The hash-checked body of an output file: everything after the header."""
    return "".join(line for line in text.splitlines(keepends=True)
                   if not line.startswith("# "))
