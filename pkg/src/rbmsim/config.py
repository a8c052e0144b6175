"""Run configuration: a YAML or JSON document with flat top-level keys."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from .domains import Domain, DomainError, parse_domain

SCHEMES = ("walk-discrete", "walk-step", "walk-ct", "myopic-full", "myopic-linear")
OUTPUT_ENV = "RBMSIM_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    domain: Any = "square"
    scheme: str = "walk-discrete"
    k: int = 4
    horizon: float = 1.0
    paths: int = 1
    start: Any = "stationary"
    seed: int = 0
    workers: int = 1
    output: str | None = None
    substeps: int = 16
    bridge: bool = True
    max_attempts: int = 10_000
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError("k must be a positive integer")
        if not self.horizon > 0:
            raise ConfigError("horizon must be positive")
        if int(self.paths) != self.paths or self.paths < 1:
            raise ConfigError("paths must be a positive integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.substeps < 1:
            raise ConfigError("substeps must be >= 1")
        try:
            dom = self.build_domain()
        except (DomainError, OSError) as exc:
            raise ConfigError(f"bad domain: {exc}") from exc
        if self.start != "stationary":
            try:
                pt = [float(v) for v in self.start]
            except (TypeError, ValueError) as exc:
                raise ConfigError("start must be 'stationary' or a point") from exc
            if len(pt) != dom.dim or not dom.contains(pt):
                raise ConfigError(f"start point {pt} is not inside the domain")
            self.start = pt
        return self

    def build_domain(self) -> Domain:
        return parse_domain(self.domain)

    @property
    def output_dir(self) -> Path:
        return Path(self.output or os.environ.get(OUTPUT_ENV, "rbmsim_out"))

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(self.domain, Domain):
            d["domain"] = self.domain.to_dict()
        return d


def load_config(path: str | os.PathLike | None = None, **overrides) -> RunConfig:
    """Read a config file (YAML or JSON) and apply non-None overrides."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            loaded = yaml.safe_load(Path(path).read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a mapping")
        data.update(loaded)
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return RunConfig(**data).validate()
