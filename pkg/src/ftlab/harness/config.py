"""Versioned experiment configuration."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

SCHEMA_VERSION = 1

EXPERIMENTS = (
    "hypotheses",
    "riemann_oracle",
    "interaction_suite",
    "weight_suite",
    "shock_contraction",
    "rarefaction_contraction",
    "trapezoid_stability",
    "decay_rate",
    "weak_bv_stability",
    "sampling_chain",
    "mollification_rates",
    "commutator_decay",
)

# experiments whose data are random and therefore need an explicit seed
STOCHASTIC = frozenset(EXPERIMENTS) - {"hypotheses"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    system: str = "p-system-gamma2"
    nu: float = 1e-3
    delta: float = 0.05
    epsilon: float = 0.5
    T: float = 1.0
    R: float = 1.0
    seed: int | None = 0
    data: dict = field(default_factory=dict)
    output_dir: str | None = None
    params: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"schema version {self.schema_version} is not {SCHEMA_VERSION}")
        for name in ("nu", "T", "R", "delta", "epsilon"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {v!r}")
        if self.experiment in STOCHASTIC and self.seed is None:
            raise ConfigError(f"experiment {self.experiment} needs a seed")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "experiment" not in d:
            raise ConfigError("config needs an 'experiment' field")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def param(self, name: str, default):
        return self.params.get(name, default)
