from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from ..errors import ConfigError


@dataclass
class ExperimentConfig:
    scenario: str
    seed: int
    family: str = "bernoulli"
    kind: str = "bootstrap"
    theta_true: float = 0.5
    n: int = 10
    m: int = 0
    k_schedule: list = field(default_factory=list)
    n_reps: int = 1
    out_dir: Optional[str] = None
    # scenario-specific knobs; None means "scenario default"
    theta_grid: Optional[list] = None
    n_grid: Optional[list] = None
    m_grid: Optional[list] = None
    rho_grid: Optional[list] = None
    fixed_theta: float = 0.5
    censoring: bool = True
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.seed is None:
            raise ConfigError("seed is required (no wall-clock default)")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if int(self.n_reps) < 1:
            raise ConfigError("n_reps must be >= 1")
        if not (isinstance(self.theta_true, (int, float)) and math.isfinite(self.theta_true)):
            raise ConfigError("theta_true must be a finite number")
        self.k_schedule = [int(k) for k in self.k_schedule]

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = sorted(set(data) - set(cls.field_names()))
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        if "scenario" not in data or "seed" not in data:
            raise ConfigError("config needs at least 'scenario' and 'seed'")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top-level JSON must be an object")
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
