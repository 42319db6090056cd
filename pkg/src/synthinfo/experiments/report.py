from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import ConfigError
from .config import ExperimentConfig


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    value: Any = None
    threshold: Any = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "value": self.value,
            "threshold": self.threshold,
            "detail": self.detail,
        }


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list[dict]
    aggregates: dict
    verdicts: list[Verdict] = field(default_factory=list)

    def __post_init__(self):
        if not self.verdicts:
            raise ConfigError(f"scenario {self.config.scenario!r} produced no verdicts")

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def summary_dict(self) -> dict:
        return _clean({
            # out_dir is where the report goes, not an input; leave it out so reruns elsewhere match
            "config": {k: v for k, v in self.config.to_dict().items() if k != "out_dir"},
            "n_records": len(self.records),
            "aggregates": self.aggregates,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "passed": self.passed,
        })

    def to_json(self) -> str:
        return json.dumps(self.summary_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.records:
            keys = list(self.records[0])
            for rec in self.records[1:]:
                keys.extend(k for k in rec if k not in keys)
            w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
            w.writeheader()
            for rec in self.records:
                w.writerow({k: _csv_value(rec.get(k)) for k in keys})
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = self.config.scenario
        csv_path, json_path = out / f"{stem}_replicates.csv", out / f"{stem}_report.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(self.to_json())
        return csv_path, json_path


def _csv_value(v):
    if isinstance(v, (bool, np.bool_)):
        return int(bool(v))
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return "" if v is None else v


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj
