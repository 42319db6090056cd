from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional

from ..errors import DataError, SchemaError
from ..families import ParamFamily
from ..sample import Sample


def _parse_number(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return float(text)


def load_csv_dataset(
    path: str | Path,
    value_column: str,
    label_column: Optional[str] = None,
    support: Optional[ParamFamily] = None,
) -> Sample:
    """Read one numeric column (and optionally a label column) from a CSV with a header row.

    Errors name the offending line number (the header is line 1).
    """
    path = Path(path)
    values, labels = [], []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return Sample((), () if label_column else None)
        missing = [c for c in (value_column, label_column) if c and c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}; header is {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            raw = row[value_column]
            if raw is None:
                raise DataError(f"{path}:{lineno}: row has too few fields")
            try:
                v = _parse_number(raw)
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value {raw!r} in column {value_column!r}") from None
            if support is not None and not support.in_support(v):
                raise DataError(f"{path}:{lineno}: value {v!r} outside the {support.name} support")
            values.append(v)
            if label_column:
                labels.append(row[label_column].strip())
    return Sample(tuple(values), tuple(labels) if label_column else None)


def write_csv_dataset(path: str | Path, sample: Sample, value_column: str = "y", label_column: str = "c") -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        if sample.labelled:
            w.writerow([value_column, label_column])
            w.writerows(zip(sample.observations, sample.labels))
        else:
            w.writerow([value_column])
            w.writerows([v] for v in sample.observations)
