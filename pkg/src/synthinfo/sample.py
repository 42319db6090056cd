from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Optional, Sequence

import numpy as np

from .errors import SchemaError


def _native(v: Any) -> Any:
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, (list, np.ndarray)):
        return tuple(_native(u) for u in v)
    return v


@dataclass(frozen=True)
class Sample:
    """An ordered collection of observations, optionally labelled.

    Observations must be hashable (numbers, or tuples such as flattened
    grid images). When ``labels`` is present the sampling unit is the pair
    ``(label, observation)``.
    """

    observations: tuple = ()
    labels: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(_native(v) for v in self.observations))
        if self.labels is not None:
            labels = tuple(_native(v) for v in self.labels)
            if len(labels) != len(self.observations):
                raise SchemaError(
                    f"labels length {len(labels)} != observations length {len(self.observations)}"
                )
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.observations)

    def __iter__(self):
        return iter(self.observations)

    @property
    def labelled(self) -> bool:
        return self.labels is not None

    def units(self) -> tuple:
        if self.labels is None:
            return self.observations
        return tuple(zip(self.labels, self.observations))

    @classmethod
    def from_units(cls, units: Iterable[Hashable], labelled: bool) -> "Sample":
        units = list(units)
        if not labelled:
            return cls(tuple(units))
        return cls(tuple(u[1] for u in units), tuple(u[0] for u in units))

    def values(self) -> np.ndarray:
        return np.asarray(self.observations, dtype=float)

    def concat(self, other: "Sample") -> "Sample":
        if self.labelled and other.labelled:
            return Sample(self.observations + other.observations, self.labels + other.labels)
        return Sample(self.observations + other.observations)

    def permuted(self, order: Sequence[int]) -> "Sample":
        obs = tuple(self.observations[i] for i in order)
        labels = None if self.labels is None else tuple(self.labels[i] for i in order)
        return Sample(obs, labels)
