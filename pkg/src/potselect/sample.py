"""Observation container shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np


@dataclass(frozen=True)
class Sample:
    """An ordered sequence of real observations plus provenance metadata.

    ``values`` is stored as a read-only float64 array; order is preserved
    because some generators (AR(1)) produce serially dependent series.
    """

    values: np.ndarray
    source: str = "memory"
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def max(self) -> float:
        return float(self.values.max())

    @property
    def min(self) -> float:
        return float(self.values.min())


def as_array(sample: Sample | np.ndarray | list[float]) -> np.ndarray:
    if isinstance(sample, Sample):
        return sample.values
    return np.asarray(sample, dtype=float).ravel()
