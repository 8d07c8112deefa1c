"""Seeded synthetic series: i.i.d. Gaussian, shifted gamma and stationary AR(1).

Every generator draws from ``numpy.random.Generator(PCG64(seed))`` so a given
spec reproduces the same values on any platform with the same numpy
stream version.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError
from .sample import Sample

FAMILIES = ("gaussian", "gamma", "ar1")


@dataclass(frozen=True)
class GeneratorSpec:
    """What to generate.

    ``params`` by family: gaussian ``(mean, sd)``, gamma ``(shape, scale,
    shift)`` and ar1 ``(phi, noise_sd)``.
    """

    family: str
    params: tuple[float, ...]
    length: int = 10000
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.length < 1:
            raise DomainError("length must be >= 1")
        p = self.params
        if self.family == "gaussian":
            if len(p) != 2 or not p[1] > 0:
                raise DomainError("gaussian needs (mean, sd) with sd > 0")
        elif self.family == "gamma":
            if len(p) == 2:
                object.__setattr__(self, "params", p + (0.0,))
                p = self.params
            if len(p) != 3 or not (p[0] > 0 and p[1] > 0):
                raise DomainError("gamma needs (shape, scale[, shift]) with shape, scale > 0")
        else:
            if len(p) != 2 or not (abs(p[0]) < 1 and p[1] > 0):
                raise DomainError("ar1 needs (phi, noise_sd) with |phi| < 1 and noise_sd > 0")

    def describe(self) -> str:
        return f"{self.family}({', '.join(f'{v:g}' for v in self.params)})"


_SPEC_RE = re.compile(r"^\s*(\w+)\s*\(([^)]*)\)\s*$")


def parse_family(text: str) -> tuple[str, tuple[float, ...]]:
    """Parse ``"gaussian(0,3)"`` style strings into ``(family, params)``."""
    m = _SPEC_RE.match(text)
    if not m:
        raise DomainError(f"cannot parse generator {text!r}; expected e.g. 'gamma(5,1)'")
    try:
        params = tuple(float(v) for v in m.group(2).split(",") if v.strip())
    except ValueError as err:
        raise DomainError(f"non-numeric parameter in {text!r}") from err
    return m.group(1).lower(), params


def generate(spec: GeneratorSpec) -> Sample:
    rng = np.random.default_rng(spec.seed)
    n = spec.length
    if spec.family == "gaussian":
        mean, sd = spec.params
        x = rng.normal(mean, sd, n)
    elif spec.family == "gamma":
        shape, scale, shift = spec.params
        x = shift + rng.gamma(shape, scale, n)
    else:
        phi, noise_sd = spec.params
        eps = rng.normal(0.0, noise_sd, n)
        x = np.empty(n)
        x[0] = eps[0] / math.sqrt(1.0 - phi * phi)
        for t in range(1, n):
            x[t] = phi * x[t - 1] + eps[t]
    return Sample(x, source=spec.describe(), meta=asdict(spec))
