"""Model parameters and solver accuracy settings.

The model: cells of volume ``upsilon`` holding n = 0, 1, 2, ... particles,
a uniform attraction of dimensionless strength ``p`` between all particle
pairs, and a stronger repulsion ``a * p`` (a > 1) between pairs sharing a
cell.  A single cell at external field x then carries the weight

    w_n(x) = upsilon^n / n! * exp(x * n - (a * p / 2) * n^2).

All thermodynamics downstream is built from log-sums over these weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParamsError


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParamsError("invalid-params", f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Static model constants: repulsion ratio ``a`` and cell volume ``upsilon``.

    ``a`` must exceed 1 (in-cell repulsion strictly stronger than the
    mean-field attraction); ``upsilon`` may be 0, which degenerates every
    cell to the empty state.
    """

    a: float = 1.2
    upsilon: float = 12.0

    def __post_init__(self):
        object.__setattr__(self, "a", _require_finite("a", self.a))
        object.__setattr__(self, "upsilon", _require_finite("upsilon", self.upsilon))
        if self.a <= 1.0:
            raise InvalidParamsError("invalid-params", f"a must be > 1, got {self.a}")
        if self.upsilon < 0.0:
            raise InvalidParamsError("invalid-params", f"upsilon must be >= 0, got {self.upsilon}")

    @property
    def ln_upsilon(self) -> float:
        return math.log(self.upsilon) if self.upsilon > 0.0 else -math.inf


@dataclass(frozen=True)
class ThermoPoint:
    """A point of the phase diagram: coupling ``p`` and chemical potential ``mu``.

    ``p = 0`` is accepted as the decoupled boundary (cells independent);
    operations that need p > 0 raise invalid-params themselves.
    """

    p: float
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "p", _require_finite("p", self.p))
        object.__setattr__(self, "mu", _require_finite("mu", self.mu))
        if self.p < 0.0:
            raise InvalidParamsError("invalid-params", f"p must be >= 0, got {self.p}")


@dataclass(frozen=True)
class SeriesAccuracy:
    """Truncation control for the cell series.

    The series over n stops once at least ``min_terms`` terms past the peak
    are summed and the current term is below ``rel_tol`` relative to the
    peak term; ``max_terms`` caps the scan.
    """

    rel_tol: float = 1e-15
    min_terms: int = 16
    max_terms: int = 20000

    def __post_init__(self):
        object.__setattr__(self, "rel_tol", _require_finite("rel_tol", self.rel_tol))
        if not (0.0 < self.rel_tol < 1.0):
            raise InvalidParamsError("invalid-params", f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if not (0 < int(self.min_terms) <= int(self.max_terms)):
            raise InvalidParamsError(
                "invalid-params",
                f"need 0 < min_terms <= max_terms, got {self.min_terms}, {self.max_terms}",
            )
        object.__setattr__(self, "min_terms", int(self.min_terms))
        object.__setattr__(self, "max_terms", int(self.max_terms))

    def tightened(self, factor: float = 10.0) -> "SeriesAccuracy":
        """A copy with rel_tol divided by ``factor`` (floored at 5e-17)."""
        return SeriesAccuracy(
            rel_tol=max(self.rel_tol / factor, 5e-17),
            min_terms=self.min_terms,
            max_terms=self.max_terms,
        )


DEFAULT_ACCURACY = SeriesAccuracy()
