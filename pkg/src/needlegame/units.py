"""Fixed-point conversion between millimeters and integer units."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .errors import ConfigError, RangeError

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1

UM_PER_MM = 1000


@dataclass(frozen=True)
class Units:
    scale: int = 1000  # integer units per millimeter

    def __post_init__(self):
        if not isinstance(self.scale, int) or self.scale <= 0:
            raise ConfigError(f"scale must be a positive integer, got {self.scale!r}")

    @property
    def per_um(self) -> float:
        return self.scale / UM_PER_MM


def _check_range(q: int) -> int:
    if q < INT_MIN or q > INT_MAX:
        raise RangeError(f"fixed-point value {q} outside 32-bit range")
    return q


def to_fixed(value: float, units: Units = Units()) -> int:
    """Scale a millimeter value and round half away from zero.

    Rounding is done on the decimal repr of ``value`` so that literals such
    as 0.0025 land on their intended half-unit boundary.
    """
    if not math.isfinite(value):
        raise RangeError(f"cannot convert non-finite value {value!r}")
    scaled = Decimal(repr(float(value))) * units.scale
    # ROUND_HALF_UP in decimal is half away from zero
    return _check_range(int(scaled.to_integral_value(rounding=ROUND_HALF_UP)))


def from_fixed(q: int, units: Units = Units()) -> float:
    return q / units.scale


def quantize(value: float) -> int:
    """Round an internal float coordinate (already in units) half away from zero."""
    if not math.isfinite(value):
        raise RangeError(f"cannot quantize non-finite value {value!r}")
    a = abs(value)
    q = math.floor(a)
    # a - floor(a) is exact in binary floating point; a + 0.5 is not
    if a - q >= 0.5:
        q += 1
    return _check_range(-q if value < 0 else q)
