"""
Circle Math Module
Arithmetic on R/Z, the complex exponential and reduction modulo Z[i]
"""

import math
import logging
from typing import NamedTuple

logger = logging.getLogger(__name__)

# Slack applied to every strict inequality in downstream modules
DEFAULT_TOL = 1e-9

# Beyond this magnitude a double carries no fractional information
MAX_EXACT_MAGNITUDE = 2.0 ** 53

ComplexValue = complex


class CircleDomainError(ValueError):
    """Non-finite input to a circle operation"""
    pass


class CircleOverflowError(OverflowError):
    """Magnitude too large for a meaningful integer or fractional part"""
    pass


class CircleValue(float):
    """A class of R/Z, stored as its canonical representative in [0, 1)"""

    def __new__(cls, value: float) -> "CircleValue":
        value = float(value)
        if not 0.0 <= value < 1.0:
            raise CircleDomainError(f"CircleValue must lie in [0, 1), got {value!r}")
        return super().__new__(cls, value)


class GaussianResidue(NamedTuple):
    """A class of C/Z[i] in the fundamental square"""
    x: float
    y: float


def _require_finite(x: float, what: str = "input") -> None:
    if not math.isfinite(x):
        logger.error(f"Non-finite {what}: {x!r}")
        raise CircleDomainError(f"Non-finite {what}: {x!r}")


def _frac_float(x: float) -> float:
    value = x - math.floor(x)
    # x slightly below an integer can round up to exactly 1.0
    return 0.0 if value >= 1.0 else value


def frac(x: float) -> CircleValue:
    """Fractional part x - floor(x) in [0, 1)"""
    _require_finite(x)
    return CircleValue(_frac_float(x))


def rz_norm(x: float) -> float:
    """Distance to the nearest integer, min({x}, 1 - {x})"""
    value = _frac_float(float(x))
    return min(value, 1.0 - value)


def nearest_int(x: float) -> int:
    """
    Nearest integer [x] := floor(x + 1/2)

    Half-integers round toward +infinity, as the floor formula dictates.

    Raises:
        CircleDomainError: If x is not finite
        CircleOverflowError: If |x| is at or beyond 2**53
    """
    _require_finite(x)
    if abs(x) >= MAX_EXACT_MAGNITUDE:
        logger.error(f"nearest_int overflow for {x!r}")
        raise CircleOverflowError(f"|{x!r}| exceeds the exact integer range 2**53")
    return int(math.floor(x + 0.5))


def circle_exp(x: float) -> ComplexValue:
    """e(x) = exp(2 pi i x) as (cos 2 pi x, sin 2 pi x)"""
    angle = 2.0 * math.pi * float(x)
    return complex(math.cos(angle), math.sin(angle))


def gaussian_reduce(z: ComplexValue) -> GaussianResidue:
    """Reduce z modulo Z[i] into the fundamental square"""
    _require_finite(z.real, "real part")
    _require_finite(z.imag, "imaginary part")
    return GaussianResidue(_frac_float(z.real), _frac_float(z.imag))


def gaussian_dist(z: ComplexValue) -> float:
    """Euclidean distance from z to the nearest Gaussian integer"""
    residue = gaussian_reduce(z)
    dx = min(residue.x, 1.0 - residue.x)
    dy = min(residue.y, 1.0 - residue.y)
    return math.hypot(dx, dy)


def sagitta(delta: float) -> float:
    """Gap 1 - cos(pi delta) between arc midpoint and chord midpoint"""
    _require_finite(delta)
    return 1.0 - math.cos(math.pi * delta)
