"""
Coloring Module
The functional f, the grid partition of C/Z[i] and the second-difference obstruction
"""

import math
import logging
from typing import NewType, Tuple

import numpy as np
from pydantic import BaseModel

from circle_math import ComplexValue, gaussian_reduce
from construction import ConstructionViolation, Params, is_member
from l1_space import SparsePoint, add, combined_ambient, frac_array

logger = logging.getLogger(__name__)

ColorId = NewType("ColorId", int)

TWO_PI = 2.0 * math.pi


class PreconditionError(ValueError):
    """An operation was called outside its precondition"""
    pass


class ObstructionRecord(BaseModel):
    """Why x, x+s, x+2s cannot share a color"""

    second_diff: Tuple[float, float]
    modulus: float
    lower_bound: float
    upper_bound: float
    colors: Tuple[int, int, int]
    blocked: bool
    boundary_fragile: bool = False


def functional_f(x: SparsePoint) -> ComplexValue:
    """f(x) = sum over the support of (e(a_i) - 1)"""
    if x.support_size == 0:
        return complex(0.0, 0.0)
    angles = TWO_PI * x.values
    return complex(float(np.sum(np.cos(angles) - 1.0)), float(np.sum(np.sin(angles))))


def cells_per_side(p: Params) -> int:
    return int(math.ceil(math.sqrt(2.0) / p.delta2))


def cell_side(p: Params) -> float:
    """Side delta2 / sqrt(2), so every cell has diameter delta2"""
    return p.delta2 / math.sqrt(2.0)


def cell_count(p: Params) -> int:
    return cells_per_side(p) ** 2


def colors_of_values(real: np.ndarray, imag: np.ndarray, p: Params) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized grid colors of f-values

    Returns:
        (color ids as uint64, boundary-fragile mask)
    """
    side = cell_side(p)
    cells = cells_per_side(p)
    x = frac_array(np.asarray(real, dtype=np.float64))
    y = frac_array(np.asarray(imag, dtype=np.float64))

    sx = x / side
    sy = y / side
    ix = np.minimum(np.floor(sx), cells - 1).astype(np.uint64)
    iy = np.minimum(np.floor(sy), cells - 1).astype(np.uint64)

    slack = p.tol / side
    fx = sx - np.floor(sx)
    fy = sy - np.floor(sy)
    fragile = (fx < slack) | (fx > 1.0 - slack) | (fy < slack) | (fy > 1.0 - slack)
    # the last cell on each axis is partial and ends at the wrap 1 ~ 0
    fragile |= (x > 1.0 - p.tol) | (y > 1.0 - p.tol)
    return ix * np.uint64(cells) + iy, fragile


def color_of_value(z: ComplexValue, p: Params) -> ColorId:
    """Row-major index of the half-open grid cell holding z mod Z[i]"""
    residue = gaussian_reduce(z)
    colors, _ = colors_of_values(np.array([residue.x]), np.array([residue.y]), p)
    return ColorId(int(colors[0]))


def is_boundary_fragile(z: ComplexValue, p: Params) -> bool:
    """True when z mod Z[i] sits within tol of a cell boundary"""
    _, fragile = colors_of_values(np.array([z.real]), np.array([z.imag]), p)
    return bool(fragile[0])


def color_of(x: SparsePoint, p: Params) -> ColorId:
    return color_of_value(functional_f(x), p)


def second_difference(x: SparsePoint, s: SparsePoint) -> ComplexValue:
    """f(x) - 2 f(x+s) + f(x+2s)"""
    x_plus_s = add(x, s)
    return functional_f(x) - 2.0 * functional_f(x_plus_s) + functional_f(add(x_plus_s, s))


def second_difference_closed_form(x: SparsePoint, s: SparsePoint) -> ComplexValue:
    """sum_j e(x_j) (1 - e(s_j))^2, equal to the second difference"""
    combined_ambient(x.ambient, s.ambient)
    if s.support_size == 0:
        return complex(0.0, 0.0)
    x_values = np.array([x.coordinate(int(i)) for i in s.indices])
    ex = np.exp(1j * TWO_PI * x_values)
    es = np.exp(1j * TWO_PI * s.values)
    return complex(np.sum(ex * (1.0 - es) ** 2))


def assert_blocked(x: SparsePoint, s: SparsePoint, p: Params) -> ObstructionRecord:
    """
    Certify that x, x+s, x+2s do not all receive the same color

    Raises:
        PreconditionError: If s is not a member of S_m
        ConstructionViolation: If the colors coincide or the modulus leaves its window
    """
    certificate = is_member(s, p)
    if not certificate.is_member:
        logger.error(f"Difference is not in S_m (margins {certificate.margins})")
        raise PreconditionError("s must be a member of S_m")

    x_plus_s = add(x, s)
    x_plus_2s = add(x_plus_s, s)
    fx, fxs, fx2s = functional_f(x), functional_f(x_plus_s), functional_f(x_plus_2s)
    diff = fx - 2.0 * fxs + fx2s
    modulus = abs(diff)
    colors = (color_of_value(fx, p), color_of_value(fxs, p), color_of_value(fx2s, p))

    lower = 2.0 * p.delta2
    upper = 1.0 - 2.0 * p.delta2
    record = ObstructionRecord(
        second_diff=(diff.real, diff.imag),
        modulus=modulus,
        lower_bound=lower,
        upper_bound=upper,
        colors=colors,
        blocked=len(set(colors)) > 1,
        boundary_fragile=any(is_boundary_fragile(z, p) for z in (fx, fxs, fx2s)),
    )

    if not record.blocked:
        logger.error(f"Monochromatic progression with colors {colors}")
        raise ConstructionViolation(f"x, x+s, x+2s share color {colors[0]}")
    if not (lower + p.tol < modulus < upper - p.tol):
        logger.error(f"Second difference modulus {modulus} outside ({lower}, {upper})")
        raise ConstructionViolation(
            f"second difference modulus {modulus:.6g} outside ({lower:.6g}, {upper:.6g})"
        )
    return record
