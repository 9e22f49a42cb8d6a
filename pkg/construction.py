"""
Construction Module
The sets S_m and S_inf: parameter validation, membership certificates and sampling
"""

import math
import logging
from typing import Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from circle_math import DEFAULT_TOL
from l1_space import DimensionError, SparsePoint, frac_array, rz_norm_array

logger = logging.getLogger(__name__)


class ParamsError(ValueError):
    """Construction parameters fail a named clause"""

    def __init__(self, clause: str, message: str):
        super().__init__(f"clause ({clause}): {message}")
        self.clause = clause


class CapacityError(ValueError):
    """Truncation m too small to host a member of S_m"""

    def __init__(self, minimal_m: int, message: str):
        super().__init__(message)
        self.minimal_m = minimal_m


class ConstructionViolation(AssertionError):
    """A guarantee of the construction failed; never expected for valid params"""
    pass


class Params(BaseModel):
    """Construction constants delta1, delta2, truncation m, eta policy and slack"""

    model_config = ConfigDict(frozen=True)

    delta1: float = Field(0.1, gt=0.0, lt=1.0, description="Anchor offset delta_1")
    delta2: float = Field(1e-4, gt=0.0, lt=1.0, description="Cluster step delta_2")
    m: Optional[int] = Field(None, ge=1, description="Truncation bound; null means unbounded")
    eta_policy: Literal["dyadic", "zero"] = "dyadic"
    tol: float = Field(DEFAULT_TOL, gt=0.0, lt=1e-3)

    @model_validator(mode="after")
    def check_order(self) -> "Params":
        if not self.delta2 < self.delta1:
            raise ValueError("delta2 must be smaller than delta1")
        return self

    @property
    def ratio(self) -> int:
        """delta1 / delta2 rounded to the nearest integer"""
        return int(round(self.delta1 / self.delta2))

    @property
    def eta_value(self) -> float:
        return eta(self.m, self.eta_policy)[0]

    @property
    def width(self) -> float:
        """(2 - eta_m) delta2, the half-width of every membership interval"""
        return (2.0 - self.eta_value) * self.delta2


class ValidationReport(BaseModel):
    """Outcome of validate_params"""

    valid: bool
    failed_clause: Optional[str] = None
    message: str = ""
    clauses: Dict[str, bool] = Field(default_factory=dict)
    ratio: float = 0.0
    lower_margin: float = 0.0
    upper_margin: float = 0.0


class MembershipCertificate(BaseModel):
    """Witness data for a membership decision"""

    is_member: bool
    special_index: Optional[int] = None
    tail_sum: float = 0.0
    margins: Tuple[float, float, float] = (0.0, 0.0, 0.0)


def window_values(delta1: float, delta2: float) -> Tuple[float, float]:
    """
    Lower and upper bounds on |f(x) - 2f(x+s) + f(x+2s)| for s in S

    The anchor contributes 4 sin^2(pi a) with a within 2 delta2 of delta1;
    the remaining coordinates contribute at most 4 pi^2 * max * sum.
    """
    spread = 4.0 * math.pi ** 2 * (2.0 * delta2) * (delta1 + 2.0 * delta2)
    lower = 4.0 * math.sin(math.pi * (delta1 - 2.0 * delta2)) ** 2 - spread
    upper = 4.0 * math.sin(math.pi * (delta1 + 2.0 * delta2)) ** 2 + spread
    return lower, upper


def validate_params(delta1: float, delta2: float, tol: float = DEFAULT_TOL) -> ValidationReport:
    """
    Check the clauses the blocking argument consumes

    Clauses:
        (a) delta1 / delta2 is an integer
        (b) delta2 < delta1 ** 3
        (c) lower window exceeds 2 delta2
        (d) upper window stays below 1 - 2 delta2

    Returns:
        ValidationReport naming the first failed clause, if any
    """
    if not (0.0 < delta2 < delta1 < 1.0):
        return ValidationReport(
            valid=False,
            failed_clause="range",
            message=f"require 0 < delta2 < delta1 < 1, got ({delta1}, {delta2})",
        )

    ratio = delta1 / delta2
    lower, upper = window_values(delta1, delta2)
    lower_margin = lower - 2.0 * delta2
    upper_margin = (1.0 - 2.0 * delta2) - upper

    clauses = {
        "a": abs(ratio - round(ratio)) <= tol * max(1.0, ratio),
        "b": delta2 < delta1 ** 3,
        "c": lower_margin > tol,
        "d": upper_margin > tol,
    }
    messages = {
        "a": f"delta1/delta2 = {ratio!r} is not an integer",
        "b": f"delta2 = {delta2!r} is not below delta1**3 = {delta1 ** 3!r}",
        "c": f"lower window margin {lower_margin:.6g} does not exceed 2*delta2",
        "d": f"upper window margin {upper_margin:.6g} does not stay below 1 - 2*delta2",
    }
    failed = next((name for name, ok in clauses.items() if not ok), None)

    return ValidationReport(
        valid=failed is None,
        failed_clause=failed,
        message=messages[failed] if failed else "all clauses hold",
        clauses=clauses,
        ratio=ratio,
        lower_margin=lower_margin,
        upper_margin=upper_margin,
    )


def require_valid(p: Params) -> ValidationReport:
    """Raise ParamsError unless validate_params accepts p"""
    report = validate_params(p.delta1, p.delta2, p.tol)
    if not report.valid:
        logger.error(f"Invalid parameters: {report.message}")
        raise ParamsError(report.failed_clause or "range", report.message)
    return report


def eta(m: Optional[int], policy: str = "dyadic") -> Tuple[float, bool]:
    """
    Slack eta_m = 2^(-100 m)

    Returns:
        (value, underflow); value is 0.0 for m = None (the untruncated set)
        and for m >= 11, where 2^(-100 m) is below the smallest double
    """
    if m is None or policy == "zero":
        return 0.0, False
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    value = math.ldexp(1.0, -100 * m)
    underflow = value == 0.0
    if underflow:
        logger.debug(f"eta_{m} underflows double precision; using 0")
    return value, underflow


def membership_margins(
    values: np.ndarray,
    delta1: float,
    width: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Clause margins for a batch of torus points

    Args:
        values: (rows, cols) canonical coordinates in [0, 1); zeros allowed
        delta1: Anchor offset
        width: Interval half-width (2 - eta) delta2

    Returns:
        (anchor column, tail sum, margin1, margin2, margin3) per row.
        The anchor is the coordinate closest to -delta1: when any anchor
        works it is the only coordinate within width of -delta1, since every
        other coordinate must sit within width of 0 and delta1 > 2 width.
    """
    values = np.atleast_2d(values)
    if values.shape[1] == 0:
        raise DimensionError("membership needs at least one coordinate column")
    rows = np.arange(values.shape[0])

    norms = rz_norm_array(values)
    anchor_dist = rz_norm_array(frac_array(values + delta1))
    anchor = np.argmin(anchor_dist, axis=1)

    tail_sum = norms.sum(axis=1) - norms[rows, anchor]
    others = norms.copy()
    others[rows, anchor] = -np.inf
    max_other = np.maximum(np.max(others, axis=1), 0.0)

    margin1 = width - anchor_dist[rows, anchor]
    margin2 = width - max_other
    margin3 = width - np.abs(tail_sum - delta1)
    return anchor, tail_sum, margin1, margin2, margin3


def is_member(x: SparsePoint, p: Params, guard: float = 0.0) -> MembershipCertificate:
    """
    Membership of x in S_m (or S_inf when p.m is None)

    All three clauses are strict with slack p.tol; guard adds a further
    margin requirement used by guarded integer enumeration.

    Raises:
        DimensionError: If x lives in a larger truncation than p.m
    """
    if p.m is not None:
        extent = x.ambient if x.ambient is not None else (
            int(x.indices[-1]) if x.support_size else 0
        )
        if extent > p.m:
            logger.error(f"Point ambient {extent} exceeds truncation {p.m}")
            raise DimensionError(f"point ambient {extent} exceeds truncation m={p.m}")

    if x.support_size == 0:
        return MembershipCertificate(
            is_member=False, margins=(-p.width, p.width, p.width - p.delta1)
        )

    anchor, tail_sum, m1, m2, m3 = membership_margins(x.values[None, :], p.delta1, p.width)
    margins = (float(m1[0]), float(m2[0]), float(m3[0]))
    accepted = min(margins) > p.tol + guard
    return MembershipCertificate(
        is_member=accepted,
        special_index=int(x.indices[anchor[0]]) if accepted else None,
        tail_sum=float(tail_sum[0]),
        margins=margins,
    )


def sampling_capacity(p: Params) -> Tuple[int, float]:
    """
    Minimal truncation the sampler needs, and the per-coordinate cap it uses

    Magnitudes are drawn below 2T/c for a target sum T < delta1 + width, so
    c >= 2 (delta1 + width) / cap coordinates plus the anchor are required.
    """
    cap = p.width - 4.0 * p.tol
    most = int(math.ceil(2.0 * (p.delta1 + cap) / cap))
    return most + 1, cap


def sample(p: Params, seed: int) -> SparsePoint:
    """
    Seeded random member of S_m

    Raises:
        ParamsError: If p fails validation
        CapacityError: If p.m cannot host a sampled member
    """
    require_valid(p)
    minimal_m, cap = sampling_capacity(p)
    ambient = p.m if p.m is not None else 2 * minimal_m
    if ambient < minimal_m:
        logger.error(f"Truncation m={ambient} below sampler capacity {minimal_m}")
        raise CapacityError(
            minimal_m,
            f"m={ambient} is below the sampler capacity m >= {minimal_m} "
            f"(coordinates capped at {cap:.3g}); members of S_m exist from m = {p.ratio + 1}",
        )

    rng = np.random.default_rng(int(seed))
    target = rng.uniform(p.delta1 - cap, p.delta1 + cap)
    count_low = int(math.ceil(2.0 * target / cap))
    count_high = min(count_low + max(1, p.ratio // 2), ambient - 1)
    count = int(rng.integers(count_low, count_high + 1))

    weights = rng.uniform(0.5, 1.0, count)
    magnitudes = target * weights / weights.sum()
    signs = rng.choice(np.array([-1.0, 1.0]), count)

    anchor = int(rng.integers(1, ambient + 1))
    others = rng.choice(ambient - 1, size=count, replace=False) + 1
    others[others >= anchor] += 1
    anchor_value = -p.delta1 + rng.uniform(-cap, cap)

    indices = np.concatenate([[anchor], others])
    values = np.concatenate([[anchor_value], signs * magnitudes])
    return SparsePoint.build(indices, values, ambient)


def canonical_witness(p: Params, anchor: int = 1, ambient: Optional[int] = None) -> SparsePoint:
    """The point -delta1 e_anchor + delta2 (e_{anchor+1} + ... + e_{anchor+K})"""
    ratio = p.ratio
    ambient = ambient if ambient is not None else p.m
    indices = np.arange(anchor, anchor + ratio + 1)
    values = np.full(ratio + 1, p.delta2)
    values[0] = -p.delta1
    if ambient is not None and indices[-1] > ambient:
        raise CapacityError(int(indices[-1]), f"canonical witness needs m >= {int(indices[-1])}")
    return SparsePoint.build(indices, values, ambient)
