"""
Generalized Polynomial Module
Special generalized (bracket) polynomials and nil-Bohr neighborhoods over Z
"""

import math
import logging
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from circle_math import DEFAULT_TOL, CircleOverflowError, CircleValue, frac, nearest_int, rz_norm
from l1_space import frac_array, rz_norm_array
from utils.validators import InputValidator

logger = logging.getLogger(__name__)

# Largest |n^j a| whose fractional part is still meaningful in double precision
MAX_TERM_MAGNITUDE = 1e14


class GenPolyError(ValueError):
    """Malformed polynomial or neighborhood"""
    pass


class SpecialGenPoly(BaseModel):
    """L(n^{j_1} a_1, ..., n^{j_l} a_l) with L(x) = x and L(x_1, ...) = x_1 [L(x_2, ...)]"""

    model_config = ConfigDict(frozen=True)

    terms: Tuple[Tuple[int, float], ...]

    @field_validator("terms")
    @classmethod
    def check_terms(cls, v):
        if not v:
            raise ValueError("a special generalized polynomial needs at least one term")
        for exponent, coefficient in v:
            if exponent < 0:
                raise ValueError(f"exponent {exponent} must be nonnegative")
            if not math.isfinite(coefficient):
                raise ValueError(f"coefficient {coefficient} must be finite")
        return v

    @classmethod
    def single(cls, exponent: int, coefficient: float) -> "SpecialGenPoly":
        return cls(terms=((exponent, coefficient),))

    def describe(self) -> str:
        parts = [f"n^{j}*{a:.6g}" for j, a in self.terms]
        return "L(" + ", ".join(parts) + ")"


class NilBohrNbhd(BaseModel):
    """{n : ||P_i(n)|| < epsilon for every i}, with every P_i of degree at most d"""

    model_config = ConfigDict(frozen=True)

    polys: Tuple[SpecialGenPoly, ...] = ()
    epsilon: float = Field(..., gt=0.0)
    degree_bound: int = Field(..., ge=1)
    tol: float = Field(DEFAULT_TOL, gt=0.0)

    @model_validator(mode="after")
    def check_degrees(self) -> "NilBohrNbhd":
        for poly in self.polys:
            if degree(poly) > self.degree_bound:
                raise ValueError(
                    f"{poly.describe()} has degree {degree(poly)} above the bound {self.degree_bound}"
                )
        return self

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "NilBohrNbhd":
        """
        Build from {"polys": [[[j, a], ...], ...], "epsilon": e, "degree_bound": d}

        Raises:
            utils.ValidationError: If the payload is structurally malformed
            GenPolyError: If the polynomials violate the degree bound
        """
        InputValidator.validate_nbhd_payload(payload)
        try:
            return cls(
                polys=tuple(
                    SpecialGenPoly(terms=tuple((int(j), float(a)) for j, a in poly))
                    for poly in payload["polys"]
                ),
                epsilon=float(payload["epsilon"]),
                degree_bound=int(payload["degree_bound"]),
            )
        except ValidationError as e:
            logger.error(f"Neighborhood rejected: {e}")
            raise GenPolyError(str(e))

    def to_payload(self) -> Dict[str, Any]:
        return {
            "polys": [[list(term) for term in poly.terms] for poly in self.polys],
            "epsilon": self.epsilon,
            "degree_bound": self.degree_bound,
        }

    @property
    def is_vacuous(self) -> bool:
        """True when every integer belongs, since ||.|| never exceeds 1/2"""
        return not self.polys or self.epsilon - self.tol > 0.5


def eval_L(values: Sequence[float]) -> float:
    """
    Right fold of L(x_1, ..., x_l) = x_1 [L(x_2, ..., x_l)]

    Raises:
        GenPolyError: If values is empty
        CircleOverflowError: If an intermediate bracket leaves the exact range
    """
    if not values:
        raise GenPolyError("L needs at least one argument")
    acc = float(values[-1])
    for value in reversed(values[:-1]):
        acc = float(value) * nearest_int(acc)
    return acc


def degree(P: SpecialGenPoly) -> int:
    return sum(j for j, _ in P.terms)


def _term_values(P: SpecialGenPoly, n: int) -> List[float]:
    values = []
    for position, (j, a) in enumerate(P.terms):
        value = float(n) ** j * a
        if not abs(value) <= MAX_TERM_MAGNITUDE:
            logger.error(f"Term {position} of {P.describe()} overflows at n={n}")
            raise CircleOverflowError(
                f"term {position} (n^{j}*{a:.6g}) = {value:.3g} at n={n} exceeds {MAX_TERM_MAGNITUDE:.0e}"
            )
        values.append(value)
    return values


def evaluate(P: SpecialGenPoly, n: int) -> CircleValue:
    """
    frac(L(n^{j_1} a_1, ..., n^{j_l} a_l))

    Raises:
        GenPolyError: If n < 1
        CircleOverflowError: Naming the first term beyond the precision cap
    """
    if n < 1:
        raise GenPolyError(f"n must be positive, got {n}")
    value = eval_L(_term_values(P, n))
    _check_result(P, abs(value))
    return frac(value)


def _check_result(P: SpecialGenPoly, magnitude: float) -> None:
    if not magnitude <= MAX_TERM_MAGNITUDE:
        logger.error(f"{P.describe()} evaluates beyond the precision cap")
        raise CircleOverflowError(
            f"{P.describe()} reaches {magnitude:.3g}, above {MAX_TERM_MAGNITUDE:.0e}"
        )


def eval_many(P: SpecialGenPoly, ns: np.ndarray) -> np.ndarray:
    """Vectorized evaluate over an integer array; same rounding as the scalar path"""
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size == 0:
        return np.empty(0, dtype=np.float64)
    if np.any(ns < 1):
        raise GenPolyError("every n must be positive")

    base = ns.astype(np.float64)
    columns = []
    for position, (j, a) in enumerate(P.terms):
        values = base ** j * a
        worst = float(np.max(np.abs(values)))
        if not worst <= MAX_TERM_MAGNITUDE:
            logger.error(f"Term {position} of {P.describe()} overflows within the batch")
            raise CircleOverflowError(
                f"term {position} (n^{j}*{a:.6g}) reaches {worst:.3g}, above {MAX_TERM_MAGNITUDE:.0e}"
            )
        columns.append(values)

    acc = columns[-1]
    for values in reversed(columns[:-1]):
        if np.any(np.abs(acc) >= 2.0 ** 53):
            raise CircleOverflowError("bracket argument exceeds the exact integer range 2**53")
        acc = values * np.floor(acc + 0.5)
    _check_result(P, float(np.max(np.abs(acc))))
    return frac_array(acc)


def precision_limit(P: SpecialGenPoly) -> int:
    """Largest n for which every term of P stays within MAX_TERM_MAGNITUDE"""
    limit = None
    for j, a in P.terms:
        if j == 0 or a == 0.0:
            continue
        bound = int(math.floor((MAX_TERM_MAGNITUDE / abs(a)) ** (1.0 / j)))
        limit = bound if limit is None else min(limit, bound)
    return limit if limit is not None else 2 ** 62


def nilbohr_contains(N: NilBohrNbhd, n: int) -> bool:
    threshold = N.epsilon - N.tol
    return all(rz_norm(evaluate(P, n)) < threshold for P in N.polys)


def nilbohr_norms(N: NilBohrNbhd, ns: np.ndarray) -> np.ndarray:
    """(len(polys), len(ns)) matrix of ||P_i(n)||"""
    ns = np.asarray(ns, dtype=np.int64)
    if not N.polys:
        return np.zeros((0, ns.size))
    return np.vstack([rz_norm_array(eval_many(P, ns)) for P in N.polys])


def bohr_neighborhood(frequencies: Sequence[float], epsilon: float, tol: float = DEFAULT_TOL) -> NilBohrNbhd:
    """The ordinary Bohr set {n : ||alpha_r n|| < epsilon} as a degree-1 neighborhood"""
    return NilBohrNbhd(
        polys=tuple(SpecialGenPoly.single(1, float(a)) for a in frequencies),
        epsilon=epsilon,
        degree_bound=1,
        tol=tol,
    )
