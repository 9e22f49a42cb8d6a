"""
Projection Module
The frequency schedule, the projection P: Z -> l1 torus and enumeration of S_N
"""

import math
import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from sympy import prime, primerange

from circle_math import CircleOverflowError
from coloring import ColorId, color_of, colors_of_values
from construction import Params, membership_margins
from l1_space import SparsePoint, frac_array

logger = logging.getLogger(__name__)

# n * alpha_1 must keep this many bits of fractional accuracy
EXACTNESS_BITS = 53

DEFAULT_CHUNK = 1024

# Irrational relative offsets on the calibrated anchor mass and cluster sum.
# Both move clause margins by under 1e-9 for n <= 10^5, so the window is unchanged.
ANCHOR_OFFSET = math.sqrt(2.0) * 1e-9
CLUSTER_OFFSET = math.sqrt(3.0) * 1e-9

# alpha_1 + sum(cluster) must sit this far from 1/2
HEAD_RELATION_FLOOR = 1e-15


class ScheduleConfigError(ValueError):
    """Schedule cannot certify the requested scan; the message names the remedy"""
    pass


class ScheduleSettings(BaseModel):
    """How the frequencies alpha_1, alpha_2, ... are generated"""

    generator: Literal["calibrated", "prime_root"] = "calibrated"
    prime_count: int = Field(8, ge=1, description="Truncation m for the prime_root generator")
    first_exponent: int = Field(1, ge=1, description="c_1 for the prime_root generator")
    decay_step: int = Field(2, ge=2, description="c_{i+1} - c_i in the prime-root tail")
    scan_factor: float = Field(1000.0, ge=1.0, description="Required 1/alpha_{m+1} per unit of scan bound")
    guard_fraction: float = Field(0.1, gt=0.0, lt=1.0)
    calibration_target: int = Field(36000, ge=2, description="Centre n_c of the calibrated window")
    tail_terms: int = Field(3, ge=1, description="Explicit tail frequencies kept by the calibrated generator")


@lru_cache(maxsize=8)
def _prime_table(size: int) -> np.ndarray:
    primes = np.array([int(q) for q in primerange(2, int(prime(size)) + 1)], dtype=np.int64)
    primes.setflags(write=False)
    return primes


def first_primes(count: int) -> np.ndarray:
    """The first count primes"""
    if count <= 0:
        return np.empty(0, dtype=np.int64)
    size = 1 << max(4, (count - 1).bit_length())
    return _prime_table(size)[:count]


@dataclass(frozen=True)
class AlphaSchedule:
    """
    Strictly decreasing frequencies in (0, 1/2), truncated at m

    The leading `head` values are stored explicitly; the rest follow the
    prime-root rule sqrt(p_i) * 10^(-c) with c growing by decay_step per
    index. Values are exact in log10; doubles underflow to 0 far down the tail.
    """

    generator: str
    head: np.ndarray
    tail_first_exponent: int
    decay_step: int
    m: int
    scan_bound: int = 0
    scan_factor: float = 1000.0
    alphas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        head = np.asarray(self.head, dtype=np.float64)
        head.setflags(write=False)
        object.__setattr__(self, "head", head)
        if self.m < max(1, head.size):
            raise ScheduleConfigError(f"truncation m={self.m} must cover the {head.size} explicit frequencies")
        alphas = self.alpha_values(self.m)
        alphas.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)

    def _tail_exponents(self, count: int) -> Tuple[np.ndarray, np.ndarray]:
        """(primes, exponents) of the first count tail terms"""
        start = self.head.size
        primes = first_primes(start + count)[start:start + count].astype(np.float64)
        exponents = self.tail_first_exponent + self.decay_step * np.arange(count, dtype=np.float64)
        return primes, exponents

    def log10_values(self, count: int) -> np.ndarray:
        """log10 of alpha_1 ... alpha_count, free of underflow"""
        head = np.log10(self.head[:count])
        tail_count = max(0, count - self.head.size)
        primes, exponents = self._tail_exponents(tail_count)
        return np.concatenate([head, 0.5 * np.log10(primes) - exponents])

    def alpha_values(self, count: int) -> np.ndarray:
        """alpha_1 ... alpha_count as doubles; deep tail terms underflow to 0"""
        tail_count = max(0, count - self.head.size)
        primes, exponents = self._tail_exponents(tail_count)
        tail = np.sqrt(primes) * np.power(10.0, -exponents)
        return np.concatenate([self.head[:count], tail])

    @property
    def next_alpha(self) -> float:
        return float(self.alpha_values(self.m + 1)[-1])

    @property
    def ratio_bound(self) -> float:
        """Bound on alpha_{i+1}/alpha_i past m, from p_{i+1} < 2 p_i"""
        return math.sqrt(2.0) * 10.0 ** (-self.decay_step)

    @property
    def tail_bound(self) -> float:
        """Upper bound on sum_{i>m} alpha_i"""
        return self.next_alpha / (1.0 - self.ratio_bound)

    @property
    def head_relation_residue(self) -> float:
        """|alpha_1 + sum of the other head frequencies - 1/2|"""
        return abs(float(self.head[0]) + float(self.head[1:].sum()) - 0.5)

    @property
    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(f"{self.generator}|{self.tail_first_exponent}|{self.decay_step}|{self.m}".encode())
        digest.update(self.head.tobytes())
        return digest.hexdigest()[:16]

    def decay_certificate(self, scan_bound: Optional[int] = None) -> Dict[str, Any]:
        """1/alpha_{m+1} against scan_factor * N"""
        bound = self.scan_bound if scan_bound is None else scan_bound
        inverse = math.inf if self.next_alpha == 0.0 else 1.0 / self.next_alpha
        return {
            "inverse_next_alpha": inverse,
            "scan_bound": float(bound),
            "required": self.scan_factor * bound,
            "certified": inverse >= self.scan_factor * bound,
        }

    def check_invariants(self, count: Optional[int] = None) -> None:
        """
        Strict decrease, values in (0, 1/2) and the ratio bound, checked in log10

        Raises:
            ScheduleConfigError: If any invariant fails
        """
        logs = self.log10_values(count or self.m + 1)
        if not logs[0] < math.log10(0.5):
            raise ScheduleConfigError(f"alpha_1 = {10 ** logs[0]:.6g} is not below 1/2")
        if np.any(np.diff(logs) >= 0.0):
            first = int(np.flatnonzero(np.diff(logs) >= 0.0)[0]) + 1
            raise ScheduleConfigError(f"frequencies stop decreasing at index {first}")
        past = np.diff(logs[self.m - 1:])
        if past.size and np.max(past) > math.log10(self.ratio_bound) + 1e-12:
            raise ScheduleConfigError("tail ratio exceeds the certified geometric bound")
        if self.head.size > 1 and self.head_relation_residue <= HEAD_RELATION_FLOOR:
            raise ScheduleConfigError("alpha_1 plus the cluster sums to 1/2; the head is rationally dependent")


class IntegerSetReport(BaseModel):
    """Elements of S_N in [1, N] with their guarded margins"""

    elements: List[int] = Field(default_factory=list)
    margins: List[float] = Field(default_factory=list)
    special_indices: List[int] = Field(default_factory=list)
    scan_bound: int = 0
    truncation: int = 0
    tail_bound: float = 0.0
    schedule_fingerprint: str = ""


class DensityReport(BaseModel):
    scan_bound: int
    coords: int
    cells: int
    occupied: int
    fraction: float


class RevalidationReport(BaseModel):
    """Whether guarded acceptance persists at larger truncations"""

    truncations: List[int]
    persisted: Dict[int, bool]
    lost: Dict[int, List[int]]

    @property
    def all_persisted(self) -> bool:
        return all(self.persisted.values())


def _tail_start(p: Params, settings: ScheduleSettings, scan_bound: int, smallest_head: float) -> float:
    n = max(scan_bound, 1)
    return min(
        smallest_head / 10.0,
        1.0 / (settings.scan_factor * n),
        p.delta2 * settings.guard_fraction / (settings.scan_factor * n),
    )


def _first_exponent_below(prime_value: float, bound: float) -> int:
    exponent = int(math.floor(math.log10(math.sqrt(prime_value) / bound))) + 1
    while math.sqrt(prime_value) * 10.0 ** (-exponent) >= bound:
        exponent += 1
    return exponent


def build_schedule(settings: ScheduleSettings, p: Params, scan_bound: int) -> AlphaSchedule:
    """
    Build the frequency schedule for scans up to scan_bound

    calibrated: alpha_1 = 1/2 - delta1/n_c, then K = delta1/delta2 cluster
    frequencies proportional to 2 - sqrt(p_j/p_K) summing to delta1/n_c,
    each sum nudged by an irrational relative offset so that alpha_1 and
    alpha_1 + sum(cluster) are not rationals with small denominator,
    then a prime-root tail started below every scan and guard requirement.
    prime_root: alpha_i = sqrt(p_i) 10^(-c_i), c_i = c_1 + step (i - 1).

    Raises:
        ScheduleConfigError: If the resulting schedule breaks an invariant
    """
    if settings.generator == "prime_root":
        schedule = AlphaSchedule(
            generator="prime_root",
            head=np.empty(0),
            tail_first_exponent=settings.first_exponent,
            decay_step=settings.decay_step,
            m=settings.prime_count,
            scan_bound=scan_bound,
            scan_factor=settings.scan_factor,
        )
    else:
        K = p.ratio
        unit = p.delta1 / settings.calibration_target
        primes = first_primes(K).astype(np.float64)
        weights = 2.0 - np.sqrt(primes / primes[-1])
        cluster = unit * weights / weights.sum()
        cluster = cluster * (1.0 + CLUSTER_OFFSET)
        head = np.concatenate([[0.5 - unit * (1.0 - ANCHOR_OFFSET)], cluster])

        start = _tail_start(p, settings, scan_bound, float(cluster[-1]))
        next_prime = float(first_primes(K + 1)[-1])
        schedule = AlphaSchedule(
            generator="calibrated",
            head=head,
            tail_first_exponent=_first_exponent_below(next_prime, start),
            decay_step=settings.decay_step,
            m=K + 1 + settings.tail_terms,
            scan_bound=scan_bound,
            scan_factor=settings.scan_factor,
        )

    schedule.check_invariants()
    logger.info(
        f"Built {schedule.generator} schedule: m={schedule.m}, "
        f"tail_bound={schedule.tail_bound:.3e}, fingerprint={schedule.fingerprint}"
    )
    return schedule


def with_truncation(sched: AlphaSchedule, m: int) -> AlphaSchedule:
    """Same generator, different truncation"""
    return AlphaSchedule(
        generator=sched.generator,
        head=sched.head,
        tail_first_exponent=sched.tail_first_exponent,
        decay_step=sched.decay_step,
        m=m,
        scan_bound=sched.scan_bound,
        scan_factor=sched.scan_factor,
    )


def _check_exact(n_max: int, sched: AlphaSchedule, tol: float) -> None:
    if n_max * float(sched.alphas[0]) * 2.0 ** (-EXACTNESS_BITS) > tol:
        cap = int(tol * 2.0 ** EXACTNESS_BITS / float(sched.alphas[0]))
        logger.error(f"n={n_max} beyond the precision cap {cap}")
        raise CircleOverflowError(f"n={n_max} exceeds the precision cap {cap} for alpha_1={sched.alphas[0]:.6g}")


def project(n: int, sched: AlphaSchedule, tol: float = 1e-9) -> SparsePoint:
    """
    P(n) = ({alpha_1 n}, ..., {alpha_m n}) with zero entries elided

    Raises:
        ValueError: If n < 1
        CircleOverflowError: If n * alpha_1 loses fractional accuracy
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    _check_exact(n, sched, tol)
    values = frac_array(float(n) * sched.alphas)
    return SparsePoint.build(np.arange(1, sched.m + 1), values, sched.m)


def project_many(ns: Sequence[int], sched: AlphaSchedule) -> np.ndarray:
    """(len(ns), m) matrix of {alpha_i n}"""
    ns = np.asarray(ns, dtype=np.float64)
    return frac_array(np.outer(ns, sched.alphas))


def _chunks(start: int, stop: int, size: int) -> List[np.ndarray]:
    return [np.arange(lo, min(lo + size, stop), dtype=np.int64) for lo in range(start, stop, size)]


def _guarded_chunk(
    ns: np.ndarray, p: Params, sched: AlphaSchedule
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    anchor, _, m1, m2, m3 = membership_margins(project_many(ns, sched), p.delta1, p.width)
    margin = np.minimum(np.minimum(m1, m2), m3)
    guard = ns.astype(np.float64) * sched.tail_bound + p.tol
    accepted = margin > guard
    return ns[accepted], margin[accepted], anchor[accepted] + 1


def required_truncation(sched: AlphaSchedule, N: int, p: Params, guard_fraction: float) -> Optional[int]:
    """Smallest truncation at which N * tail_bound < delta2 * guard_fraction, if any is representable"""
    logs = sched.log10_values(sched.m + 2000)
    target = math.log10(p.delta2 * guard_fraction / max(N, 1) * (1.0 - sched.ratio_bound))
    hits = np.flatnonzero(logs[sched.head.size:] < target)
    if hits.size == 0:
        return None
    return int(max(sched.head.size + hits[0], sched.m))


def enumerate_set(
    N: int,
    p: Params,
    sched: AlphaSchedule,
    guard_fraction: float = 0.1,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> IntegerSetReport:
    """
    All n in [1, N] whose projection passes the guarded membership test

    Every clause margin must exceed n * tail_bound + tol, so the coordinates
    beyond m cannot move the untruncated point out of S_inf. Chunks are
    scanned in parallel and merged in order, so the report does not depend
    on the worker count.

    Raises:
        ScheduleConfigError: If N * tail_bound is not below delta2 * guard_fraction
            or N exceeds the precision cap
    """
    report = IntegerSetReport(
        scan_bound=max(N, 0),
        truncation=sched.m,
        tail_bound=sched.tail_bound,
        schedule_fingerprint=sched.fingerprint,
    )
    if N <= 0:
        return report

    if not N * sched.tail_bound < p.delta2 * guard_fraction:
        needed = required_truncation(sched, N, p, guard_fraction)
        largest = int(p.delta2 * guard_fraction / sched.tail_bound) if sched.tail_bound > 0 else N
        remedy = f"truncation m >= {needed}" if needed is not None else "a faster-decaying schedule"
        logger.error(f"Tail bound too large for N={N}")
        raise ScheduleConfigError(
            f"N * tail_bound = {N * sched.tail_bound:.3g} is not below delta2 * guard = "
            f"{p.delta2 * guard_fraction:.3g}; use {remedy} or N <= {largest}"
        )
    try:
        _check_exact(N, sched, p.tol)
    except CircleOverflowError as e:
        raise ScheduleConfigError(str(e))

    chunks = _chunks(1, N + 1, chunk_size)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(lambda ns: _guarded_chunk(ns, p, sched), chunks))

    for accepted, margin, anchors in results:
        report.elements.extend(int(n) for n in accepted)
        report.margins.extend(float(x) for x in margin)
        report.special_indices.extend(int(i) for i in anchors)

    logger.info(f"Enumerated S_N up to {N}: {len(report.elements)} elements")
    return report


def guarded_accepts(ns: Sequence[int], p: Params, sched: AlphaSchedule) -> np.ndarray:
    """Boolean mask of guarded membership for the given n"""
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size == 0:
        return np.zeros(0, dtype=bool)
    accepted, _, _ = _guarded_chunk(ns, p, sched)
    return np.isin(ns, accepted)


def revalidate(
    elements: Sequence[int], p: Params, sched: AlphaSchedule, factors: Sequence[int] = (2, 4)
) -> RevalidationReport:
    """Re-run the guarded membership of accepted elements at truncations factor * m"""
    truncations = [sched.m * int(f) for f in factors]
    persisted: Dict[int, bool] = {}
    lost: Dict[int, List[int]] = {}
    ns = np.asarray(list(elements), dtype=np.int64)
    for m in truncations:
        mask = guarded_accepts(ns, p, with_truncation(sched, m))
        lost[m] = [int(n) for n in ns[~mask]]
        persisted[m] = not lost[m]
        if lost[m]:
            logger.warning(f"{len(lost[m])} elements lost at truncation {m}")
    return RevalidationReport(truncations=truncations, persisted=persisted, lost=lost)


def color_integer(n: int, p: Params, sched: AlphaSchedule) -> ColorId:
    """Color of n: the color of P(n)"""
    return color_of(project(n, sched, p.tol), p)


def color_integers(
    ns: Sequence[int], p: Params, sched: AlphaSchedule, chunk_size: int = DEFAULT_CHUNK
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized colors of many integers

    Returns:
        (uint64 color ids, boundary-fragile mask), aligned with ns
    """
    ns = np.asarray(ns, dtype=np.int64)
    colors = np.empty(ns.size, dtype=np.uint64)
    fragile = np.empty(ns.size, dtype=bool)
    angles = 2.0 * math.pi
    for lo in range(0, ns.size, chunk_size):
        block = project_many(ns[lo:lo + chunk_size], sched) * angles
        real = np.sum(np.cos(block) - 1.0, axis=1)
        imag = np.sum(np.sin(block), axis=1)
        colors[lo:lo + chunk_size], fragile[lo:lo + chunk_size] = colors_of_values(real, imag, p)
    return colors, fragile


def density_check(N: int, sched: AlphaSchedule, coords: int = 2, cells: int = 10) -> DensityReport:
    """Fraction of a cells^coords grid on the first coords coordinates hit by P(1), ..., P(N)"""
    if coords < 1 or coords > sched.m:
        raise ValueError(f"coords must lie in [1, {sched.m}], got {coords}")
    ns = np.arange(1, N + 1, dtype=np.float64)
    values = frac_array(np.outer(ns, sched.alphas[:coords]))
    boxes = np.minimum(np.floor(values * cells), cells - 1).astype(np.int64)
    ids = np.ravel_multi_index(tuple(boxes.T), (cells,) * coords) if N else np.empty(0, dtype=np.int64)
    occupied = int(np.unique(ids).size)
    total = cells ** coords
    logger.debug(f"Density check: {occupied}/{total} cells occupied")
    return DensityReport(
        scan_bound=N, coords=coords, cells=cells, occupied=occupied, fraction=occupied / total
    )
