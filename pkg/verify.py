"""
Verification Module
Exhaustive 3-AP audits, nil-Bohr hit searches, discrepancy statistics and Cayley audits
"""

import time
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from construction import Params
from genpoly import NilBohrNbhd, bohr_neighborhood, eval_many, nilbohr_contains, nilbohr_norms
from l1_space import rz_norm_array
from projection import AlphaSchedule, IntegerSetReport, color_integers, enumerate_set, guarded_accepts

logger = logging.getLogger(__name__)

Colorer = Callable[[np.ndarray], np.ndarray]


class AuditError(ValueError):
    """Audit inputs outside the audit's preconditions"""
    pass


class ScheduleColorer:
    """Colors integers through the projection; callable on integer arrays"""

    def __init__(self, p: Params, sched: AlphaSchedule):
        self.p = p
        self.sched = sched

    def __call__(self, ns: np.ndarray) -> np.ndarray:
        return color_integers(ns, self.p, self.sched)[0]

    def colors_and_flags(self, ns: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return color_integers(ns, self.p, self.sched)


class AuditReport(BaseModel):
    """Outcome of an exhaustive 3-AP audit over [1, N]"""

    scan_bound: int
    difference_count: int
    progressions_checked: int = 0
    violation_count: int = 0
    violations: List[Tuple[int, int]] = Field(default_factory=list)
    boundary_flags: int = 0
    runtime_seconds: float = Field(0.0, exclude=True)

    @property
    def clean(self) -> bool:
        return self.violation_count == 0


class HitReport(BaseModel):
    neighborhood: Dict[str, Any]
    witness: Optional[int] = None
    scan_bound: int
    candidates_scanned: int = 0
    norms: List[float] = Field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.witness is not None


class JointCellStats(BaseModel):
    """Occupancy of a coarse grid on the joint values"""

    dimensions: int
    cells_per_axis: int
    occupied: int
    total: int
    max_relative_occupancy: float


class DiscrepancyReport(BaseModel):
    polys: List[str]
    sample_size: int
    sample_min: int
    sample_max: int
    bins: int
    sup_discrepancy: List[float]
    joint: JointCellStats


class CayleyReport(BaseModel):
    scan_bound: int
    color_count: int
    proper: bool
    occupancy: Dict[int, int]
    audit: AuditReport


def _check_differences(N: int, S_list: Sequence[int]) -> np.ndarray:
    differences = np.asarray(list(S_list), dtype=np.int64)
    if differences.size and (differences.min() < 1 or differences.max() > max(N, 0)):
        logger.error("Difference set leaves [1, N]")
        raise AuditError(f"differences must lie in [1, {N}]")
    return differences


def _audit_differences(colors: np.ndarray, differences: np.ndarray, cap: int) -> Tuple[int, int, List[Tuple[int, int]]]:
    N = colors.size
    checked = 0
    count = 0
    recorded: List[Tuple[int, int]] = []
    for s in differences:
        s = int(s)
        span = N - 2 * s
        if span <= 0:
            continue
        first = colors[:span]
        bad = (first == colors[s:s + span]) & (first == colors[2 * s:2 * s + span])
        checked += span
        hits = np.flatnonzero(bad)
        count += int(hits.size)
        for x in hits[:max(0, cap - len(recorded))]:
            recorded.append((int(x) + 1, s))
    return checked, count, recorded


def audit_3ap(
    N: int,
    S_list: Sequence[int],
    colorer: Colorer,
    workers: int = 1,
    max_recorded: int = 100,
) -> AuditReport:
    """
    Check every x in [1, N - 2s], s in S_list for a monochromatic x, x+s, x+2s

    Colors of [1, N] are computed once; differences are split across
    workers and merged in difference order, so the report is independent
    of the worker count.

    Raises:
        AuditError: If a difference lies outside [1, N]
    """
    started = time.perf_counter()
    differences = _check_differences(N, S_list)
    report = AuditReport(scan_bound=max(N, 0), difference_count=int(differences.size))
    if N <= 0 or differences.size == 0:
        return report

    ns = np.arange(1, N + 1, dtype=np.int64)
    if hasattr(colorer, "colors_and_flags"):
        colors, fragile = colorer.colors_and_flags(ns)
        report.boundary_flags = int(np.count_nonzero(fragile))
    else:
        colors = np.asarray(colorer(ns))

    parts = [part for part in np.array_split(differences, max(1, workers)) if part.size]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(lambda part: _audit_differences(colors, part, max_recorded), parts))

    for checked, count, recorded in results:
        report.progressions_checked += checked
        report.violation_count += count
        report.violations.extend(recorded[:max(0, max_recorded - len(report.violations))])

    report.runtime_seconds = time.perf_counter() - started
    if report.boundary_flags:
        logger.warning(f"{report.boundary_flags} integers colored within tol of a cell boundary")
    if report.violation_count:
        logger.warning(f"3-AP audit found {report.violation_count} monochromatic progressions")
    logger.info(
        f"3-AP audit over [1, {N}] with {differences.size} differences: "
        f"{report.progressions_checked} progressions, {report.violation_count} violations"
    )
    return report


def nilbohr_hit(
    Nbhd: NilBohrNbhd,
    N: int,
    p: Params,
    sched: AlphaSchedule,
    guard_fraction: float = 0.1,
    workers: int = 1,
    integer_set: Optional[IntegerSetReport] = None,
) -> HitReport:
    """
    First element of S_N in [1, N] lying in the nil-Bohr neighborhood

    Absence is reported, not raised.
    """
    if integer_set is None:
        integer_set = enumerate_set(N, p, sched, guard_fraction=guard_fraction, workers=workers)
    candidates = np.asarray([n for n in integer_set.elements if n <= N], dtype=np.int64)
    report = HitReport(neighborhood=Nbhd.to_payload(), scan_bound=N)
    if candidates.size == 0:
        logger.warning(f"No elements of S_N up to {N}; nothing to search")
        return report

    norms = nilbohr_norms(Nbhd, candidates)
    inside = np.all(norms < Nbhd.epsilon - Nbhd.tol, axis=0)
    hits = np.flatnonzero(inside)
    if hits.size == 0:
        report.candidates_scanned = int(candidates.size)
        logger.warning(f"No nil-Bohr hit among {candidates.size} elements up to {N}")
        return report

    first = int(hits[0])
    report.witness = int(candidates[first])
    report.candidates_scanned = first + 1
    report.norms = [float(x) for x in norms[:, first]]
    logger.info(f"Nil-Bohr hit at n={report.witness} after {first + 1} candidates")
    return report


def bohr_hit(
    frequencies: Sequence[float],
    epsilon: float,
    N: int,
    p: Params,
    sched: AlphaSchedule,
    **kwargs: Any,
) -> HitReport:
    """Hit search for the integer Bohr set {s : ||alpha_r s|| < epsilon}"""
    return nilbohr_hit(bohr_neighborhood(frequencies, epsilon), N, p, sched, **kwargs)


def recheck_hit(report: HitReport, Nbhd: NilBohrNbhd, p: Params, sched: AlphaSchedule) -> bool:
    """Independent re-validation of a witness: guarded membership and neighborhood membership"""
    if report.witness is None:
        return False
    n = report.witness
    return bool(guarded_accepts([n], p, sched)[0]) and nilbohr_contains(Nbhd, n)


def _sup_deviation(norms: np.ndarray, bins: int) -> float:
    """Max gap between the binned CDF of norms and the uniform CDF on [0, 1/2]"""
    counts, _ = np.histogram(norms, bins=bins, range=(0.0, 0.5))
    empirical = np.cumsum(counts) / norms.size
    uniform = np.arange(1, bins + 1) / bins
    return float(np.max(np.abs(empirical - uniform)))


def _joint_stats(columns: List[np.ndarray], cells: int) -> JointCellStats:
    dims = len(columns)
    if dims == 0:
        return JointCellStats(dimensions=0, cells_per_axis=cells, occupied=0, total=1, max_relative_occupancy=0.0)
    boxes = np.minimum(np.floor(np.vstack(columns) * cells), cells - 1).astype(np.int64)
    ids = np.ravel_multi_index(tuple(boxes), (cells,) * dims)
    _, counts = np.unique(ids, return_counts=True)
    total = cells ** dims
    expected = boxes.shape[1] / total
    return JointCellStats(
        dimensions=dims,
        cells_per_axis=cells,
        occupied=int(counts.size),
        total=total,
        max_relative_occupancy=float(counts.max() / expected),
    )


def discrepancy(
    Nbhd: NilBohrNbhd,
    sample: Sequence[int],
    bins: int = 20,
    sched: Optional[AlphaSchedule] = None,
    torus_coords: int = 0,
    joint_cells: int = 4,
) -> DiscrepancyReport:
    """
    Binned sup-deviation of each poly's R/Z norms from the uniform law on [0, 1/2]

    ||L(n)|| is uniform on [0, 1/2] when L(n) is equidistributed mod 1; the
    empirical CDF is compared with that one at the bin edges. Joint
    statistics cover the fractional parts of the polys and, when sched is
    given, the first torus_coords coordinates of the projection.

    Raises:
        AuditError: If the sample is empty or bins < 2
    """
    ns = np.asarray(list(sample), dtype=np.int64)
    if ns.size == 0:
        logger.error("Discrepancy requested on an empty sample")
        raise AuditError("sample must be nonempty")
    if bins < 2:
        raise AuditError(f"bins must be at least 2, got {bins}")

    columns = [eval_many(P, ns) for P in Nbhd.polys]
    deviations = [_sup_deviation(rz_norm_array(values), bins) for values in columns]

    joint_columns = list(columns)
    if sched is not None and torus_coords > 0:
        torus = np.outer(ns.astype(np.float64), sched.alphas[:torus_coords])
        joint_columns.extend(list((torus - np.floor(torus)).T))

    report = DiscrepancyReport(
        polys=[P.describe() for P in Nbhd.polys],
        sample_size=int(ns.size),
        sample_min=int(ns.min()),
        sample_max=int(ns.max()),
        bins=bins,
        sup_discrepancy=deviations,
        joint=_joint_stats(joint_columns, joint_cells),
    )
    logger.info(f"Discrepancy over {ns.size} samples: {', '.join(f'{d:.4f}' for d in deviations)}")
    return report


class _TableColorer:
    """Colors of [1, N] looked up from a precomputed table"""

    def __init__(self, colors: np.ndarray, fragile: Optional[np.ndarray] = None):
        self.colors = colors
        self.fragile = fragile

    def __call__(self, ns: np.ndarray) -> np.ndarray:
        return self.colors[np.asarray(ns, dtype=np.int64) - 1]

    def colors_and_flags(self, ns: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        idx = np.asarray(ns, dtype=np.int64) - 1
        flags = self.fragile[idx] if self.fragile is not None else np.zeros(idx.size, dtype=bool)
        return self.colors[idx], flags


def cayley_audit(N: int, S_list: Sequence[int], colorer: Colorer, workers: int = 1) -> CayleyReport:
    """Distinct colors used on [1, N], 3-AP properness and color-class occupancy"""
    if N <= 0:
        audit = audit_3ap(N, S_list, colorer, workers=workers)
        return CayleyReport(scan_bound=0, color_count=0, proper=True, occupancy={}, audit=audit)

    ns = np.arange(1, N + 1, dtype=np.int64)
    if hasattr(colorer, "colors_and_flags"):
        table = _TableColorer(*colorer.colors_and_flags(ns))
    else:
        table = _TableColorer(np.asarray(colorer(ns)))
    audit = audit_3ap(N, S_list, table, workers=workers)

    _, sizes = np.unique(table.colors, return_counts=True)
    occupancy = dict(sorted(Counter(int(x) for x in sizes).items()))
    report = CayleyReport(
        scan_bound=N,
        color_count=int(sizes.size),
        proper=audit.clean,
        occupancy=occupancy,
        audit=audit,
    )
    logger.info(f"Cayley audit over [1, {N}]: {report.color_count} colors, proper={report.proper}")
    return report


def mutate_colorer(colorer: Colorer, x: int, s: int) -> Colorer:
    """A colorer that agrees with colorer except that x+s and x+2s take the color of x"""

    def mutated(ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64)
        colors = np.array(colorer(ns), copy=True)
        target = np.asarray(colorer(np.array([x], dtype=np.int64)))[0]
        colors[(ns == x + s) | (ns == x + 2 * s)] = target
        return colors

    return mutated
