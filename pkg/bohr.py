"""
Bohr Module
Bohr neighborhoods on the truncated l1 torus and the constructive S_m witness
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_serializer

from construction import ConstructionViolation, Params, is_member
from l1_space import DimensionError, SparsePoint, frac_array, rz_norm_array, to_pairs
from utils.validators import InputValidator

logger = logging.getLogger(__name__)


class NeedLargerM(ValueError):
    """No cluster filled before the dual's columns ran out"""

    def __init__(self, bound: int, message: str):
        super().__init__(message)
        self.bound = bound


@dataclass(frozen=True)
class TorusBohrSet:
    """
    Bohr neighborhood {x : max_r ||<b_r, x>|| < epsilon}

    Attributes:
        dual: (k, m) integer matrix, row r is the functional b_r
        epsilon: Width in (0, 1/2]
    """

    dual: np.ndarray
    epsilon: float
    bound: int = field(init=False)

    def __post_init__(self) -> None:
        dual = np.atleast_2d(np.asarray(self.dual, dtype=np.int64))
        if dual.shape[0] < 1 or dual.shape[1] < 1:
            raise DimensionError("dual matrix needs at least one row and one column")
        if not 0.0 < self.epsilon <= 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2], got {self.epsilon}")
        dual.setflags(write=False)
        object.__setattr__(self, "dual", dual)
        object.__setattr__(self, "bound", int(np.max(np.abs(dual))))

    @property
    def k(self) -> int:
        return int(self.dual.shape[0])

    @property
    def m(self) -> int:
        return int(self.dual.shape[1])

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "TorusBohrSet":
        """Build from a JSON payload {"dual": [[...], ...], "epsilon": e}"""
        InputValidator.validate_bohr_payload(payload)
        return cls(np.asarray(payload["dual"], dtype=np.int64), float(payload["epsilon"]))

    def to_payload(self) -> Dict[str, Any]:
        return {"dual": self.dual.tolist(), "epsilon": self.epsilon}


class WitnessReport(BaseModel):
    """A point of S_m inside a Bohr neighborhood, with the proof's bookkeeping"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    witness: SparsePoint
    cluster: List[int]
    anchor: int
    sup_norm: float
    chain_bound: float
    scanned: int
    k: int
    inverse_width: float

    @field_serializer("witness")
    def serialize_witness(self, witness: SparsePoint) -> List[Tuple[int, float]]:
        return to_pairs(witness)


def dual_apply(B: TorusBohrSet, x: SparsePoint) -> np.ndarray:
    """r-th entry frac(sum_i b_{r,i} a_i)"""
    extent = x.ambient if x.ambient is not None else (
        int(x.indices[-1]) if x.support_size else 0
    )
    if extent > B.m:
        logger.error(f"Point ambient {extent} exceeds dual width {B.m}")
        raise DimensionError(f"point ambient {extent} exceeds dual width m={B.m}")
    if x.support_size == 0:
        return np.zeros(B.k)
    columns = B.dual[:, x.indices - 1].astype(np.float64)
    return frac_array(columns @ x.values)


def sup_norm(B: TorusBohrSet, x: SparsePoint) -> float:
    """|f(x)|, the maximum R/Z norm over the k functionals"""
    return float(np.max(rz_norm_array(dual_apply(B, x))))


def bohr_contains(B: TorusBohrSet, x: SparsePoint, tol: float = 1e-9) -> bool:
    return sup_norm(B, x) < B.epsilon - tol


def pigeonhole_bound(B: TorusBohrSet, p: Params) -> int:
    """Columns that guarantee a filled cell: (K+1-1) * ceil(1/(delta2 eps))^k + 1"""
    cells = int(math.ceil(1.0 / (p.delta2 * B.epsilon)))
    return p.ratio * cells ** B.k + 1


def find_cluster(B: TorusBohrSet, p: Params) -> Tuple[int, List[int]]:
    """
    Find 1 + delta1/delta2 indices whose vectors f_j = f(delta2 e_j) share a grid cell

    Cells are half-open boxes of sup-side delta2*eps, so any two members of
    a cell are within delta2*eps of each other; the first member of the
    first cell to fill is the anchor.

    Returns:
        (anchor index, sorted cluster indices), both 1-based

    Raises:
        NeedLargerM: If no cell fills within the dual's m columns
    """
    target = p.ratio + 1
    side = p.delta2 * B.epsilon
    vectors = frac_array(p.delta2 * B.dual.astype(np.float64))
    cells = np.floor(vectors / side).astype(np.int64)

    _, labels = np.unique(cells, axis=1, return_inverse=True)
    labels = np.asarray(labels).reshape(-1)
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    starts = np.flatnonzero(np.r_[True, sorted_labels[1:] != sorted_labels[:-1]])
    sizes = np.diff(np.r_[starts, sorted_labels.size])

    full = np.flatnonzero(sizes >= target)
    if full.size == 0:
        bound = pigeonhole_bound(B, p)
        logger.error(f"No cluster of size {target} among {B.m} columns")
        raise NeedLargerM(
            bound,
            f"no cell reached {target} members within m={B.m}; "
            f"m >= {bound} suffices by pigeonhole",
        )

    # column at which each full cell reaches the target count
    filled_at = order[starts[full] + target - 1]
    winner = full[np.argmin(filled_at)]
    members = np.sort(order[starts[winner]:starts[winner] + target])
    cluster = [int(c) + 1 for c in members]
    logger.debug(f"Cluster filled at column {int(np.min(filled_at)) + 1}")
    return cluster[0], cluster


def build_witness(B: TorusBohrSet, p: Params) -> WitnessReport:
    """
    The vector -delta1 e_i + delta2 sum_{j in T, j != i} e_j, checked to lie in S_m and B

    Raises:
        DimensionError: If Params.m is set and differs from the Bohr set's m
        NeedLargerM: Propagated from find_cluster
        ConstructionViolation: If a postcondition fails
    """
    if p.m is not None and p.m != B.m:
        logger.error(f"Bohr set lives on T^{B.m} but the parameters truncate at m={p.m}")
        raise DimensionError(f"params.m={p.m} does not match the Bohr set dimension {B.m}")
    anchor, cluster = find_cluster(B, p)
    ambient = B.m
    others = [j for j in cluster if j != anchor]
    witness = SparsePoint.build(
        [anchor] + others, [-p.delta1] + [p.delta2] * len(others), ambient
    )

    f_vectors = frac_array(p.delta2 * B.dual[:, np.array(cluster) - 1].astype(np.float64))
    anchor_vector = f_vectors[:, 0:1]
    chain = float(np.sum(np.max(rz_norm_array(frac_array(f_vectors - anchor_vector)), axis=0)))
    norm = sup_norm(B, witness)

    certificate = is_member(witness, p)
    if not certificate.is_member:
        logger.error(f"Witness left S_m: margins {certificate.margins}")
        raise ConstructionViolation("cluster witness is not a member of S_m")
    if not norm <= chain + p.tol or not chain <= p.delta1 * B.epsilon + p.tol:
        logger.error(f"Witness norm chain failed: |f(v)|={norm}, chain={chain}")
        raise ConstructionViolation(
            f"norm chain |f(v)|={norm:.3g} <= {chain:.3g} <= delta1*eps={p.delta1 * B.epsilon:.3g} failed"
        )
    if not norm < B.epsilon:
        raise ConstructionViolation(f"witness norm {norm} not below epsilon {B.epsilon}")

    logger.info(f"Built Bohr witness: anchor={anchor}, |f(v)|={norm:.3e}, scanned={B.m}")
    return WitnessReport(
        witness=witness,
        cluster=cluster,
        anchor=anchor,
        sup_norm=norm,
        chain_bound=chain,
        scanned=int(max(cluster)),
        k=B.k,
        inverse_width=1.0 / B.epsilon,
    )


def random_dual(k: int, m: int, bound: int, seed: int) -> np.ndarray:
    """Integer dual matrix with entries uniform in [-bound, bound]"""
    rng = np.random.default_rng(seed)
    return rng.integers(-bound, bound + 1, size=(k, m), dtype=np.int64)
