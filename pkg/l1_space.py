"""
L1 Torus Module
Finitely supported points of the truncated l1 torus l1(N_{<=m}; R/Z)
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


class DimensionError(ValueError):
    """Incompatible ambient truncation bounds"""
    pass


def _as_frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def frac_array(values: np.ndarray) -> np.ndarray:
    """Vectorized fractional part, canonical in [0, 1)"""
    out = values - np.floor(values)
    out[out >= 1.0] = 0.0
    return out


def rz_norm_array(values: np.ndarray) -> np.ndarray:
    """Vectorized R/Z norm of canonical values"""
    return np.minimum(values, 1.0 - values)


@dataclass(frozen=True)
class SparsePoint:
    """
    A point of the l1 torus with only its nonzero coordinates stored

    Attributes:
        indices: Strictly increasing positive coordinate indices
        values: Canonical circle values in (0, 1), aligned with indices
        ambient: Truncation bound m, or None for the untruncated torus
    """

    indices: np.ndarray
    values: np.ndarray
    ambient: Optional[int] = None
    _norms: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        indices = np.asarray(self.indices, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if indices.shape != values.shape or indices.ndim != 1:
            raise DimensionError("indices and values must be aligned 1-d arrays")
        if indices.size:
            if indices[0] < 1 or np.any(np.diff(indices) <= 0):
                raise DimensionError("indices must be positive and strictly increasing")
            if self.ambient is not None and indices[-1] > self.ambient:
                raise DimensionError(
                    f"index {int(indices[-1])} exceeds ambient bound {self.ambient}"
                )
            if np.any(values <= 0.0) or np.any(values >= 1.0):
                raise DimensionError("stored values must lie in (0, 1); zeros are elided")
        object.__setattr__(self, "indices", _as_frozen(indices.copy()))
        object.__setattr__(self, "values", _as_frozen(values.copy()))
        object.__setattr__(self, "_norms", _as_frozen(rz_norm_array(values)))

    @classmethod
    def build(
        cls,
        indices: Iterable[int],
        values: Iterable[float],
        ambient: Optional[int] = None,
    ) -> "SparsePoint":
        """Build from arbitrary reals: reduce mod 1, merge duplicates, drop zeros"""
        idx = np.asarray(list(indices), dtype=np.int64)
        val = np.asarray(list(values), dtype=np.float64)
        return _normalize(idx, val, ambient)

    @classmethod
    def zero(cls, ambient: Optional[int] = None) -> "SparsePoint":
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64), ambient)

    @property
    def support_size(self) -> int:
        return int(self.indices.size)

    @property
    def norms(self) -> np.ndarray:
        """R/Z norms of the stored coordinates"""
        return self._norms

    def coordinate(self, index: int) -> float:
        pos = np.searchsorted(self.indices, index)
        if pos < self.indices.size and self.indices[pos] == index:
            return float(self.values[pos])
        return 0.0

    def as_dict(self) -> dict:
        return {int(i): float(v) for i, v in zip(self.indices, self.values)}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparsePoint):
            return NotImplemented
        return (
            self.ambient == other.ambient
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((self.ambient, self.indices.tobytes(), self.values.tobytes()))

    def __add__(self, other: "SparsePoint") -> "SparsePoint":
        return add(self, other)

    def __neg__(self) -> "SparsePoint":
        return negate(self)

    def __sub__(self, other: "SparsePoint") -> "SparsePoint":
        return subtract(self, other)


def _normalize(indices: np.ndarray, values: np.ndarray, ambient: Optional[int]) -> SparsePoint:
    if indices.size == 0:
        return SparsePoint.zero(ambient)
    unique, inverse = np.unique(indices, return_inverse=True)
    summed = np.bincount(inverse, weights=values, minlength=unique.size)
    reduced = frac_array(summed)
    keep = reduced != 0.0
    return SparsePoint(unique[keep], reduced[keep], ambient)


def combined_ambient(a: Optional[int], b: Optional[int]) -> Optional[int]:
    """Ambient of a sum; truncated points combine only at equal bounds"""
    if a == b:
        return a
    logger.error(f"Ambient mismatch: {a} vs {b}")
    raise DimensionError(f"Incompatible ambient bounds: {a} and {b}")


def add(x: SparsePoint, y: SparsePoint) -> SparsePoint:
    """Coordinatewise sum in R/Z"""
    ambient = combined_ambient(x.ambient, y.ambient)
    if y.support_size == 0:
        return x
    if x.support_size == 0:
        return y
    return _normalize(
        np.concatenate([x.indices, y.indices]),
        np.concatenate([x.values, y.values]),
        ambient,
    )


def negate(x: SparsePoint) -> SparsePoint:
    """Coordinatewise negation, 1 - value on the support"""
    return _normalize(x.indices.copy(), -x.values, x.ambient)


def subtract(x: SparsePoint, y: SparsePoint) -> SparsePoint:
    return add(x, negate(y))


def scale(x: SparsePoint, k: int) -> SparsePoint:
    """Integer multiple k*x"""
    return _normalize(x.indices.copy(), x.values * int(k), x.ambient)


def l1_norm(x: SparsePoint) -> float:
    """Sum of R/Z norms over the support"""
    return float(np.sum(x.norms))


def l2_norm_sq(x: SparsePoint) -> float:
    """Sum of squared R/Z norms over the support"""
    return float(np.sum(x.norms ** 2))


def max_norm(x: SparsePoint) -> float:
    return float(np.max(x.norms)) if x.support_size else 0.0


def parallelogram_defect(x: SparsePoint, d: SparsePoint) -> float:
    """
    |x+d|^2 - 2|x|^2 + |x-d|^2 - 2|d|^2 in the squared l2 norm

    Zero in a Hilbert space; the l1 torus has no such structure.
    """
    return (
        l2_norm_sq(add(x, d))
        - 2.0 * l2_norm_sq(x)
        + l2_norm_sq(subtract(x, d))
        - 2.0 * l2_norm_sq(d)
    )


def from_dense(values: Sequence[float], ambient: Optional[int] = None) -> SparsePoint:
    """Point whose coordinate i (1-based) is values[i-1]"""
    return SparsePoint.build(range(1, len(values) + 1), values, ambient)


def from_mapping(entries: Mapping[int, float], ambient: Optional[int] = None) -> SparsePoint:
    return SparsePoint.build(entries.keys(), entries.values(), ambient)


def to_pairs(x: SparsePoint) -> List[Tuple[int, float]]:
    """JSON-ready list of (index, value) pairs"""
    return [(int(i), float(v)) for i, v in zip(x.indices, x.values)]


def from_pairs(pairs: Iterable[Sequence[float]], ambient: Optional[int] = None) -> SparsePoint:
    pairs = list(pairs)
    return SparsePoint.build((int(p[0]) for p in pairs), (float(p[1]) for p in pairs), ambient)
