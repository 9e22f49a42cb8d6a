"""
Tests for l1_space
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from circle_math import rz_norm
from l1_space import (
    DimensionError,
    SparsePoint,
    add,
    from_dense,
    from_mapping,
    from_pairs,
    l1_norm,
    l2_norm_sq,
    max_norm,
    negate,
    parallelogram_defect,
    scale,
    subtract,
    to_pairs,
)

INDEX_RANGE = 20

points = st.dictionaries(
    st.integers(min_value=1, max_value=INDEX_RANGE),
    st.floats(min_value=0.0, max_value=1.0, exclude_max=True),
    max_size=10,
).map(from_mapping)


def assert_close(x: SparsePoint, y: SparsePoint, tol: float = 1e-12) -> None:
    for i in range(1, INDEX_RANGE + 1):
        assert rz_norm(x.coordinate(i) - y.coordinate(i)) <= tol


class TestSparsePoint:

    def test_zero_entries_are_elided(self):
        x = from_dense([0.0, 0.25, 1.0, 2.5])
        assert x.as_dict() == {2: 0.25, 4: 0.5}

    def test_duplicates_merge(self):
        x = SparsePoint.build([3, 3], [0.25, 0.5])
        assert x.as_dict() == {3: 0.75}

    def test_constructor_rejects_unsorted_indices(self):
        with pytest.raises(DimensionError):
            SparsePoint(np.array([2, 1]), np.array([0.1, 0.2]))

    def test_constructor_rejects_zero_value(self):
        with pytest.raises(DimensionError):
            SparsePoint(np.array([1]), np.array([0.0]))

    def test_ambient_bound(self):
        with pytest.raises(DimensionError):
            from_mapping({5: 0.1}, ambient=4)

    def test_immutable(self):
        x = from_mapping({1: 0.3})
        with pytest.raises(ValueError):
            x.values[0] = 0.4

    def test_pairs(self):
        x = from_pairs([[4, 0.5], [2, 0.25]], ambient=10)
        assert to_pairs(x) == [(2, 0.25), (4, 0.5)]
        assert x.ambient == 10


class TestArithmetic:

    def test_add_identity(self):
        x = from_mapping({1: 0.3, 7: 0.9})
        assert add(x, SparsePoint.zero()) == x

    def test_add_wraps(self):
        x = from_mapping({1: 0.6})
        assert add(x, x).coordinate(1) == pytest.approx(0.2)

    def test_add_cancels(self):
        x = from_mapping({1: 0.5})
        assert add(x, x).support_size == 0

    def test_incompatible_ambients(self):
        with pytest.raises(DimensionError):
            add(from_mapping({1: 0.1}, ambient=3), from_mapping({1: 0.1}, ambient=5))

    def test_negate(self):
        assert negate(from_mapping({1: 0.25})).as_dict() == {1: 0.75}

    def test_subtract_self_is_zero(self):
        x = from_mapping({2: 0.1, 3: 0.7})
        assert subtract(x, x).support_size == 0

    def test_scale(self):
        assert scale(from_mapping({1: 0.6}), 2).coordinate(1) == pytest.approx(0.2)

    def test_operators(self):
        x = from_mapping({1: 0.25})
        y = from_mapping({2: 0.5})
        assert (x + y) - y == x
        assert -x == negate(x)

    @given(points, points)
    def test_commutative(self, x, y):
        assert_close(add(x, y), add(y, x))

    @given(points, points, points)
    def test_associative(self, x, y, z):
        assert_close(add(add(x, y), z), add(x, add(y, z)))


class TestNorms:

    def test_l1_examples(self):
        assert l1_norm(SparsePoint.zero()) == 0.0
        assert l1_norm(from_mapping({1: 1 / 3, 2: 2 / 3})) == pytest.approx(2 / 3)
        assert l1_norm(from_mapping({1: 0.9})) == pytest.approx(0.1)

    def test_l2_examples(self):
        assert l2_norm_sq(from_dense([0.0, 1 / 3, 2 / 3])) == pytest.approx(2 / 9, abs=1e-12)
        assert l2_norm_sq(from_dense([1 / 3] * 3)) == pytest.approx(1 / 3, abs=1e-12)
        assert l2_norm_sq(SparsePoint.zero()) == 0.0

    def test_parallelogram_law_fails(self):
        x = from_dense([0.0, 1 / 3, 2 / 3])
        d = from_dense([1 / 3, 1 / 3, 1 / 3])
        assert l2_norm_sq(add(x, d)) == pytest.approx(2 / 9, abs=1e-12)
        assert l2_norm_sq(x) == pytest.approx(2 / 9, abs=1e-12)
        assert l2_norm_sq(subtract(x, d)) == pytest.approx(2 / 9, abs=1e-12)
        assert l2_norm_sq(d) == pytest.approx(1 / 3, abs=1e-12)
        assert parallelogram_defect(x, d) == pytest.approx(-2 / 3, abs=1e-12)

    @given(points)
    def test_l2_bounded_by_l1(self, x):
        l1 = l1_norm(x)
        assert l2_norm_sq(x) <= l1 * max_norm(x) + 1e-12
        assert l1 * max_norm(x) <= l1 ** 2 + 1e-12
