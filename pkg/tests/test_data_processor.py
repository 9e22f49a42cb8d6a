"""
Tests for data_processor
"""

import pytest

from data_processor import AUDIT_COLUMNS, INTEGER_SET_COLUMNS, DataProcessor
from genpoly import NilBohrNbhd, SpecialGenPoly
from projection import IntegerSetReport
from verify import AuditReport, HitReport, discrepancy


@pytest.fixture
def small_set():
    return IntegerSetReport(
        elements=[36000, 35990, 36010],
        margins=[3e-5, 1e-5, 2e-5],
        special_indices=[1, 1, 1],
        scan_bound=40000,
    )


class TestIntegerSetTable:

    def test_sorted_rows(self, small_set):
        df = DataProcessor.integer_set_to_dataframe(small_set)
        assert list(df.columns) == INTEGER_SET_COLUMNS
        assert df['n'].tolist() == [35990, 36000, 36010]
        assert df['margin'].tolist() == [1e-5, 3e-5, 2e-5]

    def test_empty_keeps_columns(self):
        df = DataProcessor.integer_set_to_dataframe(IntegerSetReport())
        assert df.empty
        assert list(df.columns) == INTEGER_SET_COLUMNS

    def test_summary_stats(self, small_set):
        stats = DataProcessor.get_summary_stats(DataProcessor.integer_set_to_dataframe(small_set))
        assert stats['element_count'] == 3
        assert stats['first_element'] == 35990
        assert stats['last_element'] == 36010
        assert stats['min_margin'] == pytest.approx(1e-5)
        assert stats['max_margin'] == pytest.approx(3e-5)
        assert stats['median_gap'] == 10.0

    def test_summary_stats_empty(self):
        stats = DataProcessor.get_summary_stats(DataProcessor.integer_set_to_dataframe(IntegerSetReport()))
        assert stats['element_count'] == 0
        assert stats['first_element'] is None

    def test_single_element_has_no_gap(self):
        report = IntegerSetReport(elements=[5], margins=[0.1], special_indices=[1])
        stats = DataProcessor.get_summary_stats(DataProcessor.integer_set_to_dataframe(report))
        assert stats['median_gap'] is None


class TestReportTables:

    def test_audit_rows(self):
        report = AuditReport(scan_bound=10, difference_count=1, violation_count=2, violations=[(1, 2), (3, 2)])
        df = DataProcessor.audit_to_dataframe(report)
        assert list(df.columns) == AUDIT_COLUMNS
        assert df.iloc[1].tolist() == [3, 2, 5, 7]

    def test_clean_audit(self):
        df = DataProcessor.audit_to_dataframe(AuditReport(scan_bound=10, difference_count=0))
        assert df.empty
        assert list(df.columns) == AUDIT_COLUMNS

    def test_hits(self):
        reports = {
            "found": HitReport(neighborhood={}, witness=35954, scan_bound=36100, candidates_scanned=13, norms=[0.007, 0.01]),
            "absent": HitReport(neighborhood={}, scan_bound=36100, candidates_scanned=71),
        }
        df = DataProcessor.hits_to_dataframe(reports)
        assert df['neighborhood'].tolist() == ["found", "absent"]
        assert df['found'].tolist() == [True, False]
        assert df.loc[0, 'max_norm'] == 0.01

    def test_discrepancy_rows(self):
        nbhd = NilBohrNbhd(
            polys=(SpecialGenPoly.single(1, 0.25), SpecialGenPoly.single(1, 0.5)),
            epsilon=0.5,
            degree_bound=1,
        )
        df = DataProcessor.discrepancy_to_dataframe({"range": discrepancy(nbhd, range(1, 101), bins=4)})
        assert len(df) == 2
        assert df['sample_size'].tolist() == [100, 100]
        assert df['bins'].tolist() == [4, 4]
