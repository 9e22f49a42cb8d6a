"""
Data Processing Module
Turns enumeration, audit, hit and discrepancy reports into tables and summaries
"""

import pandas as pd
from typing import List, Dict, Any
import logging

from projection import IntegerSetReport
from verify import AuditReport, CayleyReport, DiscrepancyReport, HitReport

logger = logging.getLogger(__name__)

INTEGER_SET_COLUMNS = ['n', 'margin', 'special_index']
AUDIT_COLUMNS = ['x', 's', 'x_plus_s', 'x_plus_2s']


class DataProcessor:
    """Tabulate report models"""

    @staticmethod
    def integer_set_to_dataframe(report: IntegerSetReport) -> pd.DataFrame:
        """
        One row per element of S_N

        Args:
            report: Enumeration report

        Returns:
            DataFrame with columns n, margin, special_index (header kept when empty)
        """
        if not report.elements:
            logger.warning("Integer set is empty")
            return pd.DataFrame(columns=INTEGER_SET_COLUMNS)

        df = pd.DataFrame({
            'n': report.elements,
            'margin': report.margins,
            'special_index': report.special_indices,
        })
        return df.sort_values('n').reset_index(drop=True)

    @staticmethod
    def audit_to_dataframe(report: AuditReport) -> pd.DataFrame:
        """Recorded violations as explicit progressions"""
        if not report.violations:
            return pd.DataFrame(columns=AUDIT_COLUMNS)
        rows = [
            {'x': x, 's': s, 'x_plus_s': x + s, 'x_plus_2s': x + 2 * s}
            for x, s in report.violations
        ]
        return pd.DataFrame(rows, columns=AUDIT_COLUMNS)

    @staticmethod
    def hits_to_dataframe(reports: Dict[str, HitReport]) -> pd.DataFrame:
        rows = []
        for name, report in reports.items():
            rows.append({
                'neighborhood': name,
                'witness': report.witness,
                'found': report.found,
                'candidates_scanned': report.candidates_scanned,
                'max_norm': max(report.norms) if report.norms else None,
                'scan_bound': report.scan_bound,
            })
        return pd.DataFrame(
            rows,
            columns=['neighborhood', 'witness', 'found', 'candidates_scanned', 'max_norm', 'scan_bound'],
        )

    @staticmethod
    def discrepancy_to_dataframe(reports: Dict[str, DiscrepancyReport]) -> pd.DataFrame:
        rows: List[Dict[str, Any]] = []
        for sample_name, report in reports.items():
            for poly, deviation in zip(report.polys, report.sup_discrepancy):
                rows.append({
                    'sample': sample_name,
                    'poly': poly,
                    'sample_size': report.sample_size,
                    'bins': report.bins,
                    'sup_discrepancy': deviation,
                })
        return pd.DataFrame(rows, columns=['sample', 'poly', 'sample_size', 'bins', 'sup_discrepancy'])

    @staticmethod
    def occupancy_to_dataframe(report: CayleyReport) -> pd.DataFrame:
        """Color-class size histogram"""
        return pd.DataFrame(
            [{'class_size': size, 'colors': count} for size, count in report.occupancy.items()],
            columns=['class_size', 'colors'],
        )

    @staticmethod
    def get_summary_stats(df: pd.DataFrame) -> Dict[str, Any]:
        """
        Summary statistics of an integer-set table

        Args:
            df: Output of integer_set_to_dataframe

        Returns:
            Dictionary with count, range, margin extremes and gap statistics
        """
        if df.empty:
            return {
                'element_count': 0,
                'first_element': None,
                'last_element': None,
                'min_margin': None,
                'max_margin': None,
                'median_gap': None,
            }

        gaps = df['n'].diff().dropna()
        return {
            'element_count': int(len(df)),
            'first_element': int(df['n'].iloc[0]),
            'last_element': int(df['n'].iloc[-1]),
            'min_margin': float(df['margin'].min()),
            'max_margin': float(df['margin'].max()),
            'median_gap': float(gaps.median()) if not gaps.empty else None,
        }
