"""
Data Export Module
Writes reports as JSON envelopes and tables as CSV
"""

import json
import pandas as pd
from pathlib import Path
from datetime import datetime, timezone
from typing import Any, Dict, Optional, Union
import logging

from pydantic import BaseModel

from .validators import InputValidator, ValidationError

logger = logging.getLogger(__name__)


class ExportError(Exception):
    """Custom export error"""
    pass


class DataExporter:
    """Export reports and tables to disk"""

    @staticmethod
    def envelope(
        report: Union[BaseModel, Dict[str, Any]],
        command: str,
        config_fingerprint: str,
        extra_header: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, Any]:
        """
        Wrap a report as {"header": {...}, "report": {...}}

        Volatile fields (timestamp, runtime) live only in the header.
        """
        body = report.model_dump(mode="json") if isinstance(report, BaseModel) else report
        header: Dict[str, Any] = {
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "command": command,
            "config_fingerprint": config_fingerprint,
        }
        if extra_header:
            header.update(extra_header)
        return {"header": header, "report": body}

    @staticmethod
    def to_json(payload: Dict[str, Any], path: Union[str, Path]) -> Path:
        """
        Write a JSON document

        Raises:
            ExportError: If writing fails
        """
        target = Path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")
        except (OSError, TypeError, ValueError) as e:
            logger.error(f"JSON export failed: {str(e)}")
            raise ExportError(f"Failed to export JSON to {target}: {str(e)}")
        logger.info(f"Wrote {target}")
        return target

    @staticmethod
    def to_csv(df: pd.DataFrame, path: Optional[Union[str, Path]] = None, include_index: bool = False) -> str:
        """
        Export DataFrame to CSV; an empty frame still writes its header

        Args:
            df: DataFrame to export
            path: File to write, if any
            include_index: Whether to include index in CSV

        Returns:
            CSV string

        Raises:
            ExportError: If export fails
        """
        try:
            csv_string = df.to_csv(index=include_index, lineterminator="\n")
            if path is not None:
                target = Path(path)
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(csv_string, encoding="utf-8")
                logger.info(f"Wrote {len(df)} rows to {target}")
            return csv_string

        except OSError as e:
            logger.error(f"CSV export failed: {str(e)}")
            raise ExportError(f"Failed to export to CSV: {str(e)}")

    @staticmethod
    def get_filename(
        base_name: str,
        extension: str,
        include_timestamp: bool = False
    ) -> str:
        """
        Generate safe filename

        Args:
            base_name: Base filename
            extension: File extension (with or without dot)
            include_timestamp: Whether to include timestamp

        Returns:
            Generated filename

        Raises:
            ExportError: If no valid filename results
        """
        if not extension.startswith('.'):
            extension = '.' + extension

        safe_name = ''.join(c for c in base_name if c.isalnum() or c in ['-', '_'])

        if include_timestamp:
            timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
            filename = f"{safe_name}_{timestamp}{extension}"
        else:
            filename = f"{safe_name}{extension}"

        try:
            InputValidator.validate_filename(filename)
        except ValidationError as e:
            raise ExportError(str(e))
        return filename
