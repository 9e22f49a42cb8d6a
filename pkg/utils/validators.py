"""
Input Validation Module
Validates JSON payloads, seeds and output filenames before they reach the math modules
"""

import math
import re
from typing import Any, Dict, Optional
import logging

logger = logging.getLogger(__name__)


class ValidationError(Exception):
    """Custom validation error"""
    pass


class InputValidator:
    """Structural checks on user-supplied inputs"""

    FILENAME_PATTERN = re.compile(r'^[A-Za-z0-9_.\-]+$')
    MAX_SEED = 2 ** 64 - 1

    @staticmethod
    def validate_bohr_payload(payload: Dict[str, Any]) -> bool:
        """
        Validate a Bohr set payload {"dual": [[int, ...], ...], "epsilon": float}

        Args:
            payload: Decoded JSON object

        Returns:
            True if valid

        Raises:
            ValidationError: If invalid
        """
        if not isinstance(payload, dict):
            raise ValidationError("Bohr set payload must be a JSON object")

        dual = payload.get("dual")
        if not isinstance(dual, list) or not dual:
            raise ValidationError("'dual' must be a non-empty list of rows")

        width = None
        for r, row in enumerate(dual):
            if not isinstance(row, list) or not row:
                raise ValidationError(f"dual row {r} must be a non-empty list")
            if any(isinstance(b, bool) or not isinstance(b, int) for b in row):
                raise ValidationError(f"dual row {r} must contain only integers")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ValidationError(f"dual row {r} has {len(row)} entries, expected {width}")

        InputValidator.validate_epsilon(payload.get("epsilon"), upper=0.5, inclusive=True)
        return True

    @staticmethod
    def validate_nbhd_payload(payload: Dict[str, Any]) -> bool:
        """
        Validate a nil-Bohr payload {"polys": [[[j, a], ...], ...], "epsilon": e, "degree_bound": d}

        Raises:
            ValidationError: If invalid
        """
        if not isinstance(payload, dict):
            raise ValidationError("Neighborhood payload must be a JSON object")

        polys = payload.get("polys")
        if not isinstance(polys, list):
            raise ValidationError("'polys' must be a list")

        for k, poly in enumerate(polys):
            if not isinstance(poly, list) or not poly:
                raise ValidationError(f"poly {k} must be a non-empty list of [exponent, coefficient]")
            for term in poly:
                if not isinstance(term, (list, tuple)) or len(term) != 2:
                    raise ValidationError(f"poly {k} has a malformed term {term!r}")
                exponent, coefficient = term
                if isinstance(exponent, bool) or not isinstance(exponent, int) or exponent < 0:
                    raise ValidationError(f"poly {k} exponent {exponent!r} must be a nonnegative integer")
                if not isinstance(coefficient, (int, float)) or not math.isfinite(coefficient):
                    raise ValidationError(f"poly {k} coefficient {coefficient!r} must be a finite number")

        InputValidator.validate_epsilon(payload.get("epsilon"))
        degree_bound = payload.get("degree_bound")
        if isinstance(degree_bound, bool) or not isinstance(degree_bound, int) or degree_bound < 1:
            raise ValidationError("'degree_bound' must be a positive integer")
        return True

    @staticmethod
    def validate_epsilon(epsilon: Any, upper: Optional[float] = None, inclusive: bool = False) -> bool:
        if isinstance(epsilon, bool) or not isinstance(epsilon, (int, float)):
            raise ValidationError("'epsilon' must be a number")
        if not epsilon > 0 or not math.isfinite(epsilon):
            raise ValidationError(f"'epsilon' must be positive and finite, got {epsilon}")
        if upper is not None:
            within = epsilon <= upper if inclusive else epsilon < upper
            if not within:
                bound = "at most" if inclusive else "below"
                raise ValidationError(f"'epsilon' must be {bound} {upper}, got {epsilon}")
        return True

    @staticmethod
    def validate_seed(seed: Any) -> int:
        """
        Validate an unsigned 64-bit seed

        Returns:
            The seed as int

        Raises:
            ValidationError: If out of range
        """
        try:
            value = int(seed)
        except (TypeError, ValueError):
            raise ValidationError(f"Seed must be an integer, got {seed!r}")
        if not 0 <= value <= InputValidator.MAX_SEED:
            raise ValidationError(f"Seed must lie in [0, 2**64), got {value}")
        return value

    @staticmethod
    def validate_filename(filename: str) -> bool:
        """
        Validate an output filename

        Raises:
            ValidationError: If invalid
        """
        if not filename:
            raise ValidationError("Filename cannot be empty")

        # Check for path traversal attempts
        if '..' in filename or '/' in filename or '\\' in filename:
            raise ValidationError("Invalid filename: path traversal detected")

        if not InputValidator.FILENAME_PATTERN.match(filename):
            raise ValidationError(f"Invalid characters in filename {filename!r}")

        allowed_extensions = ['.json', '.csv']
        if not any(filename.lower().endswith(ext) for ext in allowed_extensions):
            raise ValidationError(f"Invalid file extension. Allowed: {', '.join(allowed_extensions)}")

        if len(filename) > 255:
            raise ValidationError("Filename too long")

        return True
