"""Utils package initialization"""

from .logger import setup_logging
from .validators import InputValidator, ValidationError
from .exporters import DataExporter, ExportError

__all__ = [
    'setup_logging',
    'InputValidator',
    'ValidationError',
    'DataExporter',
    'ExportError'
]