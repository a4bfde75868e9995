"""Utility functions for OrbitMesh."""

from .errors import OrbitMeshError, Violation
from .log_utils import configure_logging
from .text_utils import format_number, read_text_file, render_csv, save_text_to_file

__all__ = [
    'OrbitMeshError', 'Violation', 'configure_logging', 'format_number', 'read_text_file',
    'render_csv', 'save_text_to_file',
]
