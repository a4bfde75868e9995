"""Logging setup for OrbitMesh."""

import logging
import os
import sys

import structlog

LOG_LEVEL_ENV = "ORBITMESH_LOG_LEVEL"


def configure_logging(verbose: bool = False) -> None:
    """
    Configure structlog to write key-value lines to stderr.

    Stdout stays reserved for command output (event logs, CSV).

    Args:
        verbose: Log at INFO instead of WARNING. ``ORBITMESH_LOG_LEVEL``
            overrides both.
    """
    level_name = os.environ.get(LOG_LEVEL_ENV)
    if level_name:
        level = logging.getLevelName(level_name.upper())
        if not isinstance(level, int):
            level = logging.WARNING
    else:
        level = logging.INFO if verbose else logging.WARNING

    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.processors.KeyValueRenderer(
                key_order=["timestamp", "level", "event"], drop_missing=True
            ),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
