"""
Logging configuration for the MCDA benchmark.
"""
import logging
import sys

from . import settings


def setup_logging(level=None):
    """Configure logging for the application. Everything goes to stderr."""
    log_level = level or getattr(logging, settings.LOG_LEVEL, logging.INFO)

    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        stream=sys.stderr,
        force=True,
    )

    # Set specific loggers
    logging.getLogger('discriminant').setLevel(log_level)
    logging.getLogger('sklearn').setLevel(logging.WARNING)
    logging.getLogger('joblib').setLevel(logging.WARNING)
