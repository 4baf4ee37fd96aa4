# logging_config.py
"""
Logging setup for solver runs.

Usage:
    from nematiq.logging_config import configure_logging
    configure_logging()               # INFO: experiment progress, snapshots, audit summary
    configure_logging(level='DEBUG')  # adds per-step energies and Krylov iterations
    configure_logging(quiet=True)     # audit violations and solver stalls only

Environment variable:
    NEMATIQ_LOG_LEVEL - DEBUG, INFO, WARNING or ERROR

Python warnings (numpy floating-point and scipy solver warnings) are routed into the
'py.warnings' logger so they share the run's format and level.
"""
import logging
import os

DEFAULT_FORMAT = '%(asctime)s %(levelname)-8s %(name)s:%(funcName)s:%(lineno)d - %(message)s'
DEFAULT_LEVEL = 'INFO'
QUIET_LEVEL = 'WARNING'
PACKAGE_LOGGERS = ('nematiq', 'py.warnings')


def configure_logging(
    level: str | None = None,
    format_string: str = DEFAULT_FORMAT,
    quiet: bool = False,
) -> int:
    """
    Configure logging for the solver and the experiment harness.

    Args:
        level: Log level name. Falls back to NEMATIQ_LOG_LEVEL, then DEFAULT_LEVEL.
        format_string: Log message format.
        quiet: Use QUIET_LEVEL regardless of `level` and the environment.

    Returns:
        The numeric level applied to the package loggers.
    """
    # Priority: quiet > explicit arg > env var > default
    log_level = QUIET_LEVEL if quiet else level or os.environ.get('NEMATIQ_LOG_LEVEL', DEFAULT_LEVEL)

    numeric_level = logging.getLevelName(log_level.upper())
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO

    logging.basicConfig(
        level=numeric_level,
        format=format_string,
    )
    logging.captureWarnings(True)

    # scipy and numpy loggers keep their own levels
    for name in PACKAGE_LOGGERS:
        logging.getLogger(name).setLevel(numeric_level)
    if log_level.upper() != logging.getLevelName(numeric_level):
        logging.getLogger('nematiq').warning(f"Unknown log level '{log_level}', using INFO")
    return numeric_level
