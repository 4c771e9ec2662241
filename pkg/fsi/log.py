# fsi/log.py
"""
Library logging.

Modules log through `get_logger(__name__)`; the CLI calls `setup_logging()`
once so records render through rich on stderr.
"""

import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

from configs.env import LOG_DATE_FORMAT, LOG_FORMAT, LOG_LEVEL

ROOT_LOGGER = "fsi"

_configured = False


def setup_logging(level: Optional[str] = None, console: Optional[Console] = None) -> None:
    """Attach a RichHandler to the package loggers (idempotent)"""
    global _configured

    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
        log_time_format=LOG_DATE_FORMAT,
    )
    handler.setFormatter(logging.Formatter(LOG_FORMAT))

    for name in (ROOT_LOGGER, "runners", "store"):
        logger = logging.getLogger(name)
        if _configured:
            for old in list(logger.handlers):
                if isinstance(old, RichHandler):
                    logger.removeHandler(old)
        logger.addHandler(handler)
        logger.setLevel((level or LOG_LEVEL).upper())

    _configured = True


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
