"""
Logging helpers: a colorized stderr logger and the role-tagged log_message one-liner.
"""
import logging
import os
import sys
from typing import Optional

import colorlog

LOGGER_NAME = "fscan"
_FORMAT = "%(log_color)s[%(asctime)s] %(levelname)-8s%(reset)s %(name)s: %(message)s"

_ROLE_LEVELS = {
    "info": logging.INFO,
    "success": logging.INFO,
    "system": logging.DEBUG,
    "warning": logging.WARNING,
    "error": logging.ERROR,
}

_ROLE_INDICATORS = {
    "info": "[INFO]",
    "success": "[OK]",
    "error": "[ERROR]",
    "warning": "[WARN]",
    "system": "[SYSTEM]",
}


class StderrHandler(logging.StreamHandler):
    """Writes to whatever sys.stderr is at emit time, never to a stale copy."""

    def __init__(self):
        super().__init__(sys.stderr)

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Configure the package logger once. Output goes to stderr so stdout stays
    reserved for CSV results.
    """
    root = logging.getLogger(LOGGER_NAME)
    level_name = (level or os.getenv("FSCAN_LOG_LEVEL", "WARNING")).upper()
    root.setLevel(getattr(logging, level_name, logging.WARNING))

    if not root.handlers:
        handler = StderrHandler()
        handler.setFormatter(colorlog.ColoredFormatter(_FORMAT, datefmt="%H:%M:%S"))
        root.addHandler(handler)
        root.propagate = False
    return root


def get_logger(name: str) -> logging.Logger:
    """Return a child of the package logger, e.g. get_logger(__name__)."""
    short = name.rsplit(".", 1)[-1]
    return logging.getLogger(f"{LOGGER_NAME}.{short}")


def log_message(content: str, role: str = "system") -> None:
    """
    Log a message tagged with its role (info/success/error/warning/system).
    """
    logger = logging.getLogger(LOGGER_NAME)
    indicator = _ROLE_INDICATORS.get(role, "[LOG]")
    logger.log(_ROLE_LEVELS.get(role, logging.INFO), f"{indicator} {content}")
