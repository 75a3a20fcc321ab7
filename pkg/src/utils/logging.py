# src/utils/logging.py
"""
Logging utilities for rgflow.

One package logger with per-level colours, plus the stage banners that
frame every long computation:

    with stage("Homotopy integration (J=200)"):
        ...
"""

import logging
import sys
import time
from contextlib import contextmanager
from typing import Iterator, Optional, TextIO


class ColoredFormatter(logging.Formatter):
    """
    Formatter adding an ANSI colour per level; plain text when use_color is False.
    """

    COLORS = {
        "DEBUG": "\033[94m",  # Blue
        "INFO": "\033[92m",  # Green
        "WARNING": "\033[93m",  # Yellow
        "ERROR": "\033[91m",  # Red
        "CRITICAL": "\033[91m\033[1m",  # Bold Red
        "RESET": "\033[0m",
    }

    def __init__(self, fmt: str, datefmt: Optional[str] = None, use_color: bool = True) -> None:
        super().__init__(fmt, datefmt)
        self.use_color = use_color

    def format(self, record):
        log_message = super().format(record)
        if not self.use_color:
            return log_message
        return f"{self.COLORS.get(record.levelname, '')}{log_message}{self.COLORS['RESET']}"


def setup_logger(
    name: str = "rgflow",
    level: int = logging.INFO,
    stream: Optional[TextIO] = None,
) -> logging.Logger:
    """
    Configure and return the package logger.

    Args:
        name: Logger name
        level: Logging level
        stream: Output stream (default: stdout); colours only on a terminal

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # every solver module imports this one; attach the handler once
    if not logger.handlers:
        stream = stream or sys.stdout
        handler = logging.StreamHandler(stream)
        handler.setLevel(level)
        handler.setFormatter(
            ColoredFormatter(
                "%(asctime)s - %(levelname)s - %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
                use_color=hasattr(stream, "isatty") and stream.isatty(),
            )
        )
        logger.addHandler(handler)

    logger.propagate = False
    return logger


logger = setup_logger()


def set_log_level(level: str) -> None:
    """
    Set the level of the package logger and its handlers.

    Args:
        level: 'DEBUG', 'INFO', 'WARNING', 'ERROR' or 'CRITICAL' (any case)

    Raises:
        ValueError: If the level name is unknown
    """
    numeric_level = getattr(logging, level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ValueError(f"Invalid log level: {level}")

    logger.setLevel(numeric_level)
    for handler in logger.handlers:
        handler.setLevel(numeric_level)


def status_icon(passed: bool) -> str:
    return "✅" if passed else "❌"


@contextmanager
def stage(title: str) -> Iterator[None]:
    """
    Log start and completion banners with the elapsed wall time.

    An exception escaping the block is logged once with ❌ and re-raised.
    """
    logger.info(f"=== Starting {title} ===")
    start = time.perf_counter()
    try:
        yield
    except Exception as e:
        logger.error(f"❌ {title} failed after {time.perf_counter() - start:.2f}s: {e}")
        raise
    logger.info(f"=== {title} Complete ({time.perf_counter() - start:.2f}s) ===")
