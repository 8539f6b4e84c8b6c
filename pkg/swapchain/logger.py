import logging
import sys
from typing import Any, Optional

from .config import settings


class CustomFormatter(logging.Formatter):
    """Level-colored log formatter; plain text when not attached to a TTY"""

    grey = "\x1b[38;20m"
    yellow = "\x1b[33;20m"
    red = "\x1b[31;20m"
    bold_red = "\x1b[31;1m"
    reset = "\x1b[0m"
    format_str = (
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s (%(filename)s:%(lineno)d)"
    )

    FORMATS = {
        logging.DEBUG: grey + format_str + reset,
        logging.INFO: grey + format_str + reset,
        logging.WARNING: yellow + format_str + reset,
        logging.ERROR: red + format_str + reset,
        logging.CRITICAL: bold_red + format_str + reset,
    }

    def __init__(self, use_color: bool = True) -> None:
        super().__init__()
        self.use_color = use_color

    def format(self, record: Any) -> str:
        if self.use_color:
            log_fmt = self.FORMATS.get(record.levelno, self.format_str)
        else:
            log_fmt = self.format_str
        formatter = logging.Formatter(log_fmt)
        return formatter.format(record)


def setup_logger(name: str = __name__) -> logging.Logger:
    """Setup logger with custom configuration"""
    logger = logging.getLogger(name)

    # Avoid duplicate handlers
    if logger.hasHandlers():
        return logger

    logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO))

    # Reports go to stdout, so diagnostics stay on stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(CustomFormatter(use_color=sys.stderr.isatty()))

    logger.addHandler(console_handler)
    logger.propagate = False

    return logger


def set_verbosity(level: Optional[str] = None, delta: int = 0) -> int:
    """Set the package log level by name, or shift it by `delta` steps of 10"""
    if level is not None:
        new_level = getattr(logging, level.upper(), None)
        if not isinstance(new_level, int):
            raise ValueError(f"Unknown log level: {level}")
    else:
        new_level = logger.level - 10 * delta
    new_level = min(max(new_level, logging.DEBUG), logging.CRITICAL)
    logger.setLevel(new_level)
    return new_level


logger = setup_logger("swapchain")
