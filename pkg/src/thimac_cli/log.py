"""
File logging for thimac-cli.

The package logger writes to one rotating file per user. The handler is
tagged with a name so repeated setup finds it again among handlers that
other code (test runners, ``--debug``) attached to the same logger.
"""

import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import NamedTuple


class LoggingSetup(NamedTuple):
    logger: logging.Logger
    handler: RotatingFileHandler


LOGGER_NAME = "thimac_cli"
HANDLER_NAME = "thimac-cli-file"
LOG_FILE_NAME = "thimac-cli.log"
LOG_MAX_BYTES = 5 * 1024 * 1024
LOG_BACKUP_COUNT = 3
LOG_FORMAT = "%(asctime)s %(levelname)-8s %(name)s %(message)s"
FILE_LEVELS = {"INFO": logging.INFO, "DEBUG": logging.DEBUG}


def _log_dir(platform: str) -> Path:
    if platform == "darwin":
        return Path.home() / "Library" / "Logs" / "thimac-cli"
    if platform == "win32":
        local = os.environ.get("LOCALAPPDATA")
        return (Path(local) if local else Path.home() / "AppData" / "Local") / "thimac-cli" / "Logs"
    return Path.home() / ".local" / "state" / "thimac-cli"


def get_log_path(platform: str | None = None) -> Path:
    """Log file path for ``platform`` (the running one by default)."""
    return _log_dir(platform or sys.platform) / LOG_FILE_NAME


def file_level(name: str) -> int:
    """Level for a config ``log_level`` value. Raises ValueError for anything but INFO or DEBUG."""
    try:
        return FILE_LEVELS[name]
    except KeyError:
        raise ValueError(f"invalid log_level '{name}'. Valid values are: {', '.join(sorted(FILE_LEVELS))}") from None


def _file_handler(logger: logging.Logger) -> RotatingFileHandler | None:
    for handler in logger.handlers:
        if handler.get_name() == HANDLER_NAME and isinstance(handler, RotatingFileHandler):
            return handler
    return None


def setup_logging() -> LoggingSetup:
    """Attach the rotating file handler to the package logger, once.

    Later calls return the handler attached first and leave handlers owned
    by anyone else alone.
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    handler = _file_handler(logger)
    if handler is not None:
        return LoggingSetup(logger, handler)

    log_path = get_log_path()
    log_path.parent.mkdir(parents=True, exist_ok=True)
    handler = RotatingFileHandler(log_path, maxBytes=LOG_MAX_BYTES, backupCount=LOG_BACKUP_COUNT, encoding="utf-8")
    handler.set_name(HANDLER_NAME)
    handler.setLevel(logging.INFO)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    logger.addHandler(handler)
    return LoggingSetup(logger, handler)
