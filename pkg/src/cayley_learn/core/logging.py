"""
Logging for CLI runs: a readable stderr stream and a JSON-lines day file.

stdout is left to command output (dataset summaries, oracle verdicts), so
the console handler writes to stderr.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from cayley_learn.config import Settings

CONSOLE_FORMAT = "%(asctime)s %(levelname)-8s %(name)s: %(message)s"
EXPERIMENT_PREFIX = "cayley_learn.recipe."

# Third-party loggers that flood DEBUG while figures are drawn
QUIET_LOGGERS = ("matplotlib", "PIL")


def setup_logging(settings: Settings, log_dir: Path | None = None) -> Path:
    """
    Replace the root handlers with a console handler and a JSON file handler.

    The console follows ``settings.log_level``; the file always records DEBUG.
    Calling it again (a second CLI invocation in one process) resets both.

    Args:
        settings: Application settings
        log_dir: Directory for the day file (default ``<output_root>/logs``)

    Returns:
        Path of the JSON log file
    """
    directory = Path(log_dir) if log_dir is not None else settings.output_root / "logs"
    directory.mkdir(parents=True, exist_ok=True)
    log_file = directory / f"{datetime.now(timezone.utc):%Y-%m-%d}.log"

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(logging.DEBUG)

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(settings.log_level)
    console.setFormatter(ColoredFormatter(CONSOLE_FORMAT, datefmt="%H:%M:%S", use_color=sys.stderr.isatty()))
    root.addHandler(console)

    day_file = logging.FileHandler(log_file, encoding="utf-8")
    day_file.setLevel(logging.DEBUG)
    day_file.setFormatter(JsonFormatter())
    root.addHandler(day_file)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

    logging.getLogger(__name__).debug(f"Console level {settings.log_level}, JSON log at {log_file}")
    return log_file


class ColoredFormatter(logging.Formatter):
    """Level names in ANSI colour when the stream is a terminal."""

    LEVEL_COLORS = {
        logging.DEBUG: "\033[36m",
        logging.INFO: "\033[32m",
        logging.WARNING: "\033[33m",
        logging.ERROR: "\033[31m",
        logging.CRITICAL: "\033[35m",
    }
    RESET = "\033[0m"

    def __init__(self, fmt: str | None = None, datefmt: str | None = None, use_color: bool = True):
        super().__init__(fmt, datefmt)
        self.use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        color = self.LEVEL_COLORS.get(record.levelno) if self.use_color else None
        if color is None:
            return super().format(record)
        levelname = record.levelname
        record.levelname = f"{color}{levelname}{self.RESET}"
        try:
            return super().format(record)
        finally:
            record.levelname = levelname


class JsonFormatter(logging.Formatter):
    """
    One JSON object per record.

    Structured context goes in ``extra={"extra_data": {...}}`` and is written
    under ``extra``; records from recipe loggers also carry ``recipe``.
    """

    def format(self, record: logging.LogRecord) -> str:
        entry = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        if record.name.startswith(EXPERIMENT_PREFIX):
            entry["recipe"] = record.name[len(EXPERIMENT_PREFIX):]
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        extra = getattr(record, "extra_data", None)
        if extra is not None:
            entry["extra"] = extra
        return json.dumps(entry, ensure_ascii=False, default=str)


def get_experiment_logger(recipe_name: str) -> logging.Logger:
    """Logger for one recipe run, e.g. ``cayley_learn.recipe.cayley-n8``."""
    return logging.getLogger(f"{EXPERIMENT_PREFIX}{recipe_name}")
