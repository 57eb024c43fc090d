"""Structured JSON logging for skewshadow.

Usage:
    from skewshadow.logging import setup_logging

    setup_logging(level="INFO", json_format=True)

    import logging
    logger = logging.getLogger("skewshadow")
    logger.info("cell done", extra={"n": 800, "c": 1.5, "p_hat": 0.42})

Records go to stderr by default; stdout is reserved for CSV/JSON results.
"""

import json
import logging
import sys
from typing import IO, Optional

# every attribute a bare LogRecord carries, plus what Formatter.format adds
_RESERVED = frozenset(
    vars(logging.LogRecord("", logging.NOTSET, "", 0, "", None, None))
) | {"message", "asctime"}


class JSONFormatter(logging.Formatter):
    """One JSON object per record, extra fields inlined."""

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            "ts": record.created,
            "level": record.levelname,
            "logger": record.name,
            "msg": record.getMessage(),
        }

        for key, value in record.__dict__.items():
            if key in _RESERVED:
                continue
            try:
                json.dumps(value)
                log_data[key] = value
            except (TypeError, ValueError):
                log_data[key] = str(value)

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, default=str)


def setup_logging(
    level: str = "INFO",
    json_format: bool = True,
    logger_name: str = "skewshadow",
    stream: Optional[IO[str]] = None,
) -> logging.Logger:
    """Configure structured logging.

    Args:
        level: DEBUG, INFO, WARNING, ERROR
        json_format: True for JSON, False for standard format
        logger_name: Logger name
        stream: Defaults to sys.stderr
    """
    numeric = getattr(logging, level.upper(), None)
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {level}")

    logger = logging.getLogger(logger_name)
    logger.setLevel(numeric)
    logger.handlers.clear()

    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.setLevel(numeric)

    if json_format:
        handler.setFormatter(JSONFormatter())
    else:
        handler.setFormatter(
            logging.Formatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s")
        )

    logger.addHandler(handler)
    logger.propagate = False
    return logger


def get_logger(name: str = "skewshadow") -> logging.Logger:
    """Get logger instance."""
    return logging.getLogger(name)
