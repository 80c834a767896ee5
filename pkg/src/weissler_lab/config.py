import os
import logging
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


LOGGER_NAME = 'weissler_lab'
LOG_FORMAT = '%(asctime)s | %(levelname)s | %(message)s'

DEFAULT_TOLERANCE = float(os.getenv('WEISSLER_LAB_TOLERANCE', '1e-12'))
DEFAULT_MAX_INDEX = int(os.getenv('WEISSLER_LAB_MAX_INDEX', '60'))
DEFAULT_REPORT_TOLERANCE = 1e-10
DEFAULT_SERIES_TOLERANCE = 1e-13

MAX_SWEEP_THREADS = 8


def get_logger(level: str | int | None = None) -> logging.Logger:
    """Return the package logger, attaching the stream handler on first use.

    :param level: Optional level override; defaults to ``WEISSLER_LAB_LOG_LEVEL`` or WARNING.
    :return: Configured logger.
    """
    logger = logging.getLogger(LOGGER_NAME)
    if not logger.handlers:
        ch = logging.StreamHandler()
        formatter = logging.Formatter(LOG_FORMAT)
        ch.setFormatter(formatter)
        logger.addHandler(ch)
        logger.setLevel(os.getenv('WEISSLER_LAB_LOG_LEVEL', 'WARNING').upper())
    if level is not None:
        logger.setLevel(level.upper() if isinstance(level, str) else level)
    return logger


def sweep_threads() -> int:
    """Number of worker threads for parameter sweeps.

    ``WEISSLER_LAB_THREADS=0`` forces serial evaluation. Read on every call so the
    environment can change between runs in the same process.
    """
    raw = os.getenv('WEISSLER_LAB_THREADS')
    if raw is None or raw.strip() == '':
        return min(os.cpu_count() or 1, MAX_SWEEP_THREADS)
    threads = int(raw)
    if threads < 0:
        raise ValueError(f"WEISSLER_LAB_THREADS must be >= 0, got {threads}")
    return threads
