import logging
from typing import Optional

from colorama import Fore, Style, init

# Initialize colorama
init()

LEVEL_COLORS = {
    logging.DEBUG: Style.DIM,
    logging.INFO: Fore.RESET,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}

# Colours for the bracketed tags used across the pipelines
TAG_COLORS = {
    "Topology": Fore.CYAN,
    "Harvest": Fore.BLUE,
    "Train": Fore.GREEN,
    "Free Run": Fore.MAGENTA,
    "Correction": Fore.YELLOW,
    "Summary": Fore.GREEN,
    "Model": Fore.CYAN,
    "Store": Fore.BLUE,
}


class TagFormatter(logging.Formatter):
    """Render records as ``[Tag] message`` with the tag coloured.

    The tag comes from ``extra={"tag": ...}``; records without one fall back
    to the level name.
    """

    def format(self, record: logging.LogRecord) -> str:
        tag = getattr(record, "tag", None)
        message = record.getMessage()
        if tag:
            color = TAG_COLORS.get(tag, Fore.WHITE)
            head = f"{color}[{tag}]{Fore.RESET}"
        else:
            color = LEVEL_COLORS.get(record.levelno, Fore.RESET)
            head = f"{color}{record.levelname}:{Style.RESET_ALL}"
        text = f"{head} {message}"
        if record.exc_info:
            text += "\n" + self.formatException(record.exc_info)
        return text


def setup_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once for console use."""
    from asnrc.config import settings

    level = (level or settings().log_level).upper()
    handler = logging.StreamHandler()
    handler.setFormatter(TagFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level)
    # Reduce specific loggers' verbosity
    logging.getLogger("sqlalchemy.engine").setLevel(logging.ERROR)


def log_tag(logger: logging.Logger, tag: str, message: str, *args, level: int = logging.INFO) -> None:
    logger.log(level, message, *args, extra={"tag": tag})
