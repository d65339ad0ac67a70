"""
Logging setup shared by all modules.

Modules call ``get_logger(__name__)`` at import time; the command line entry
point calls ``configure_logging`` once with the level given by ``--log-level``.
"""
import logging

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
ROOT_NAME = "gpbogo"


def get_logger(name):
    if not name.startswith(ROOT_NAME):
        name = f"{ROOT_NAME}.{name}"
    return logging.getLogger(name)


def configure_logging(level="WARNING"):
    """
    Attaches a single stderr handler to the package root logger.

    Args:
        level (str or int): Logging level name or number.

    Returns:
        logging.Logger: The package root logger.
    """
    if isinstance(level, str):
        numeric = logging.getLevelName(level.upper())
        if not isinstance(numeric, int):
            raise ValueError(f"Unknown log level {level!r}.")
        level = numeric
    root = logging.getLogger(ROOT_NAME)
    root.setLevel(level)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    for handler in root.handlers:
        handler.setLevel(level)
    return root
