"""Logging setup for the command-line entry point."""

import logging

import config


def configure_logging(level=None, log_file=None):
    """
    Install the lab's handlers on the root logger.

    Args:
        level: Level name or number; defaults to config.LOG_LEVEL.
        log_file: Optional path that receives a copy of every record.

    Returns:
        The root logger.
    """
    level = level or config.LOG_LEVEL
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.WARNING)

    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    # force=True replaces handlers installed by an earlier dispatch() in this process
    logging.basicConfig(level=level, format=config.LOG_FORMAT, handlers=handlers, force=True)
    return logging.getLogger()


def verbosity_to_level(verbose):
    """Map a -v count to a logging level."""
    if verbose >= 2:
        return logging.DEBUG
    if verbose == 1:
        return logging.INFO
    return logging.WARNING
