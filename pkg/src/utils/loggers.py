"""
Logger setup for consistent logging across the project.
"""

import logging
import os


def setup_logger(name: str):
    """
    Set up and return a logger with the given name.
    The level defaults to INFO and follows LONGMEM_LOG_LEVEL when it is set.
    """
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter('[%(asctime)s] %(levelname)s - %(name)s: %(message)s')
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    level = os.getenv("LONGMEM_LOG_LEVEL", "INFO").upper()
    logger.setLevel(getattr(logging, level, logging.INFO))
    return logger
