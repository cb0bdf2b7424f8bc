"""
Runtime configuration read from the environment (and an optional .env file).
"""

import os
from dotenv import load_dotenv

load_dotenv()

LONGMEM_CACHE = os.getenv("LONGMEM_CACHE")
OUTPUT_DIR = os.getenv("LONGMEM_OUTPUT_DIR", "outputs")
VERDICT_PATH = os.path.join(OUTPUT_DIR, "verdict.json")
SUMMARY_PATH = os.path.join(OUTPUT_DIR, "summary.json")


def cache_dir():
    """
    Return the analytic-context cache directory, creating it if needed.
    None when caching is disabled.
    """
    path = os.getenv("LONGMEM_CACHE", LONGMEM_CACHE or "")
    if not path:
        return None
    os.makedirs(path, exist_ok=True)
    return path
