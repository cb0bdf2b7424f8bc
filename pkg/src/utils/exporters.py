"""
Writers for the CSV tables and JSON reports produced by the commands.
"""

import os
import json
import numpy as np
import pandas as pd


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def to_jsonable(obj):
    """Convert numpy scalars/arrays (and complex numbers) into JSON-friendly values."""
    return _plain(obj)


def write_json(payload, path: str):
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(payload), f, indent=2, ensure_ascii=False)
    return path


def write_csv(columns: dict, path: str):
    """Write a dict of equally long columns as CSV (header from the keys, no index)."""
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    frame = pd.DataFrame({k: np.asarray(v) for k, v in columns.items()})
    frame.to_csv(path, index=False)
    return path


def write_table(columns: dict, path: str, fmt: str = "csv"):
    """Write a column table as CSV or as a JSON list of records."""
    if fmt == "csv":
        return write_csv(columns, path)
    frame = pd.DataFrame({k: np.asarray(v) for k, v in columns.items()})
    return write_json(frame.to_dict(orient="records"), path)
