"""Deterministic CSV/JSON emission.

All files are UTF-8 with "\n" line endings. Floats are written with
the shortest representation that round-trips (Python repr), absent
values as the literal "NaN" in CSV and null in JSON. Nothing here
depends on wall-clock time, so identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import math
import os
from typing import Any, Iterable, Sequence

__all__ = ["fnum", "write_csv", "write_json", "write_table", "json_ready"]


def fnum(x: Any) -> str:
    """CSV cell for a scalar; None and NaN become the literal 'NaN'."""
    if x is None:
        return "NaN"
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    xf = float(x)
    if math.isnan(xf):
        return "NaN"
    return repr(xf)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fnum(v) for v in row) + "\n")
    return path


def json_ready(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays; NaN becomes None."""
    import numpy as np

    if isinstance(obj, dict):
        return {k: json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        xf = float(obj)
        return None if math.isnan(xf) else xf
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path: str, payload: dict) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(json_ready(payload), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path


def write_table(
    path_base: str, header: Sequence[str], rows: Iterable[Sequence[Any]], fmt: str
) -> str:
    """Tabular data as <base>.csv or <base>.json depending on fmt."""
    rows = [list(r) for r in rows]
    if fmt == "csv":
        return write_csv(path_base + ".csv", header, rows)
    if fmt == "json":
        return write_json(path_base + ".json", {"columns": list(header), "rows": rows})
    raise ValueError(f"unknown format {fmt!r}")
