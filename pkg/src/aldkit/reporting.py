"""Canonical JSON/CSV output: stable key order, no timings, infinities as strings."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


def plain(obj: Any) -> Any:
    """Recursively convert numpy scalars, tuples and non-finite floats to JSON-safe values."""
    if isinstance(obj, Mapping):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [plain(v) for v in items]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def content_hash(paths: Iterable[str | Path] = (), config: Mapping[str, Any] | None = None) -> str:
    """SHA-256 over the canonical config followed by the bytes of each input file."""
    h = hashlib.sha256()
    h.update(json.dumps(plain(config or {}), sort_keys=True).encode())
    for p in paths:
        h.update(b"\0")
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([plain(v) for v in r])
    return buf.getvalue()


def write_text(text: str, path: str | Path | None) -> None:
    """Write to ``path``, or to standard output when ``path`` is None or ``-``."""
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        Path(path).write_text(text)
