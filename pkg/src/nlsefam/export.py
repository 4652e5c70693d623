"""CSV and JSON export with a versioned schema.

CSV layout::

    # {"params": {...}, "schema_version": 1, "what": "h"}
    z,value
    -3,0.99...

Floats are written with ``%.{precision}g``; 17 digits round-trip every
float64 exactly.  Masked or non-finite cells are spelled ``nan``.
"""
from __future__ import annotations

import io
import json
import math
from typing import IO, Optional, Sequence

import numpy as np

SCHEMA_VERSION = 1


def fmt(x, precision: int = 17) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "nan"
    return f"{x:.{precision}g}"


def jsonable(obj):
    """Replace non-finite floats by None and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj


def dumps_json(doc: dict) -> str:
    body = dict(doc)
    body.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(jsonable(body), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_csv(stream: IO[str], columns: Sequence[str], data: Sequence[np.ndarray],
              meta: Optional[dict] = None, precision: int = 17) -> None:
    head = dict(meta or {})
    head["schema_version"] = SCHEMA_VERSION
    stream.write("# " + json.dumps(jsonable(head), sort_keys=True, allow_nan=False) + "\n")
    stream.write(",".join(columns) + "\n")
    cols = [np.ravel(np.asarray(c, float)) for c in data]
    n = cols[0].size
    if any(c.size != n for c in cols):
        raise ValueError("CSV columns differ in length")
    for i in range(n):
        stream.write(",".join(fmt(c[i], precision) for c in cols) + "\n")


def csv_text(columns, data, meta=None, precision: int = 17) -> str:
    buf = io.StringIO()
    write_csv(buf, columns, data, meta, precision)
    return buf.getvalue()


def read_csv(stream: IO[str]):
    """Inverse of ``write_csv``: (meta dict, column names, dict of arrays)."""
    first = stream.readline()
    if not first.startswith("# "):
        raise ValueError("missing schema comment line")
    meta = json.loads(first[2:])
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {meta.get('schema_version')!r}")
    columns = stream.readline().strip().split(",")
    rows = [line.rstrip("\n").split(",") for line in stream if line.strip()]
    arr = np.array([[float(v) for v in r] for r in rows], dtype=float).reshape(-1, len(columns))
    return meta, columns, {c: arr[:, i] for i, c in enumerate(columns)}
