"""Run reports: canonical JSON plus plot-ready CSV series, written atomically.

The JSON body (config, results, assertions) is serialized canonically so that
identical configurations produce byte-identical bodies; volatile metadata
(timestamp, version) lives in a separate header. Files are written to a
temporary sibling and renamed into place.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable

import numpy as np


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples for JSON output."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):  # before int: bool subclasses int
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


@dataclass
class Assertion:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail}


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def body_bytes(config: dict, results: dict, assertions: Iterable[Assertion]) -> str:
    body = {
        "config": jsonable(config),
        "results": jsonable(results),
        "assertions": [a.to_dict() for a in assertions],
    }
    return json.dumps(body, sort_keys=True, indent=2)


def write_report(out_dir: str, config: dict, results: dict,
                 assertions: Iterable[Assertion], version: str) -> str:
    """Write ``report.json`` under ``out_dir`` and return its path."""
    assertions = list(assertions)
    doc = {
        "header": {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "version": version,
        },
        "body": json.loads(body_bytes(config, results, assertions)),
    }
    path = os.path.join(out_dir, "report.json")
    _atomic_write(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def write_series(out_dir: str, name: str, header: Iterable[str], rows) -> str:
    """Write a numeric CSV table (dot decimals, no grouping) atomically."""
    columns = list(header)
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, str):
                cells.append(v)
            else:
                cells.append(repr(float(v)))
        lines.append(",".join(cells))
    path = os.path.join(out_dir, "series", f"{name}.csv")
    _atomic_write(path, "\n".join(lines) + "\n")
    return path
