"""Deterministic CSV emission with a JSON metadata sidecar.

Floats print with 9 significant digits; identical results produce byte-
identical files, so no timestamps or environment-dependent values belong
here.
"""

from __future__ import annotations

import json
import os

from .. import __version__
from ..errors import ConfigError


def format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".9g")
    return str(v)


def emit_csv(rows, columns, path, metadata: dict | None = None) -> str:
    """Write rows (dicts) under a fixed column order; returns the path.

    Refuses empty results. A sidecar '<path>.meta.json' records the full
    config, seeds, and package version when metadata is given.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("refusing to emit an empty results table")
    for row in rows:
        missing = [c for c in columns if c not in row]
        if missing:
            raise ValueError(f"result row is missing columns {missing}")
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row[c]) for c in columns))
    payload = "\n".join(lines) + "\n"
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(payload)
    if metadata is not None:
        meta = dict(metadata)
        meta["package_version"] = __version__
        meta["columns"] = list(columns)
        with open(str(path) + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return str(path)


def _parse_scalar(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_csv(path) -> list[dict]:
    """Read a results table back; numbers regain int/float types."""
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path} is empty")
    columns = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(columns):
            raise ValueError(f"malformed row in {path}: {line!r}")
        rows.append({c: _parse_scalar(v) for c, v in zip(columns, parts)})
    return rows
