"""Deterministic on-disk artifacts: CSV tables, JSON reports, manifests.

Every writer lands atomically (write to `<name>.partial`, then rename), so
a crash never leaves a truncated file under the final name.  CSV floats
carry 17 significant digits (full double precision) and JSON floats use
shortest round-trip form; both are deterministic, making outputs
byte-identical for identical inputs regardless of worker count.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

__all__ = [
    "atomic_write_text",
    "write_csv",
    "write_json",
    "write_manifest",
    "read_csv_columns",
]

SCHEMA_VERSION = 1


def _fmt(value) -> str:
    """Stable scalar formatting: shortest-round-trip floats, plain ints."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def atomic_write_text(path, text: str) -> Path:
    """Write text to path via a .partial sibling and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = path.with_name(path.name + ".partial")
    with open(partial, "w", newline="") as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())
    os.replace(partial, path)
    return path


def write_csv(path, header, rows) -> Path:
    """Comma-separated table with a header line and LF newlines."""
    header = list(header)
    lines = [",".join(header)]
    for row in rows:
        row = list(row)
        if len(row) != len(header):
            raise ValueError(
                f"row width {len(row)} does not match header width {len(header)}")
        lines.append(",".join(_fmt(v) for v in row))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def write_json(path, obj) -> Path:
    """Sorted-key, indented JSON with a trailing newline."""
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2)
    return atomic_write_text(path, text + "\n")


def write_manifest(path, config: dict, outputs, seed=None, extra=None) -> Path:
    """Reproducibility record: resolved config, seed, and produced files.

    Deliberately carries no timestamps or hostnames; two runs of the same
    config must produce identical manifests.
    """
    from . import __version__

    doc = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config": _jsonable(config),
        "outputs": sorted(str(o) for o in outputs),
    }
    if seed is not None:
        doc["seed"] = int(seed)
    if extra:
        doc["extra"] = _jsonable(extra)
    return write_json(path, doc)


def read_csv_columns(path) -> dict:
    """Read a write_csv artifact back as {column: float array}."""
    with open(path) as f:
        header = f.readline().strip().split(",")
        data = [line.strip().split(",") for line in f if line.strip()]
    cols = {}
    for i, name in enumerate(header):
        raw = [row[i] for row in data]
        try:
            cols[name] = np.array([float(v) for v in raw])
        except ValueError:
            cols[name] = np.array(raw)
    return cols
