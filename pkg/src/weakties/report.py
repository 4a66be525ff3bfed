"""CSV output with a ``#``-prefixed metadata header."""
from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    if x is None:
        return "undefined"
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, columns, rows, meta: dict | None = None) -> Path:
    """Write rows (an iterable of sequences) after ``# key: value`` header lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k}: {fmt(v) if not isinstance(v, (list, tuple)) else ' '.join(map(fmt, v))}"
             for k, v in (meta or {}).items()]
    lines.append(",".join(columns))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path):
    """Parse a file written by ``write_csv`` into ``(meta, columns, rows)`` of strings."""
    meta, rows, columns = {}, [], None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = value
        elif columns is None:
            columns = line.split(",")
        elif line:
            rows.append(line.split(","))
    return meta, columns, rows


def body_digest(path) -> str:
    """sha256 over the non-comment lines of a CSV."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for line in fh:
            if not line.startswith(b"#"):
                h.update(line)
    return h.hexdigest()


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
