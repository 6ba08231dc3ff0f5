"""Matrix CSV files and JSON run manifests.

A matrix file starts with one comment line carrying its dimensions,
``# sym n=<dim>`` for symmetric matrices or
``# matrix rows=<r> cols=<c> [kind=<kind>]`` for data matrices, followed by
one comma-separated line per row.  Floats are written with ``repr`` (the
shortest string that round-trips), so reading a file back is bit-exact.
"""
from __future__ import annotations

import csv
import hashlib
import json
import platform
import re
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DataFormatError

SCHEMA_VERSION = "1.0"

_SYM_RE = re.compile(r"^#\s*sym\s+n=(\d+)\s*$")
_MAT_RE = re.compile(r"^#\s*matrix\s+rows=(\d+)\s+cols=(\d+)(?:\s+kind=(\w+))?\s*$")


def _format_row(row, integer: bool) -> str:
    if integer:
        return ",".join(str(int(v)) for v in row)
    return ",".join(repr(float(v)) for v in row)


def write_matrix(path, m, symmetric: bool = False, kind: str | None = None) -> Path:
    m = np.asarray(m)
    if m.ndim != 2:
        raise DataFormatError(f"can only write 2-d arrays, got shape {m.shape}")
    integer = np.issubdtype(m.dtype, np.integer)
    if symmetric:
        if m.shape[0] != m.shape[1]:
            raise DataFormatError("symmetric matrix must be square")
        header = f"# sym n={m.shape[0]}"
    else:
        header = f"# matrix rows={m.shape[0]} cols={m.shape[1]}"
        if kind:
            header += f" kind={kind}"
    lines = [header] + [_format_row(row, integer) for row in m.tolist()]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_matrix_with_meta(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    head = lines[0].strip()
    if (mt := _SYM_RE.match(head)):
        rows = cols = int(mt.group(1))
        meta = {"symmetric": True, "kind": None}
    elif (mt := _MAT_RE.match(head)):
        rows, cols = int(mt.group(1)), int(mt.group(2))
        meta = {"symmetric": False, "kind": mt.group(3)}
    else:
        raise DataFormatError(f"{path}: missing or malformed dimension header {head!r}")
    body = lines[1:]
    if len(body) != rows:
        raise DataFormatError(f"{path}: header says {rows} rows, found {len(body)}")
    try:
        values = [[float(tok) for tok in ln.split(",")] for ln in body]
    except ValueError as exc:
        raise DataFormatError(f"{path}: non-numeric entry ({exc})") from exc
    if any(len(r) != cols for r in values):
        raise DataFormatError(f"{path}: expected {cols} columns in every row")
    arr = np.array(values, dtype=float).reshape(rows, cols)
    if not np.all(np.isfinite(arr)):
        raise DataFormatError(f"{path}: non-finite entries")
    if meta["symmetric"] and not np.array_equal(arr, arr.T):
        raise DataFormatError(f"{path}: declared symmetric but is not")
    return arr, meta


def read_matrix(path) -> np.ndarray:
    return read_matrix_with_meta(path)[0]


def write_table(path, records: list[dict]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        if not records:
            return path
        writer = csv.DictWriter(fh, fieldnames=list(records[0]))
        writer.writeheader()
        for rec in records:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in rec.items()})
    return path


def read_table(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def versions() -> dict:
    import numba
    import scipy

    from . import __version__

    return {
        "scbiglasso": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "platform": platform.platform(),
    }


def write_manifest(path, command: str, config: dict, started: str, inputs=(), outputs=(),
                   seed=None, convergence=None, warnings=(), extra=None) -> Path:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "seed": seed,
        "started": started,
        "finished": utc_now(),
        "versions": versions(),
        "inputs": {str(p): file_digest(p) for p in inputs},
        "outputs": {str(p): file_digest(p) for p in outputs},
        "convergence": convergence,
        "warnings": list(warnings),
    }
    if extra:
        manifest.update(extra)
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=False, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
