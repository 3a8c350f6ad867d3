"""Matrix serialization.

JSON: ``{"dim": n, "entries": [[[re, im], ...], ...]}``, row-major.
CSV: a ``dim=n`` header followed by ``n*n`` lines ``re,im`` in row-major order.

Floats are written with ``repr`` so a write/read round trip is bit-exact.
"""

from __future__ import annotations

import io
import json
import math
from pathlib import Path
from typing import IO, Union

import numpy as np

from .errors import DimensionError, ParseError
from .linalg import as_matrix

PathOrStream = Union[str, Path, IO[str]]


def to_json_obj(A) -> dict:
    A = as_matrix(A)
    n = A.shape[0]
    return {
        "dim": n,
        "entries": [[[float(A[i, j].real), float(A[i, j].imag)] for j in range(n)] for i in range(n)],
    }


def from_json_obj(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "dim" not in obj or "entries" not in obj:
        raise ParseError("expected an object with 'dim' and 'entries'", 1, 1)
    n = obj["dim"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("'dim' must be a positive integer", 1, 1)
    rows = obj["entries"]
    if not isinstance(rows, list) or len(rows) != n:
        raise DimensionError(f"expected {n} rows", dim=n)
    A = np.empty((n, n), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise DimensionError(f"row {i} does not have {n} entries", row=i, dim=n)
        for j, pair in enumerate(row):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
                raise DimensionError(f"entry ({i},{j}) is not a [re, im] pair", row=i, col=j)
            re, im = float(pair[0]), float(pair[1])
            if not (math.isfinite(re) and math.isfinite(im)):
                raise DimensionError(f"entry ({i},{j}) is not finite", row=i, col=j)
            A[i, j] = complex(re, im)
    return as_matrix(A)


def dumps_json(A) -> str:
    return json.dumps(to_json_obj(A), allow_nan=False)


def loads_json(text: str) -> np.ndarray:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return from_json_obj(obj)


def dumps_csv(A) -> str:
    A = as_matrix(A)
    n = A.shape[0]
    lines = [f"dim={n}"]
    for i in range(n):
        for j in range(n):
            lines.append(f"{float(A[i, j].real)!r},{float(A[i, j].imag)!r}")
    return "\n".join(lines) + "\n"


def loads_csv(text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("dim="):
        raise ParseError("missing 'dim=n' header", 1, 1)
    try:
        n = int(lines[0][4:])
    except ValueError:
        raise ParseError("bad dimension in header", 1, 5) from None
    if n < 1:
        raise ParseError("dimension must be positive", 1, 5)
    body = [ln for ln in lines[1:]]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != n * n:
        raise DimensionError(f"expected {n * n} entries, found {len(body)}", dim=n)
    A = np.empty((n, n), dtype=np.complex128)
    for k, ln in enumerate(body):
        parts = ln.split(",")
        if len(parts) != 2:
            raise ParseError("expected 're,im'", k + 2, 1)
        vals = []
        col = 1
        for p in parts:
            try:
                v = float(p)
            except ValueError:
                raise ParseError(f"not a number: {p.strip()!r}", k + 2, col) from None
            if not math.isfinite(v):
                raise DimensionError("non-finite entry", line=k + 2)
            vals.append(v)
            col += len(p) + 1
        A[k // n, k % n] = complex(vals[0], vals[1])
    return as_matrix(A)


def _is_csv(path: Path | None, text: str) -> bool:
    if path is not None and path.suffix.lower() == ".csv":
        return True
    return text.lstrip().startswith("dim=")


def read_matrix(source: PathOrStream) -> np.ndarray:
    """Read a matrix from a path or text stream (JSON or CSV, auto-detected)."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        text = path.read_text(encoding="utf-8")
    else:
        path = None
        text = source.read()
    return loads_csv(text) if _is_csv(path, text) else loads_json(text)


def write_matrix(A, dest: PathOrStream, fmt: str | None = None) -> int:
    """Write a matrix; returns the number of characters written."""
    if isinstance(dest, (str, Path)):
        path = Path(dest)
        fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
        text = dumps_csv(A) if fmt == "csv" else dumps_json(A) + "\n"
        path.write_text(text, encoding="utf-8")
        return len(text)
    fmt = fmt or "json"
    text = dumps_csv(A) if fmt == "csv" else dumps_json(A) + "\n"
    dest.write(text)
    return len(text)


def roundtrip(A, fmt: str = "json") -> np.ndarray:
    buf = io.StringIO()
    write_matrix(A, buf, fmt)
    buf.seek(0)
    return read_matrix(buf)
