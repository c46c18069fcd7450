"""Matrix persistence in two exact formats.

``csv``
    One matrix row per line, comma-separated, ``.`` decimal point, no
    header. Lines starting with ``#`` (and blank lines) are ignored.
    Values are written as shortest round-trip decimals (at most 17
    significant digits), so save/load is exact for 64-bit floats.

``rawf64``
    Little-endian IEEE-754 binary64 values in row-major order, plus a
    text sidecar ``<path>.meta`` with ``key=value`` lines declaring at
    least ``rows``, ``cols``, ``dtype=f64le`` and ``layout=row_major``.
    Extra keys (seed or generator settings) are preserved as metadata.
    Round-trips bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError, ShapeMismatch, UnsupportedFormat

__all__ = ["load_matrix", "save_matrix", "FORMATS"]

FORMATS = ("csv", "rawf64")


def _meta_path(path):
    return f"{path}.meta"


def _load_csv(path):
    rows = []
    width = None
    first_line = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.strip()
            if not body or body.startswith("#"):
                continue
            cells = body.split(",")
            try:
                row = [float(c) for c in cells]
            except ValueError as exc:
                raise ParseError(path, lineno, f"bad number: {exc}") from None
            if width is None:
                width, first_line = len(row), lineno
            elif len(row) != width:
                raise ShapeMismatch(
                    f"{path}:{lineno}: row has {len(row)} values, "
                    f"row at line {first_line} has {width}"
                )
            rows.append(row)
    if not rows:
        raise ParseError(path, 0, "no data rows")
    return np.asarray(rows, dtype=np.float64)


def _save_csv(matrix, path):
    with open(path, "w", encoding="utf-8") as fh:
        for row in matrix:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def _load_rawf64(path):
    meta = {}
    meta_file = _meta_path(path)
    try:
        with open(meta_file, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                body = line.strip()
                if not body or body.startswith("#"):
                    continue
                if "=" not in body:
                    raise ParseError(meta_file, lineno, "expected key=value")
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
    except FileNotFoundError:
        raise UnsupportedFormat(f"missing descriptor file {meta_file}") from None

    for key in ("rows", "cols"):
        if key not in meta:
            raise ParseError(meta_file, 0, f"missing required key {key!r}")
    if meta.get("dtype", "f64le") != "f64le":
        raise UnsupportedFormat(f"unsupported dtype {meta.get('dtype')!r}")
    if meta.get("layout", "row_major") != "row_major":
        raise UnsupportedFormat(f"unsupported layout {meta.get('layout')!r}")
    try:
        rows, cols = int(meta["rows"]), int(meta["cols"])
    except ValueError:
        raise ParseError(meta_file, 0, "rows/cols must be integers") from None

    raw = np.fromfile(path, dtype="<f8")
    if raw.size != rows * cols:
        raise ShapeMismatch(
            f"{path}: declared {rows}x{cols} = {rows * cols} values, file holds {raw.size}"
        )
    return raw.reshape(rows, cols)


def _save_rawf64(matrix, path, metadata):
    matrix.astype("<f8", copy=False).tofile(path)
    with open(_meta_path(path), "w", encoding="utf-8") as fh:
        fh.write(f"rows={matrix.shape[0]}\n")
        fh.write(f"cols={matrix.shape[1]}\n")
        fh.write("dtype=f64le\n")
        fh.write("layout=row_major\n")
        for key, value in (metadata or {}).items():
            fh.write(f"{key}={value}\n")


def load_matrix(path, fmt: str = "csv") -> np.ndarray:
    """Read a dense matrix saved by :func:`save_matrix`."""
    if fmt == "csv":
        return _load_csv(path)
    if fmt == "rawf64":
        return _load_rawf64(path)
    raise UnsupportedFormat(f"unknown format {fmt!r}, expected one of {FORMATS}")


def save_matrix(matrix, path, fmt: str = "csv", metadata: dict | None = None) -> None:
    """Write a dense matrix; see the module docstring for byte layouts.

    ``metadata`` is only stored by the ``rawf64`` sidecar; CSV ignores it.
    """
    arr = np.ascontiguousarray(np.asarray(matrix, dtype=np.float64))
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeMismatch(f"can only save 2-d matrices, got shape {arr.shape}")
    if fmt == "csv":
        _save_csv(arr, path)
    elif fmt == "rawf64":
        _save_rawf64(arr, path, metadata)
    else:
        raise UnsupportedFormat(f"unknown format {fmt!r}, expected one of {FORMATS}")
