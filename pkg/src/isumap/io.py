"""Readers and writers for the on-disk formats.

* point clouds and embeddings: CSV, floats written with 17 significant
  digits so a round trip is exact;
* distance tables: square CSV with ``inf`` for infinity, or the condensed
  binary format ``ISUD1`` (magic, little-endian ``u32`` count, then the
  ``n(n-1)/2`` upper-triangle float64 values in row-major order);
* labels: one integer per line.
"""

from __future__ import annotations

import csv
import io as _io
import json
import struct
from pathlib import Path

import numpy as np

from ._errors import InvalidInputError

__all__ = [
    "read_points_csv",
    "write_points_csv",
    "write_distance_csv",
    "read_distance_csv",
    "write_distance_binary",
    "read_distance_binary",
    "write_embedding_csv",
    "read_embedding_csv",
    "read_labels_csv",
    "write_labels_csv",
    "write_json",
]

ISUD_MAGIC = b"ISUD1"
_FMT = "%.17g"


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def _read_rows(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise InvalidInputError(f"{path}: empty file")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    return header, rows


def read_points_csv(path):
    """Coordinates from CSV; a non-numeric first row is taken as a header.

    Returns
    -------
    points : (n, D) float array
    header : list of str or None
    """
    header, rows = _read_rows(path)
    try:
        x = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: non-numeric value ({exc})") from None
    if x.ndim != 2 or x.shape[0] == 0:
        raise InvalidInputError(f"{path}: rows must have equal length")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{path}: coordinates must be finite")
    return x, header


def write_points_csv(path, points, extra=None, header=None):
    x = np.asarray(points, dtype=np.float64)
    cols = [x] if extra is None else [x, np.asarray(extra, dtype=np.float64).reshape(-1, 1)]
    data = np.hstack(cols)
    if header is None:
        header = [f"x{i}" for i in range(x.shape[1])] + ([] if extra is None else ["color"])
    np.savetxt(path, data, fmt=_FMT, delimiter=",", header=",".join(header), comments="")


def write_distance_csv(path, table):
    np.savetxt(path, np.asarray(table, dtype=np.float64), fmt=_FMT, delimiter=",")


def read_distance_csv(path):
    d = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    if d.shape[0] != d.shape[1]:
        raise InvalidInputError(f"{path}: distance table must be square")
    return d


def write_distance_binary(path, table):
    d = np.asarray(table, dtype=np.float64)
    n = d.shape[0]
    iu = np.triu_indices(n, 1)
    with open(path, "wb") as fh:
        fh.write(ISUD_MAGIC)
        fh.write(struct.pack("<I", n))
        fh.write(d[iu].astype("<f8").tobytes())


def read_distance_binary(path):
    raw = Path(path).read_bytes()
    if raw[:5] != ISUD_MAGIC:
        raise InvalidInputError(f"{path}: not an ISUD1 file")
    (n,) = struct.unpack("<I", raw[5:9])
    vals = np.frombuffer(raw, dtype="<f8", offset=9)
    if vals.size != n * (n - 1) // 2:
        raise InvalidInputError(f"{path}: truncated distance table")
    d = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    d[iu] = vals
    d[(iu[1], iu[0])] = vals
    return d


def write_embedding_csv(path, coords, labels=None):
    y = np.asarray(coords, dtype=np.float64)
    names = [f"y{i}" for i in range(y.shape[1])]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names + ([] if labels is None else ["label"]))
    for r, row in enumerate(y):
        vals = [_FMT % v for v in row]
        if labels is not None:
            vals.append(str(int(labels[r])))
        w.writerow(vals)
    Path(path).write_text(buf.getvalue())


def read_embedding_csv(path):
    """Inverse of :func:`write_embedding_csv`; returns ``(coords, labels or None)``."""
    header, rows = _read_rows(path)
    has_label = header is not None and header[-1] == "label"
    data = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    if has_label:
        return data[:, :-1], data[:, -1].astype(np.int64)
    return data, None


def read_labels_csv(path):
    header, rows = _read_rows(path)
    try:
        labels = np.array([int(float(r[0])) for r in rows], dtype=np.int64)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: labels must be integers ({exc})") from None
    return labels


def write_labels_csv(path, labels):
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels))


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
