"""CSV and JSON files.

Floats are written with 17 significant digits, which round-trips every
finite double exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import InvalidArgument, ShapeMismatch
from .functions import GridFunction
from .partition import Partition

PathLike = Union[str, Path]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_samples(path: PathLike, xs: Sequence[float], values: Sequence[float]) -> Path:
    """CSV with header ``x,value`` and one row per sample."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.shape != values.shape or xs.ndim != 1:
        raise ShapeMismatch("abscissae and values must be 1-D arrays of equal length")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "value"])
        w.writerows((fmt(x), fmt(v)) for x, v in zip(xs, values))
    return path


def write_grid_function(path: PathLike, g: GridFunction) -> Path:
    return write_samples(path, g.grid, g.values)


def read_samples(path: PathLike) -> tuple[np.ndarray, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "value"]:
        raise InvalidArgument(f"{path}: expected header 'x,value'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float).reshape(-1, 2)
    except ValueError as exc:
        raise InvalidArgument(f"{path}: malformed row ({exc})") from None
    return data[:, 0], data[:, 1]


def load_grid_function(path: PathLike, partition: Partition, M: int) -> GridFunction:
    """Read samples written by :func:`write_grid_function` back onto their grid."""
    xs, values = read_samples(path)
    grid = partition.fine_grid(M)
    if xs.shape != grid.shape or not np.array_equal(xs, grid):
        raise ShapeMismatch(f"{path}: abscissae do not match the N={partition.N}, M={M} grid")
    return GridFunction(partition, M, values)


def write_matrix(path: PathLike, A) -> Path:
    """Row-major CSV without header; a 1-D array becomes one column."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerows([fmt(v) for v in row] for row in A)
    return path


def read_matrix(path: PathLike) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    return np.array([[float(v) for v in r] for r in rows], dtype=float)


def jsonable(x):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def write_json(path: PathLike, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path
