"""CSV grid-function files and atomic JSON / text output.

CSV layout: a header ``# dim,extent,spacing,origin`` followed by one value per
line (1D) or one comma-separated row per line, row-major (2D).
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .grid import Grid, GridFunction
from .weights import Weight


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_grid_function(f: GridFunction) -> str:
    lines = [f.grid.header()]
    if f.grid.dim == 1:
        lines += [repr(float(v)) for v in f.values]
    else:
        lines += [",".join(repr(float(v)) for v in row) for row in f.values]
    return "\n".join(lines) + "\n"


def write_grid_function(f: GridFunction, path) -> None:
    atomic_write(path, format_grid_function(f))


def parse_grid_function(text: str) -> GridFunction:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing '# dim,extent,spacing,origin' header")
    parts = lines[0].lstrip("#").split(",")
    if len(parts) != 4:
        raise ValueError(f"malformed header: {lines[0]!r}")
    grid = Grid(int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3]))
    rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    values = np.array(rows, dtype=np.float64)
    if grid.dim == 1:
        values = values.ravel()
    if values.shape != grid.shape:
        raise ValueError(f"expected values of shape {grid.shape}, got {values.shape}")
    return GridFunction(grid, values)


def read_grid_function(path) -> GridFunction:
    return parse_grid_function(Path(path).read_text())


def read_weight(path) -> Weight:
    f = read_grid_function(path)
    if not np.all(f.values > 0):
        raise ValueError(f"{path}: weight entries must be strictly positive")
    return Weight(f)


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed separators)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(obj, path) -> None:
    atomic_write(path, dumps(obj))
