"""Plain-text matrix and vector files.

Matrix format: first line ``n d``, then ``n`` lines of ``d`` space-separated
decimals.  Vector format: first line ``n``, then ``n`` decimals, one per line.
Values are written with 17 significant digits so a round trip preserves at
least 15 significant digits.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .linalg import as_matrix, as_vector


def write_matrix(a: np.ndarray, path) -> None:
    a = as_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected 'n d' header, got {header!r}")
        n, d = int(header[0]), int(header[1])
        rows = []
        for k in range(n):
            parts = fh.readline().split()
            if len(parts) != d:
                raise ValueError(f"{path}: row {k} has {len(parts)} entries, expected {d}")
            rows.append([float(p) for p in parts])
    return as_matrix(np.array(rows, dtype=float), str(path))


def write_vector(v: np.ndarray, path) -> None:
    v = as_vector(v)
    lines = [str(v.shape[0])]
    lines.extend(f"{x:.17g}" for x in v)
    Path(path).write_text("\n".join(lines) + "\n")


def read_vector(path) -> np.ndarray:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().split()
        if len(header) != 1:
            raise ValueError(f"{path}: expected 'n' header, got {header!r}")
        n = int(header[0])
        values = [float(fh.readline()) for _ in range(n)]
    return as_vector(np.array(values, dtype=float), str(path))
