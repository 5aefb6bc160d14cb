"""Dataset CSV input/output.

Format: header row with column ``y`` first, then ``x1..x{p-1}`` (or
``x1..xp`` when no intercept is used); UTF-8, decimal point.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .depthcore import Dataset
from .errors import ParseError

__all__ = ["load_dataset_csv", "write_dataset_csv"]


def load_dataset_csv(path, with_intercept: bool = True) -> Dataset:
    """Read a dataset CSV; raises FileNotFoundError / ParseError."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(header) < 2 or header[0] != "y":
            raise ParseError(
                f"{path}: header must be y,x1,...  got {header}")
        for k, name in enumerate(header[1:], start=1):
            if name != f"x{k}":
                raise ParseError(
                    f"{path}: column {k + 1} must be named x{k}, got {name!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(header)} fields, "
                    f"got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    arr = np.array(rows)
    try:
        return Dataset(arr[:, 0], arr[:, 1:], with_intercept=with_intercept)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def write_dataset_csv(path, data: Dataset) -> None:
    path = Path(path)
    header = ["y"] + [f"x{k + 1}" for k in range(data.x.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(data.n):
            writer.writerow([repr(float(data.y[i]))] +
                            [repr(float(v)) for v in data.x[i]])
