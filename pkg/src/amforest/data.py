"""Synthetic streams and CSV loading for the command line."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


class CsvFormatError(ValueError):
    """Malformed file or missing column."""


class NonNumericError(ValueError):
    """A feature or label cell could not be read as a number."""


def gauss2(n: int, seed: int = 0):
    """Two well separated Gaussian classes in the plane, labels 0/1."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    centers = np.where(y[:, None] == 1, 1.5, -1.5)
    X = centers + 0.5 * rng.standard_normal((n, 2))
    return X, y


def random_labels(n: int, seed: int = 0, n_features: int = 2):
    """Uniform features with labels drawn independently of them."""
    rng = np.random.default_rng(seed)
    return rng.random((n, n_features)), rng.integers(0, 2, n)


SYNTHETIC = {"gauss2": gauss2, "random": random_labels}


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


@dataclass
class Table:
    X: np.ndarray
    y: np.ndarray
    header: list | None


def read_csv(path, label_col="-1") -> Table:
    """Read a numeric CSV; the first row is a header if any feature cell in it is not a number.

    ``label_col`` is a column index (negative counts from the end) or, when
    the file has a header, a column name.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    width = len(rows[0])
    if width < 2:
        raise CsvFormatError(f"{path}: need at least one feature column and a label column")

    def resolve(header):
        try:
            index = int(label_col)
        except ValueError:
            if header is None:
                raise CsvFormatError(
                    f"--label-col {label_col!r} is a name but the file has no header"
                ) from None
            if label_col not in header:
                raise CsvFormatError(f"label column {label_col!r} not in header") from None
            return header.index(label_col)
        if not -width <= index < width:
            raise CsvFormatError(f"label column {index} out of range for {width} columns")
        return index % width

    # header detection needs the label column, which may itself be a name
    try:
        guess = int(label_col) % width
    except ValueError:
        guess = rows[0].index(label_col) if label_col in rows[0] else None
    first_features = [c for j, c in enumerate(rows[0]) if j != guess]
    has_header = any(not _is_number(c) for c in first_features)
    header = rows[0] if has_header else None
    label = resolve(header)
    body = rows[1:] if has_header else rows
    if not body:
        raise CsvFormatError(f"{path}: no data rows")

    X = np.empty((len(body), width - 1))
    y = np.empty(len(body))
    offset = 2 if has_header else 1
    for i, row in enumerate(body):
        if len(row) != width:
            raise CsvFormatError(
                f"row {i + offset}: expected {width} columns, found {len(row)}"
            )
        k = 0
        for j, cell in enumerate(row):
            try:
                value = float(cell)
                if not np.isfinite(value):
                    raise ValueError(cell)
            except ValueError:
                raise NonNumericError(
                    f"row {i + offset}, column {j + 1}: non-numeric value {cell!r}"
                ) from None
            if j == label:
                y[i] = value
            else:
                X[i, k] = value
                k += 1
    return Table(X, y, header)
