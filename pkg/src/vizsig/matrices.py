"""Labeled square matrices and their CSV serialization.

`DistanceMatrix` is the shared currency between the visual, jargon, and
citation metrics: symmetric, zero diagonal, non-negative. NaN entries are
permitted and mean "missing" (for example a field pair with no reachable
vertex pair); downstream consumers decide whether to accept them.

CSV convention: optional leading ``#`` comment lines, then a header row of
labels, then m rows of m values. Labels always travel with the values so
consumers never assume an ordering.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import FormatError

SYMMETRY_TOL = 1e-12


def _format_float(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True, eq=False)
class LabeledMatrix:
    """Square float64 matrix with one label per row/column, symmetric."""

    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct")
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"matrix must be square, got shape {arr.shape}")
        if arr.shape[0] != len(labels):
            raise ValueError(f"{len(labels)} labels for shape {arr.shape}")
        if not np.allclose(arr, arr.T, rtol=0, atol=SYMMETRY_TOL, equal_nan=True):
            raise ValueError(f"matrix not symmetric within {SYMMETRY_TOL}")
        arr.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", arr)

    @property
    def m(self) -> int:
        return len(self.labels)

    def submatrix(self, labels: Sequence[str]) -> "LabeledMatrix":
        """Restrict/reorder to `labels`; unknown labels raise KeyError."""
        index = {lab: i for i, lab in enumerate(self.labels)}
        idx = [index[lab] for lab in labels]
        return type(self)(tuple(labels), self.values[np.ix_(idx, idx)])


@dataclass(frozen=True, eq=False)
class DistanceMatrix(LabeledMatrix):
    """Symmetric field-by-field distances: zero diagonal, non-negative.

    NaN entries are tolerated as "missing pair"; everything else must be a
    finite non-negative float.
    """

    def __post_init__(self):
        super().__post_init__()
        arr = np.array(self.values, dtype=np.float64)
        diag = np.diagonal(arr)
        if np.any(np.abs(diag) > SYMMETRY_TOL):
            raise ValueError("diagonal must be zero")
        offdiag = arr[~np.eye(arr.shape[0], dtype=bool)]
        finite = offdiag[~np.isnan(offdiag)]
        if np.any(np.isinf(finite)):
            raise ValueError("entries must be finite or NaN")
        if np.any(finite < 0):
            raise ValueError("distances must be non-negative")
        np.fill_diagonal(arr, 0.0)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())


def write_labeled_csv(
    path: Union[str, Path],
    matrix: LabeledMatrix,
    comment: str | None = None,
) -> None:
    """Write header-of-labels + m value rows; `comment` becomes ``#`` lines."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(matrix.labels)
        for row in matrix.values:
            writer.writerow([_format_float(x) for x in row])


def write_square_csv(
    path: Union[str, Path],
    labels: Sequence[str],
    values: np.ndarray,
    comment: str | None = None,
) -> None:
    """Same layout as `write_labeled_csv` but without the symmetry contract
    (used for inherently one-sided matrices such as the raw efficiency)."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (len(labels), len(labels)):
        raise ValueError(f"{len(labels)} labels for shape {values.shape}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(labels))
        for row in values:
            writer.writerow([_format_float(x) for x in row])


def _read_rows(path: Union[str, Path]) -> list[list[str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    if not rows:
        raise FormatError(f"{path}: no non-comment rows")
    return rows


def read_labeled_csv(path: Union[str, Path]) -> LabeledMatrix:
    rows = _read_rows(path)
    labels = tuple(rows[0])
    m = len(labels)
    if len(rows) != m + 1:
        raise FormatError(f"{path}: expected {m} value rows, found {len(rows) - 1}")
    try:
        values = np.array([[float(x) for x in row] for row in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric cell: {exc}") from None
    if values.shape != (m, m):
        raise FormatError(f"{path}: ragged rows, expected {m} columns")
    try:
        return LabeledMatrix(labels, values)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def read_distance_csv(path: Union[str, Path]) -> DistanceMatrix:
    lm = read_labeled_csv(path)
    try:
        return DistanceMatrix(lm.labels, lm.values)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
