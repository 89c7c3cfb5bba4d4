"""Reading and writing delimiter-separated numeric matrices.

Files are UTF-8 text with comma or tab delimiters (detected from the first
non-empty line), an optional single header row, and decimal-point
numerals. Row numbers in error messages are 1-based file lines.
"""
import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import InvalidInputError


class MatrixParseError(InvalidInputError):
    """Malformed matrix file. ``row`` and ``column`` are 1-based (column may be None)."""

    def __init__(self, message, row, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


@dataclass(frozen=True)
class DatasetMatrix:
    values: np.ndarray
    column_names: Optional[Sequence[str]] = None

    @property
    def row_count(self):
        return self.values.shape[0]

    @property
    def col_count(self):
        return self.values.shape[1]


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_matrix_file(path):
    """Parse a numeric matrix file into a :class:`DatasetMatrix`.

    The first row is treated as a header when any of its cells is not a
    number. Ragged rows, non-numeric cells and non-finite values raise
    :class:`MatrixParseError` naming the offending row and column.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    numbered = [(i + 1, line) for i, line in enumerate(lines) if line.strip()]
    if not numbered:
        raise MatrixParseError(f"{path}: no data", row=1)
    delimiter = "\t" if "\t" in numbered[0][1] else ","
    rows = [(lineno, next(csv.reader([line], delimiter=delimiter))) for lineno, line in numbered]

    names = None
    first_line, first = rows[0]
    if not all(_is_number(c) for c in first):
        names = [c.strip() for c in first]
        rows = rows[1:]
        if not rows:
            raise MatrixParseError(f"{path}: header row but no data", row=first_line)

    width = len(names) if names is not None else len(rows[0][1])
    values = np.empty((len(rows), width))
    for r, (lineno, cells) in enumerate(rows):
        if len(cells) != width:
            raise MatrixParseError(
                f"{path}: row {lineno} has {len(cells)} fields, expected {width}", row=lineno)
        for c, cell in enumerate(cells):
            try:
                v = float(cell)
            except ValueError:
                raise MatrixParseError(
                    f"{path}: row {lineno}, column {c + 1}: not a number: {cell!r}",
                    row=lineno, column=c + 1) from None
            if not math.isfinite(v):
                raise MatrixParseError(
                    f"{path}: row {lineno}, column {c + 1}: non-finite value {cell!r}",
                    row=lineno, column=c + 1)
            values[r, c] = v
    return DatasetMatrix(values=values, column_names=names)


def write_matrix_file(path, values, column_names=None, delimiter=","):
    """Write ``values`` so that :func:`load_matrix_file` reads them back exactly."""
    values = np.asarray(values, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        if column_names is not None:
            writer.writerow(column_names)
        for row in values:
            writer.writerow([repr(float(v)) for v in row])
