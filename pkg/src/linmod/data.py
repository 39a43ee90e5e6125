"""CSV datasets: a header row, numeric body, one response column."""
import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LinmodError, ValidationError


class DataError(LinmodError, ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    design: np.ndarray
    response: np.ndarray
    column_names: tuple
    response_name: str = "y"
    has_intercept: bool = False

    def __post_init__(self):
        if self.design.shape[0] != self.response.size:
            raise ValidationError(f"design has {self.design.shape[0]} rows, response has {self.response.size}")
        if len(set(self.column_names)) != len(self.column_names):
            raise ValidationError(f"column names are not unique: {self.column_names}")


INTERCEPT_NAME = "(intercept)"


def read_table(text: str, source="<text>"):
    """Header names and a float matrix from CSV text."""
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{source}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise DataError(f"{source}: duplicate column names in header {header}")
    body = rows[1:]
    if not body:
        raise DataError(f"{source}: header present but no data rows")
    values = np.empty((len(body), len(header)))
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise DataError(f"{source}: row {i + 2} has {len(row)} fields, header has {len(header)}")
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise DataError(f"{source}: non-numeric cell {cell!r} at row {i + 2}, column {header[j]!r}") from None
    if not np.all(np.isfinite(values)):
        raise DataError(f"{source}: NaN or Inf in data")
    return header, values


def _with_intercept(design, names, add_intercept):
    if not add_intercept:
        return design, tuple(names)
    return np.hstack([np.ones((design.shape[0], 1)), design]), (INTERCEPT_NAME,) + tuple(names)


def parse_csv(text: str, response_column: str, add_intercept=False, source="<text>") -> Dataset:
    header, values = read_table(text, source)
    if response_column not in header:
        raise DataError(f"{source}: response column {response_column!r} not found; available: {', '.join(header)}")
    ri = header.index(response_column)
    keep = [j for j in range(len(header)) if j != ri]
    design, names = _with_intercept(values[:, keep], [header[j] for j in keep], add_intercept)
    return Dataset(design, values[:, ri].copy(), names, response_column, bool(add_intercept))


def load_features(path, columns=None, drop=(), add_intercept=False):
    """Numeric table without a response: returns ``(matrix, names)``.

    ``columns`` selects and orders the feature columns by name; names in
    ``drop`` are ignored when ``columns`` is not given.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    header, values = read_table(path.read_text(encoding="utf-8"), str(path))
    if columns is None:
        columns = [h for h in header if h not in drop]
    missing = [c for c in columns if c not in header]
    if missing:
        raise DataError(f"{path}: missing columns {missing}; available: {', '.join(header)}")
    return _with_intercept(values[:, [header.index(c) for c in columns]], columns, add_intercept)


def load_csv(path, response_column: str, add_intercept=False) -> Dataset:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    return parse_csv(path.read_text(encoding="utf-8"), response_column, add_intercept, source=str(path))


def format_csv(columns, names) -> str:
    """Columns of floats as CSV with 17 significant digits, which round-trips float64 exactly."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in zip(*columns):
        w.writerow([f"{float(v):.17g}" for v in row])
    return buf.getvalue()


def save_csv(path, dataset: Dataset):
    """Write the non-intercept columns and the response."""
    start = 1 if dataset.has_intercept else 0
    cols = [dataset.design[:, j] for j in range(start, dataset.design.shape[1])] + [dataset.response]
    names = list(dataset.column_names[start:]) + [dataset.response_name]
    Path(path).write_text(format_csv(cols, names), encoding="utf-8")
