"""Flat-file reading and writing: response CSVs, labels, matrices, key=value summaries."""

import csv
from pathlib import Path

import numpy as np

from ._validation import as_generator
from .exceptions import FormatError, ParseError

MISSING_TOKENS = frozenset({"NA", "na", "NaN", "nan"})
_CELL = {"0": 0.0, "1": 1.0}


def read_response_csv(path, header=False):
    """Parse a 0/1/NA CSV into a float matrix with NaN for missing cells."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not record or all(not c.strip() for c in record):
                continue
            row = []
            for col, cell in enumerate(record, start=1):
                token = cell.strip()
                if token in _CELL:
                    row.append(_CELL[token])
                elif token in MISSING_TOKENS:
                    row.append(np.nan)
                else:
                    raise ParseError(f"invalid cell {cell!r}", row=lineno, col=col)
            if rows and len(row) != len(rows[0]):
                raise ParseError(
                    f"expected {len(rows[0])} cells, found {len(row)}", row=lineno
                )
            rows.append(row)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def read_row_filter(path):
    """Read 1-based row numbers (one per line, '#' comments allowed)."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            value = int(line)
        except ValueError:
            raise ParseError(f"invalid row number {line!r}", row=lineno) from None
        if value < 1:
            raise ParseError("row numbers are 1-based", row=lineno)
        rows.append(value)
    return rows


def impute_missing(R, seed=None):
    """Fill NaN cells with Bernoulli draws at the row's observed positive rate."""
    R = np.array(R, dtype=np.float64)
    missing = np.isnan(R)
    if not missing.any():
        return R
    observed = (~missing).sum(axis=1)
    empty = np.flatnonzero(observed == 0)
    if empty.size:
        raise FormatError(f"row {empty[0] + 1} has no observed cells")
    rate = np.nansum(R, axis=1) / observed
    draws = as_generator(seed).random(R.shape) < rate[:, np.newaxis]
    R[missing] = draws[missing]
    return R


def ingest_csv(path, impute_seed=None, header=False, exclude_rows=None, max_missing=None):
    """Load a response CSV and impute its missing cells.

    Parameters
    ----------
    path : path-like
        Comma-separated 0/1/NA cells, one individual per row.
    impute_seed : int, optional
        Seed for the imputation draws.
    header : bool, default=False
        Skip the first line.
    exclude_rows : iterable of int or path-like, optional
        1-based data-row numbers to drop, or a file listing them.
    max_missing : float, optional
        Drop rows whose missing fraction exceeds this value.

    Returns
    -------
    ndarray of shape (n_kept, n_items)
    """
    R = read_response_csv(path, header=header)
    keep = np.ones(R.shape[0], dtype=bool)
    if exclude_rows is not None:
        if isinstance(exclude_rows, (str, Path)):
            exclude_rows = read_row_filter(exclude_rows)
        for r in exclude_rows:
            if not 1 <= r <= R.shape[0]:
                raise FormatError(f"row filter refers to row {r}, file has {R.shape[0]}")
            keep[r - 1] = False
    if max_missing is not None:
        keep &= np.isnan(R).mean(axis=1) <= max_missing
    R = R[keep]
    if R.shape[0] == 0:
        raise FormatError("no rows left after filtering")
    return impute_missing(R, impute_seed)


def write_matrix_csv(path, M, fmt="%.10g"):
    np.savetxt(path, np.atleast_2d(M), delimiter=",", fmt=fmt)


def read_matrix_csv(path):
    try:
        M = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if M.size == 0:
        raise FormatError(f"{path}: empty matrix")
    return M


def write_labels(path, labels):
    """Write labels one per line, shifted to 1-based class numbers."""
    Path(path).write_text("".join(f"{int(s) + 1}\n" for s in labels))


def read_labels(path):
    """Read 1-based labels written by :func:`write_labels`; returns 0-based."""
    values = [int(line) for line in Path(path).read_text().split()]
    return np.asarray(values, dtype=np.int64) - 1


def _format_value(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(_format_value(v) for v in value)
    if isinstance(value, np.generic):
        return _format_value(value.item())
    if value is None:
        return ""
    return str(getattr(value, "value", value))


def write_key_values(path, items):
    """Write ``key=value`` lines; sequences are ';'-joined."""
    lines = [f"{key}={_format_value(value)}" for key, value in items.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_key_values(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip() and "=" in line:
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
