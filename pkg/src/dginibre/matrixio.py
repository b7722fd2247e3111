"""Plain-text interchange format for dense complex matrices.

A matrix file is one JSON header line followed by CSV rows. Each row holds
``2 * cols`` reals: real and imaginary parts interleaved, row-major::

    {"format": "complex-matrix-csv", "rows": 2, "cols": 2}
    1.0,0.0,0.0,0.0
    0.0,0.0,1.0,0.0

Readers only rely on the total count of numbers (``2 * rows * cols``), so the
line layout of the body is free.
"""
import json

import numpy as np

FORMAT_TAG = "complex-matrix-csv"


class MatrixFormatError(ValueError):
    """Raised for malformed matrix files."""


def write_matrix(path, matrix, **meta):
    """Write `matrix` to `path`; extra keyword arguments go into the header."""
    M = np.asarray(matrix, dtype=complex)
    if M.ndim != 2:
        raise ValueError("expected a 2D array, got shape %r" % (M.shape,))
    header = {"format": FORMAT_TAG, "rows": M.shape[0], "cols": M.shape[1]}
    header.update(meta)
    inter = np.empty((M.shape[0], 2 * M.shape[1]))
    inter[:, 0::2] = M.real
    inter[:, 1::2] = M.imag
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row in inter:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix(path):
    """Read a matrix written by :func:`write_matrix`.

    Raises
    ------
    MatrixFormatError
        If the header is missing or malformed, the value count is wrong or
        any entry is not finite.
    """
    with open(path) as fh:
        first = fh.readline()
        body = fh.read()
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError("%s: first line is not a JSON header" % path) from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT_TAG:
        raise MatrixFormatError("%s: header lacks format=%r" % (path, FORMAT_TAG))
    try:
        rows, cols = int(header["rows"]), int(header["cols"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError("%s: header needs integer rows/cols" % path) from exc
    if rows < 1 or cols < 1:
        raise MatrixFormatError("%s: non-positive dimensions" % path)

    tokens = body.replace(",", " ").split()
    try:
        values = np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise MatrixFormatError("%s: non-numeric entry" % path) from exc
    if values.size != 2 * rows * cols:
        raise MatrixFormatError(
            "%s: expected %d reals, found %d" % (path, 2 * rows * cols, values.size))
    if not np.all(np.isfinite(values)):
        raise MatrixFormatError("%s: non-finite entry" % path)
    return (values[0::2] + 1j * values[1::2]).reshape(rows, cols)
