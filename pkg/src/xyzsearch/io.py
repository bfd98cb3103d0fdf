"""On-disk dataset format and CSV import.

Layout of a dataset file (all integers little-endian)::

    magic  4 bytes  b"XYZ1"
    flags  uint32   0 = real, 1 = binary
    n      uint64
    p      uint64
    payload
        binary: p columns of ceil(n / 64) uint64 words, bit i of column j set iff X[i, j] = +1
        real:   n * p float64 values in column-major order
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .bitmatrix import PackedMatrix, _n_words as n_words_for

MAGIC = b"XYZ1"
FLAG_REAL = 0
FLAG_BINARY = 1
_HEADER = struct.Struct("<4sIQQ")


class DataFormatError(ValueError):
    pass


@dataclass
class DatasetFile:
    """A binary (:class:`PackedMatrix`) or real (float array) data matrix."""

    data: PackedMatrix | np.ndarray

    @property
    def binary(self) -> bool:
        return isinstance(self.data, PackedMatrix)

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self.data.shape)

    def dense(self) -> np.ndarray:
        """``(n, p)`` array: int8 signs for binary data, float64 otherwise."""
        return self.data.to_signs() if self.binary else np.asarray(self.data)

    def column(self) -> np.ndarray:
        """The single column of an ``(n, 1)`` dataset, used for responses."""
        if self.shape[1] != 1:
            raise DataFormatError(f"expected one column, found {self.shape[1]}")
        return self.dense()[:, 0]

    def write(self, path) -> None:
        n, p = self.shape
        with open(path, "wb") as fh:
            if self.binary:
                fh.write(_HEADER.pack(MAGIC, FLAG_BINARY, n, p))
                fh.write(self.data.words.astype("<u8").tobytes())
            else:
                fh.write(_HEADER.pack(MAGIC, FLAG_REAL, n, p))
                fh.write(np.asarray(self.data, dtype="<f8").tobytes(order="F"))

    @classmethod
    def read(cls, path) -> "DatasetFile":
        with open(path, "rb") as fh:
            head = fh.read(_HEADER.size)
            if len(head) < _HEADER.size:
                raise DataFormatError(f"{path}: truncated header")
            magic, flags, n, p = _HEADER.unpack(head)
            if magic != MAGIC:
                raise DataFormatError(f"{path}: bad magic {magic!r}")
            payload = fh.read()
        if flags == FLAG_BINARY:
            expected = p * n_words_for(n) * 8
        elif flags == FLAG_REAL:
            expected = n * p * 8
        else:
            raise DataFormatError(f"{path}: unknown flags {flags}")
        if len(payload) != expected:
            raise DataFormatError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
        if flags == FLAG_BINARY:
            words = np.frombuffer(payload, dtype="<u8").astype(np.uint64).reshape(p, n_words_for(n))
            try:
                return cls(PackedMatrix(n, p, words))
            except ValueError as exc:
                raise DataFormatError(f"{path}: {exc}") from exc
        X = np.frombuffer(payload, dtype="<f8").reshape((n, p), order="F").astype(np.float64)
        return cls(X)


def is_dataset_file(path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(4) == MAGIC


def read_csv_matrix(path, *, header: bool = True) -> tuple[np.ndarray, list[str] | None]:
    """Numeric matrix from a CSV file; ragged rows are an error."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    names = None
    if header:
        if not rows:
            raise DataFormatError(f"{path}: empty file")
        names, rows = rows[0], rows[1:]
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    width = len(names) if names is not None else len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataFormatError(f"{path}: row {i + 1} has {len(r)} fields, expected {width}")
    try:
        values = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise DataFormatError(f"{path}: non-finite value")
    return values, names


def import_csv(path, *, binary: bool, zero_one: bool = False, header: bool = True) -> DatasetFile:
    """Convert a CSV matrix to a :class:`DatasetFile`.

    With ``zero_one`` the values 0/1 are mapped to -1/+1 first. Binary imports
    reject anything that is not +/-1 after the mapping.
    """
    X, _ = read_csv_matrix(path, header=header)
    if zero_one:
        if not np.all((X == 0) | (X == 1)):
            raise DataFormatError(f"{path}: --zero-one needs every value in {{0, 1}}")
        X = 2 * X - 1
    if binary:
        bad = ~((X == 1) | (X == -1))
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise DataFormatError(f"{path}: value {X[i, j]} at row {i + 1}, column {j + 1} is not +/-1")
        return DatasetFile(PackedMatrix.from_signs(X.astype(np.int8)))
    return DatasetFile(X)


def load_response(path) -> np.ndarray:
    """Response vector from a one-column dataset file or a one-column CSV with header."""
    if is_dataset_file(path):
        return DatasetFile.read(path).column().astype(float)
    values, _ = read_csv_matrix(path)
    if values.shape[1] != 1:
        raise DataFormatError(f"{path}: response CSV must have one column")
    return values[:, 0]
