"""Bit-packed +/-1 matrices and exact interaction strengths.

Columns are stored as rows of a ``(p, n_words)`` ``uint64`` array. Bit ``i``
of column ``j`` lives in word ``i // 64`` at position ``i % 64``; a set bit
encodes +1, a cleared bit -1. Bits beyond ``n_rows`` are always zero, so
XOR + popcount counts disagreements exactly without masking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WORD_BITS = 64


def _n_words(n_rows: int) -> int:
    return (n_rows + WORD_BITS - 1) // WORD_BITS


def _pack_bool_columns(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean ``(n, p)`` array into ``(p, n_words)`` little-endian words."""
    n, p = bits.shape
    n_words = _n_words(n)
    padded = np.zeros((p, n_words * WORD_BITS), dtype=bool)
    padded[:, :n] = bits.T
    as_bytes = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(as_bytes).view("<u8").astype(np.uint64, copy=False)


@dataclass(frozen=True, eq=False)
class PackedMatrix:
    """Column-major bit-packed matrix with entries in {-1, +1}."""

    n_rows: int
    n_cols: int
    words: np.ndarray

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("PackedMatrix needs n_rows >= 1 and n_cols >= 1")
        if self.words.shape != (self.n_cols, _n_words(self.n_rows)):
            raise ValueError(
                f"word array has shape {self.words.shape}, expected "
                f"{(self.n_cols, _n_words(self.n_rows))}"
            )
        tail = self.n_rows % WORD_BITS
        if tail and np.any(self.words[:, -1] >> np.uint64(tail)):
            raise ValueError("padding bits beyond n_rows must be zero")
        self.words.flags.writeable = False

    @classmethod
    def from_signs(cls, values) -> "PackedMatrix":
        """Pack an ``(n, p)`` array of +/-1 values (a 1-D array is one column)."""
        arr = np.asarray(values)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("expected a 1-D or 2-D array")
        if not np.all((arr == 1) | (arr == -1)):
            raise ValueError("entries must be -1 or +1")
        return cls(arr.shape[0], arr.shape[1], _pack_bool_columns(arr == 1))

    @classmethod
    def from_bits(cls, bits) -> "PackedMatrix":
        """Pack an ``(n, p)`` boolean array, True meaning +1."""
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim == 1:
            bits = bits[:, None]
        return cls(bits.shape[0], bits.shape[1], _pack_bool_columns(bits))

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    def to_bits(self) -> np.ndarray:
        as_bytes = self.words.astype("<u8").view(np.uint8)
        bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
        return bits[:, : self.n_rows].T.astype(bool)

    def to_signs(self) -> np.ndarray:
        """Dense ``(n, p)`` int8 array of +/-1."""
        return np.where(self.to_bits(), 1, -1).astype(np.int8)

    def row_bits(self, rows) -> np.ndarray:
        """Bits at the given row indices for every column, shape ``(p, len(rows))``."""
        rows = np.asarray(rows, dtype=np.int64)
        words = self.words[:, rows // WORD_BITS]
        return ((words >> (rows % WORD_BITS).astype(np.uint64)) & np.uint64(1)).astype(bool)

    def __eq__(self, other):
        if not isinstance(other, PackedMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.words, other.words)

    __hash__ = None


def _check_pair(A: PackedMatrix, j: int, k: int) -> None:
    for idx in (j, k):
        if not 0 <= idx < A.n_cols:
            raise IndexError(f"column index {idx} out of range for p={A.n_cols}")


def build_z(X: PackedMatrix, y) -> PackedMatrix:
    """Form Z with ``Z_ij = y_i * X_ij`` for a sign vector ``y``.

    Under the +1 <-> 1 encoding the product is XNOR, i.e. ``X XOR NOT y``;
    padding is masked back to zero afterwards.
    """
    y = np.asarray(y)
    if y.shape != (X.n_rows,):
        raise ValueError(f"y has shape {y.shape}, expected ({X.n_rows},)")
    y_packed = PackedMatrix.from_signs(y).words[0]
    flip = ~y_packed
    tail = X.n_rows % WORD_BITS
    if tail:
        flip[-1] &= np.uint64((1 << tail) - 1)
    return PackedMatrix(X.n_rows, X.n_cols, X.words ^ flip)


def disagreements(A: PackedMatrix, B: PackedMatrix, a_idx, b_idx) -> np.ndarray:
    """Number of rows where column ``a_idx`` of A differs from ``b_idx`` of B (vectorized)."""
    diff = A.words[np.asarray(a_idx)] ^ B.words[np.asarray(b_idx)]
    return np.bitwise_count(diff).sum(axis=-1, dtype=np.int64)


def interaction_strength(X: PackedMatrix, Z: PackedMatrix, j: int, k: int) -> float:
    """Fraction of rows with ``y_i == X_ij * X_ik``, computed as agreement of Z_j and X_k."""
    _check_pair(X, j, k)
    return float(X.n_rows - disagreements(Z, X, j, k)) / X.n_rows


def interaction_strengths(X: PackedMatrix, Z: PackedMatrix, js, ks) -> np.ndarray:
    """Vectorized :func:`interaction_strength` over index arrays."""
    return (X.n_rows - disagreements(Z, X, js, ks)) / X.n_rows


def weighted_interaction_strength(X: PackedMatrix, y, j: int, k: int) -> float:
    """Weighted agreement ``sum_i |y_i| 1{sgn(y_i) = X_ij X_ik} / ||y||_1``."""
    _check_pair(X, j, k)
    return float(weighted_interaction_strengths(X, y, [j], [k])[0])


def weighted_interaction_strengths(X: PackedMatrix, y, js, ks) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (X.n_rows,):
        raise ValueError(f"y has shape {y.shape}, expected ({X.n_rows},)")
    l1 = np.abs(y).sum()
    if not l1 > 0:
        raise ValueError("response vector is identically zero")
    bits = X.to_bits()
    js, ks = np.asarray(js), np.asarray(ks)
    prod_pos = bits[:, js] == bits[:, ks]
    agree = np.where(prod_pos, y[:, None] > 0, y[:, None] < 0)
    return (np.abs(y)[:, None] * agree).sum(axis=0) / l1


def sign_transform(X, rng: np.random.Generator) -> PackedMatrix:
    """Binarize by sign; exact zeros become +/-1 by a fresh fair coin each call."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    bits = X > 0
    zeros = X == 0
    if zeros.any():
        bits[zeros] = rng.random(int(zeros.sum())) < 0.5
    return PackedMatrix.from_bits(bits)


def unbiased_transform_sample(X, rng: np.random.Generator) -> PackedMatrix:
    """Random binarization with ``P(+1) = (x + 1) / 2`` so that ``E[x~] = x``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if np.any(np.abs(X) > 1):
        raise ValueError("unbiased transform needs entries in [-1, 1]; rescale or cap first")
    return PackedMatrix.from_bits(rng.random(X.shape) < (X + 1.0) / 2.0)


def rescale_rows(X, y):
    """Divide row i of X by ``max_j |X_ij|`` and multiply ``y_i`` by its square.

    The products ``y_i X_ij X_ik`` are unchanged while X lands in [-1, 1].
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape != (X.shape[0],):
        raise ValueError("y length must equal the number of rows of X")
    nu = np.abs(X).max(axis=1)
    bad = np.flatnonzero(nu == 0)
    if bad.size:
        raise ValueError(f"row {int(bad[0])} of X is all zero; cannot rescale")
    return X / nu[:, None], y * nu**2


def cap_entries(X, c: float) -> np.ndarray:
    if not c > 0:
        raise ValueError("cap must be positive")
    return np.clip(np.asarray(X, dtype=float), -c, c)


class WeightedSampler:
    """Inverse-CDF sampler over row indices with probabilities proportional to ``weights``."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        total = w.sum()
        if not total > 0:
            raise ValueError("weights sum to zero")
        cdf = np.cumsum(w / total)
        if abs(cdf[-1] - 1.0) > 1e-12:
            raise ValueError("cumulative weights do not reach 1")
        cdf[-1] = 1.0
        self.cdf = cdf
        self.cdf.flags.writeable = False

    @property
    def n(self) -> int:
        return self.cdf.size

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(size)
        # side="right" never selects a zero-weight index
        return np.minimum(np.searchsorted(self.cdf, u, side="right"), self.n - 1)
