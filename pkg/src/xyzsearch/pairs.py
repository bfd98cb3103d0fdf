"""Equal-key and tau-close pair detection, and strength filtering of candidates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

_CODE_SHIFT = np.int64(32)


class CandidateBudgetExceeded(RuntimeError):
    """A repetition produced more candidate pairs than its budget allows."""

    def __init__(self, total_pairs: int, budget: int):
        super().__init__(f"{total_pairs} candidate pairs exceed the budget of {budget}")
        self.total_pairs = total_pairs
        self.budget = budget


@dataclass(frozen=True)
class CandidatePairSet:
    """Union of Cartesian blocks ``x_block_b x z_block_b``.

    Block ``b`` pairs every X index in ``x_index[x_offsets[b]:x_offsets[b+1]]``
    with every Z index in ``z_index[z_offsets[b]:z_offsets[b+1]]``.
    """

    x_index: np.ndarray
    x_offsets: np.ndarray
    z_index: np.ndarray
    z_offsets: np.ndarray

    @classmethod
    def empty(cls) -> "CandidatePairSet":
        e = np.zeros(0, dtype=np.int64)
        z = np.zeros(1, dtype=np.int64)
        return cls(e, z, e, z)

    @classmethod
    def from_groups(cls, groups) -> "CandidatePairSet":
        if not groups:
            return cls.empty()
        xs = [np.asarray(g[0], dtype=np.int64) for g in groups]
        zs = [np.asarray(g[1], dtype=np.int64) for g in groups]
        return cls(
            np.concatenate(xs),
            np.concatenate([[0], np.cumsum([len(a) for a in xs])]).astype(np.int64),
            np.concatenate(zs),
            np.concatenate([[0], np.cumsum([len(a) for a in zs])]).astype(np.int64),
        )

    @property
    def n_blocks(self) -> int:
        return self.x_offsets.size - 1

    @property
    def block_sizes(self) -> np.ndarray:
        return np.diff(self.x_offsets) * np.diff(self.z_offsets)

    @property
    def total_pairs(self) -> int:
        return int(self.block_sizes.sum())

    @property
    def groups(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [
            (self.x_index[self.x_offsets[b]:self.x_offsets[b + 1]],
             self.z_index[self.z_offsets[b]:self.z_offsets[b + 1]])
            for b in range(self.n_blocks)
        ]

    def _expand(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        nx = np.diff(self.x_offsets[lo:hi + 1])
        nz = np.diff(self.z_offsets[lo:hi + 1])
        sizes = nx * nz
        total = int(sizes.sum())
        if total == 0:
            e = np.zeros(0, dtype=np.int64)
            return e, e
        block = np.repeat(np.arange(hi - lo), sizes)
        starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        local = np.arange(total) - starts[block]
        nz_b = nz[block]
        js = self.x_index[self.x_offsets[lo + block] + local // nz_b]
        ks = self.z_index[self.z_offsets[lo + block] + local % nz_b]
        return js, ks

    def iter_pairs(self, chunk_size: int = 1 << 20) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield ``(js, ks)`` arrays block-group by block-group, each at most about ``chunk_size`` long."""
        sizes = self.block_sizes
        lo = 0
        while lo < self.n_blocks:
            cum = np.cumsum(sizes[lo:])
            hi = lo + max(1, int(np.searchsorted(cum, chunk_size, side="right")))
            yield self._expand(lo, hi)
            lo = hi

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return self._expand(0, self.n_blocks)


@dataclass(frozen=True)
class InteractionHit:
    j: int
    k: int
    strength: float
    found_at_repetition: int
    sign: int = 1


def _blocks_from_sorted(keys: np.ndarray, side: np.ndarray, idx: np.ndarray) -> CandidatePairSet:
    if keys.size == 0:
        return CandidatePairSet.empty()
    starts = np.flatnonzero(np.concatenate([[True], keys[1:] != keys[:-1]]))
    bounds = np.append(starts, keys.size)
    # side is sorted within each run (X before Z), so the X/Z split is one count
    n_x = np.add.reduceat((side == 0).astype(np.int64), starts)
    n_all = np.diff(bounds)
    both = (n_x > 0) & (n_x < n_all)
    if not both.any():
        return CandidatePairSet.empty()
    nx, na = n_x[both], n_all[both]
    in_both = np.repeat(both, n_all)
    x_take = np.flatnonzero(in_both & (side == 0))
    z_take = np.flatnonzero(in_both & (side != 0))
    return CandidatePairSet(
        idx[x_take],
        np.concatenate([[0], np.cumsum(nx)]).astype(np.int64),
        idx[z_take],
        np.concatenate([[0], np.cumsum(na - nx)]).astype(np.int64),
    )


def equal_pairs(x_keys, z_keys) -> CandidatePairSet:
    """All ``(j, k)`` with ``x_keys[j] == z_keys[k]``, found by one sort of the 2p keys."""
    x_keys = np.asarray(x_keys)
    z_keys = np.asarray(z_keys)
    keys = np.concatenate([x_keys, z_keys])
    side = np.concatenate([np.zeros(x_keys.size, np.int8), np.ones(z_keys.size, np.int8)])
    idx = np.concatenate([np.arange(x_keys.size), np.arange(z_keys.size)]).astype(np.int64)
    # stable sort keeps X before Z and indices ascending within equal keys
    order = np.argsort(keys, kind="stable")
    return _blocks_from_sorted(keys[order], side[order], idx[order])


def close_pairs(x, z, tau: float) -> CandidatePairSet:
    """All ``(j, k)`` with ``|x_j - z_k| <= tau``, one block ``{j} x window`` per X point."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    order = np.argsort(z, kind="stable")
    zs = z[order]
    lo = np.searchsorted(zs, x - tau, side="left")
    hi = np.searchsorted(zs, x + tau, side="right")
    counts = hi - lo
    keep = np.flatnonzero(counts > 0)
    if keep.size == 0:
        return CandidatePairSet.empty()
    c = counts[keep]
    z_take = np.repeat(lo[keep] - np.concatenate([[0], np.cumsum(c)[:-1]]), c) + np.arange(c.sum())
    return CandidatePairSet(
        keep.astype(np.int64),
        np.arange(keep.size + 1, dtype=np.int64),
        order[z_take].astype(np.int64),
        np.concatenate([[0], np.cumsum(counts[keep])]).astype(np.int64),
    )


def filter_strong(
    E: CandidatePairSet,
    strength_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    gamma: float,
    seen: set,
    repetition: int = 0,
    *,
    symmetric: bool = False,
    drop_diagonal: bool = False,
    max_candidates: int | None = None,
    sign: int = 1,
) -> tuple[list[InteractionHit], int]:
    """Evaluate unseen candidates and keep those with strength >= gamma.

    Returns the hits and the number of strength evaluations performed. Every
    evaluated pair is added to ``seen``. With ``symmetric`` the pair is
    canonicalized to ``(min, max)`` before deduplication.
    """
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if max_candidates is not None and E.total_pairs > max_candidates:
        raise CandidateBudgetExceeded(E.total_pairs, max_candidates)
    hits: list[InteractionHit] = []
    checked = 0
    for js, ks in E.iter_pairs():
        if symmetric:
            js, ks = np.minimum(js, ks), np.maximum(js, ks)
        if drop_diagonal:
            off = js != ks
            js, ks = js[off], ks[off]
        codes = np.unique((js << _CODE_SHIFT) | ks)
        if seen:
            fresh = np.fromiter((c not in seen for c in codes.tolist()), dtype=bool, count=codes.size)
            codes = codes[fresh]
        if codes.size == 0:
            continue
        seen.update(codes.tolist())
        js = codes >> _CODE_SHIFT
        ks = codes & np.int64(0xFFFFFFFF)
        strengths = np.asarray(strength_fn(js, ks), dtype=float)
        checked += codes.size
        for t in np.flatnonzero(strengths >= gamma):
            hits.append(InteractionHit(int(js[t]), int(ks[t]), float(strengths[t]), repetition, sign))
    return hits, checked
