"""Combinatorial number system: colex rank/unrank of k-subsets.

Faces are tuples of 1-based vertices.  A face ``(v_1 < ... < v_k)`` has colex
rank ``sum_i C(v_i - 1, i)``, so all k-subsets of ``[n]`` are indexed by
``0 .. C(n, k) - 1`` and the index of a face does not depend on ``n``.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterator, Sequence

import numpy as np

Face = tuple[int, ...]


def colex_rank(face: Sequence[int]) -> int:
    return sum(comb(v - 1, i + 1) for i, v in enumerate(face))


def colex_unrank(rank: int, k: int) -> Face:
    """Inverse of :func:`colex_rank` for k-subsets."""
    if rank < 0:
        raise ValueError("rank must be non-negative")
    out = []
    for i in range(k, 0, -1):
        # largest c with C(c, i) <= rank
        c = i - 1
        hi = i
        while comb(hi, i) <= rank:
            hi *= 2
        lo = c
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if comb(mid, i) <= rank:
                lo = mid
            else:
                hi = mid
        out.append(lo + 1)
        rank -= comb(lo, i)
    return tuple(reversed(out))


@lru_cache(maxsize=64)
def faces(n: int, k: int) -> tuple[Face, ...]:
    """All k-subsets of [n], in colex order (position == colex rank)."""
    if k < 0 or k > n:
        return ()
    out = sorted(combinations(range(1, n + 1), k), key=lambda f: f[::-1])
    return tuple(out)


@lru_cache(maxsize=64)
def face_index(n: int, k: int) -> dict[Face, int]:
    return {f: i for i, f in enumerate(faces(n, k))}


@lru_cache(maxsize=64)
def face_array(n: int, k: int) -> np.ndarray:
    """``(C(n,k), k)`` int array of the colex-ordered k-subsets (1-based)."""
    arr = np.array(faces(n, k), dtype=np.int64)
    return arr.reshape(len(arr), k)


def boundary_ranks(n: int, k: int) -> np.ndarray:
    """For each k-subset, the colex ranks of its k (k-1)-subsets.

    Column ``i`` holds the rank of the face with its ``i``-th smallest vertex
    removed.
    """
    arr = face_array(n, k) - 1
    m = len(arr)
    out = np.zeros((m, k), dtype=np.int64)
    binom = np.array([[comb(v, j) for j in range(k + 1)] for v in range(n + 1)], dtype=np.int64)
    for drop in range(k):
        keep = [c for c in range(k) if c != drop]
        sub = arr[:, keep]
        out[:, drop] = sum(binom[sub[:, j], j + 1] for j in range(k - 1)) if k > 1 else 0
    return out


def next_colex_mask(mask: int) -> int:
    """Next integer with the same popcount (Gosper's hack).

    Iterating from ``(1 << k) - 1`` enumerates the k-subsets of ``{0,1,...}``
    in colex order.
    """
    low = mask & -mask
    ripple = mask + low
    return ripple | (((mask ^ ripple) >> 2) // low)


def colex_masks(universe: int, k: int, start: int = 0, stop: int | None = None) -> Iterator[int]:
    """Bitmasks of the k-subsets of ``range(universe)`` with colex rank in [start, stop)."""
    total = comb(universe, k)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return
    if k == 0:
        yield 0
        return
    mask = sum(1 << (v - 1) for v in colex_unrank(start, k))
    for _ in range(start, stop):
        yield mask
        mask = next_colex_mask(mask)
