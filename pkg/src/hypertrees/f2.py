"""Bit-packed linear algebra over F2.

Vectors are Python ints used as bitsets (bit ``j`` = coordinate ``j``), so a
row XOR is a word-level operation on arbitrarily long rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class EchelonBasis:
    """Incrementally built row basis, keyed by leading (highest) bit."""

    def __init__(self, vectors: Iterable[int] = ()):
        self.rows: dict[int, int] = {}
        for v in vectors:
            self.add(v)

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, v: int) -> int:
        rows = self.rows
        while v:
            lead = v.bit_length() - 1
            r = rows.get(lead)
            if r is None:
                return v
            v ^= r
        return 0

    def add(self, v: int) -> bool:
        """Insert ``v``; return True if it was independent of the current span."""
        v = self.reduce(v)
        if not v:
            return False
        self.rows[v.bit_length() - 1] = v
        return True

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    def reduced(self) -> list[tuple[int, int]]:
        """Reduced row echelon form as ``(pivot, row)`` pairs, pivots ascending.

        Every row has a zero in every other row's pivot position.
        """
        pivots = sorted(self.rows)
        out = {}
        for p in pivots:
            v = self.rows[p]
            # clear lower pivots using already reduced rows
            for q in sorted(out, reverse=True):
                if (v >> q) & 1:
                    v ^= out[q]
            out[p] = v
        return [(p, out[p]) for p in pivots]


def rank(rows: Iterable[int], limit: int | None = None) -> int:
    """Rank of a set of bit rows; stops early once ``limit`` is reached."""
    basis = EchelonBasis()
    for v in rows:
        basis.add(v)
        if limit is not None and len(basis) >= limit:
            break
    return len(basis)


@dataclass
class F2Matrix:
    """Rows packed as ints; ``row_labels``/``col_labels`` name the faces."""

    rows: list[int]
    ncols: int
    row_labels: Sequence = field(default=(), repr=False)
    col_labels: Sequence = field(default=(), repr=False)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def rank(self, limit: int | None = None) -> int:
        return rank(self.rows, limit)

    def apply(self, v: int) -> int:
        """Matrix-vector product with ``v`` as a column bitset."""
        out = 0
        for r, row in enumerate(self.rows):
            if (row & v).bit_count() & 1:
                out |= 1 << r
        return out

    def transpose(self) -> "F2Matrix":
        cols = [0] * self.ncols
        for r, row in enumerate(self.rows):
            while row:
                low = row & -row
                cols[low.bit_length() - 1] |= 1 << r
                row ^= low
        return F2Matrix(cols, self.nrows, self.col_labels, self.row_labels)

    def to_dense(self) -> np.ndarray:
        return np.array(
            [[(row >> c) & 1 for c in range(self.ncols)] for row in self.rows], dtype=np.uint8
        ).reshape(self.nrows, self.ncols)


def bits(v: int) -> list[int]:
    """Indices of set bits, ascending."""
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out


def from_indices(idx: Iterable[int]) -> int:
    v = 0
    for j in idx:
        v |= 1 << int(j)
    return v
