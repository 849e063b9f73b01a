"""Exact determinants by fraction-free (Bareiss) elimination."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence


def bareiss_det(matrix: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix, exact."""
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rowk = a[k]
        for i in range(k + 1, n):
            rowi = a[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * akk - aik * rowk[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def fraction_det(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant of a rational matrix: clear denominators, then Bareiss."""
    rows = [[Fraction(x) for x in row] for row in matrix]
    n = len(rows)
    if n == 0:
        return Fraction(1)
    scales = [lcm(*(x.denominator for x in row)) for row in rows]
    ints = [[int(x * s) for x in row] for row, s in zip(rows, scales)]
    denom = 1
    for s in scales:
        denom *= s
    return Fraction(bareiss_det(ints), denom)


def fraction_matmul(a, b):
    inner = len(b)
    cols = len(b[0]) if inner else 0
    return [[sum(row[k] * b[k][j] for k in range(inner)) for j in range(cols)] for row in a]
