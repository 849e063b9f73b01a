"""Integer homology orders, the hypertree predicate and exhaustive enumeration.

Why ``homology_order`` never computes ``ker d_{d-1}``
-----------------------------------------------------
Every complex here carries the complete (d-1)-skeleton of the simplex on
[n].  Write ``C = C_{d-1}`` and ``Z = ker d_{d-1}`` (for d = 1 the
augmentation map plays the role of ``d_0``).  ``Z`` is a kernel, hence a
saturated sublattice and a direct summand of ``C``: ``C = Z + Y`` with
``Y`` free.  The complete skeleton is acyclic below dimension d-1, so
``rank Z = C(n, d) - C(n-1, d-1) = C(n-1, d)``.

Since ``im d_d`` lies in ``Z``, the cokernel of ``d_d`` splits as
``Z / im d_d  +  Y``, and ``Z / im d_d = H_{d-1}``.  Therefore

* ``H_{d-1}`` is finite iff ``rank d_d = rank Z = C(n-1, d)``;
* when finite, ``|H_{d-1}|`` is the order of the torsion of
  ``coker d_d``, i.e. the product of the nonzero invariant factors of
  ``d_d`` (a ``C(n,d) x |K(d)|`` matrix).
"""

from __future__ import annotations

import csv
import math
import multiprocessing as mp
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .combinatorics import colex_masks, face_index, faces
from .complex import Complex
from .config import Caps, default_caps
from .errors import CapacityError, InvalidInput
from .exact import bareiss_det
from .hypertree import incidence, kernel


@dataclass(frozen=True)
class SnfResult:
    """Nonzero invariant factors ``d_1 | d_2 | ...`` and the rank."""

    factors: tuple[int, ...]
    rank: int

    @property
    def torsion(self) -> int:
        return math.prod(self.factors)


def _diagonalize(rows: list[list[int]]) -> list[int]:
    """Nonzero diagonal of a unimodularly equivalent diagonal matrix.

    The pivot is always an entry of least absolute value; column and row are
    reduced by integer division until only the pivot remains.  The product of
    the returned entries (up to sign) equals the product of invariant factors.
    """
    a = [list(r) for r in rows]
    diag = []
    while a and a[0]:
        best = None
        for i, row in enumerate(a):
            for j, x in enumerate(row):
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        while True:
            p = a[pi][pj]
            prow = a[pi]
            dirty = False
            for i, row in enumerate(a):
                if i == pi or not row[pj]:
                    continue
                q = row[pj] // p
                if q:
                    for j, x in enumerate(prow):
                        if x:
                            row[j] -= q * x
                if row[pj]:
                    dirty = True
            for j, x in enumerate(prow):
                if j != pj and x:
                    q = x // p
                    if q:
                        # column op: column j -= q * column pj
                        for row in a:
                            if row[pj]:
                                row[j] -= q * row[pj]
                    if prow[j]:
                        dirty = True
            if not dirty:
                break
            # a smaller remainder exists in the pivot row or column; pivot on it
            cands = [(abs(row[pj]), i, pj) for i, row in enumerate(a) if row[pj]]
            cands += [(abs(x), pi, j) for j, x in enumerate(prow) if x]
            _, pi, pj = min(cands)
        diag.append(abs(a[pi][pj]))
        del a[pi]
        for row in a:
            del row[pj]
    return diag


def smith_normal_form(M) -> SnfResult:
    """Invariant factors of an integer matrix (arbitrary precision)."""
    rows = [[int(x) for x in row] for row in (M.tolist() if isinstance(M, np.ndarray) else M)]
    diag = sorted(_diagonalize(rows))
    # diag(a, b) ~ diag(gcd, lcm) restores the divisibility chain
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            g = math.gcd(diag[i], diag[j])
            if g != diag[i]:
                diag[i], diag[j] = g, diag[i] * diag[j] // g
    return SnfResult(tuple(diag), len(diag))


def boundary_matrix(K: Complex) -> list[list[int]]:
    """Signed boundary ``d_d`` as dense rows: (d-1)-faces (colex) by top faces."""
    n, d = K.n, K.d
    if d < 1:
        raise InvalidInput("integer homology needs d >= 1")
    idx = face_index(n, d + 1)
    cols = [idx[f] for f in K.top_faces]
    sub = incidence(n, d).matrix[:, cols].toarray()
    return sub.astype(int).tolist()


def _order_from_diag(diag: list[int], target: int) -> int | float:
    if len(diag) < target:
        return math.inf
    return math.prod(diag)


def homology_order(K: Complex) -> int | float:
    """``|H_{d-1}(K; Z)|``, or ``math.inf`` when the group is infinite."""
    target = comb(K.n - 1, K.d)
    if len(K) < target:
        return math.inf
    return _order_from_diag(_diagonalize(boundary_matrix(K)), target)


def is_hypertree(K: Complex) -> bool:
    return K.d >= 1 and len(K) == comb(K.n - 1, K.d) and homology_order(K) != math.inf


def kalai_total(n: int, d: int) -> int:
    """``n^{C(n-2, d)}``, the sum of ``|H_{d-1}|^2`` over hypertrees."""
    return n ** comb(n - 2, d)


def measure_weight(K: Complex) -> Fraction:
    """``|H_{d-1}(K)|^2 / n^{C(n-2,d)}`` for a hypertree ``K``."""
    if K.d < 1 or len(K) != comb(K.n - 1, K.d):
        raise InvalidInput("not a hypertree: wrong number of top faces")
    h = homology_order(K)
    if h == math.inf:
        raise InvalidInput("not a hypertree: H_{d-1} is infinite")
    return Fraction(h * h, kalai_total(K.n, K.d))


def determinant_weight(K: Complex) -> Fraction:
    """``det (P_{n,d})_{K(d)}`` exactly, from the integer Gram matrix."""
    idx = face_index(K.n, K.d + 1)
    cols = [idx[f] for f in K.top_faces]
    g = kernel(K.n, K.d).gram[cols][:, cols].toarray().astype(int).tolist()
    return Fraction(bareiss_det(g), K.n ** len(cols))


# -- enumeration ---------------------------------------------------------------

@dataclass(frozen=True)
class HypertreeRecord:
    """One enumerated hypertree: bit ``j`` of ``mask`` is the j-th top face in colex order."""

    n: int
    d: int
    mask: int
    order: int
    weight: Fraction

    @property
    def complex(self) -> Complex:
        ground = faces(self.n, self.d + 1)
        return Complex(self.n, self.d, tuple(ground[j] for j in range(len(ground)) if self.mask >> j & 1))


def candidate_count(n: int, d: int) -> int:
    return comb(comb(n, d + 1), comb(n - 1, d))


def _columns(n: int, d: int) -> list[list[int]]:
    return incidence(n, d).matrix.T.toarray().astype(int).tolist()


def _cover_masks(n: int, d: int) -> list[int]:
    """For each (d-1)-face, the bitmask of top faces containing it."""
    I = incidence(n, d).matrix.tocsr()
    out = []
    for r in range(I.shape[0]):
        m = 0
        for j in I.indices[I.indptr[r]:I.indptr[r + 1]]:
            m |= 1 << int(j)
        out.append(m)
    return out


def _scan_range(args: tuple[int, int, int, int]) -> list[tuple[int, int]]:
    n, d, start, stop = args
    universe, k = comb(n, d + 1), comb(n - 1, d)
    cols = _columns(n, d)
    covers = _cover_masks(n, d)
    out = []
    for mask in colex_masks(universe, k, start, stop):
        # purity: a hypertree covers every (d-1)-face, else H_{d-1} has a free part
        if not all(mask & c for c in covers):
            continue
        chosen = [cols[j] for j in range(universe) if mask >> j & 1]
        rows = [list(r) for r in zip(*chosen)]
        h = _order_from_diag(_diagonalize(rows), k)
        if h != math.inf:
            out.append((mask, h))
    return out


def hypertree_records(n: int, d: int, caps: Caps | None = None, threads: int = 1,
                      parts: int = 64) -> list[HypertreeRecord]:
    """All hypertrees on [n] of dimension d, in colex order of their face sets.

    The candidate range is cut into ``parts`` fixed rank intervals, so the
    output does not depend on ``threads``.
    """
    if d < 1 or n < d + 1:
        raise InvalidInput("need 1 <= d < n")
    caps = caps or default_caps()
    total = candidate_count(n, d)
    if total > caps.enumeration:
        raise CapacityError("hypertree enumeration candidates", total, caps.enumeration)
    step = max(1, -(-total // parts))
    jobs = [(n, d, lo, min(lo + step, total)) for lo in range(0, total, step)]
    if threads > 1 and len(jobs) > 1:
        with mp.get_context("fork").Pool(threads) as pool:
            chunks = pool.map(_scan_range, jobs)
    else:
        chunks = [_scan_range(j) for j in jobs]
    denom = kalai_total(n, d)
    return [HypertreeRecord(n, d, m, h, Fraction(h * h, denom)) for chunk in chunks for m, h in chunk]


def enumerate_hypertrees(n: int, d: int, caps: Caps | None = None,
                         threads: int = 1) -> Iterator[tuple[Complex, Fraction]]:
    """Yield ``(hypertree, weight)`` over all hypertrees on [n]."""
    for rec in hypertree_records(n, d, caps, threads):
        yield rec.complex, rec.weight


def write_records_csv(records: Sequence[HypertreeRecord], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mask", "order", "weight_num", "weight_den"])
        for r in records:
            w.writerow([r.mask, r.order, r.weight.numerator, r.weight.denominator])
