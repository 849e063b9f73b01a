"""Slow, direct reference implementations used only by the tests.

They deliberately avoid the package's algorithms (no echelon bases, no Gray
codes, no colex tables) so agreement is evidence rather than tautology.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np


def faces_of(n: int, size: int) -> list[tuple[int, ...]]:
    return list(combinations(range(1, n + 1), size))


def level_faces(n: int, d: int, tops, i: int) -> list[tuple[int, ...]]:
    """The i-faces under the complete-skeleton convention."""
    return sorted(tops) if i == d else faces_of(n, i + 1)


def weights(n: int, d: int, tops, i: int) -> dict:
    """Weight of each i-face computed straight from the definition."""
    tops = list(tops)
    denom = comb(d + 1, i + 1) * len(tops)
    return {s: Fraction(sum(set(s) <= set(t) for t in tops), denom) for s in level_faces(n, d, tops, i)}


def brute_expansion(n: int, d: int, tops, i: int, augmented: bool = True):
    """h_i by enumerating every i-cochain, every coboundary, and every coset.

    Returns a Fraction, or ``inf`` when every i-cochain is a coboundary (or
    every non-coboundary coset has norm zero).
    """
    tops = sorted(tops)
    lo = level_faces(n, d, tops, i)
    hi = level_faces(n, d, tops, i + 1)
    wl, wh = weights(n, d, tops, i), weights(n, d, tops, i + 1)
    L = len(lo)
    pos = {s: j for j, s in enumerate(lo)}

    def delta_mask(mask: int) -> int:
        out = 0
        for r, tau in enumerate(hi):
            par = 0
            for sub in combinations(tau, i + 1):
                par ^= (mask >> pos[sub]) & 1
            if par:
                out |= 1 << r
        return out

    # the coboundary space B^i, listed element by element
    if i == 0:
        B = {0, (1 << L) - 1} if augmented else {0}
    else:
        below = faces_of(n, i)
        gens = []
        for s in below:
            m = 0
            for j, tau in enumerate(lo):
                if set(s) <= set(tau):
                    m |= 1 << j
            gens.append(m)
        B = {0}
        for g in gens:
            B |= {b ^ g for b in B}
    norm_lo = np.zeros(1 << L, dtype=object)
    wvec = [wl[s] for s in lo]
    for mask in range(1 << L):
        norm_lo[mask] = sum((wvec[j] for j in range(L) if mask >> j & 1), Fraction(0))
    wh_vec = [wh[t] for t in hi]
    best = None
    seen = set()
    for f in range(1 << L):
        if f in B or f in seen:
            continue
        coset = [f ^ b for b in B]
        seen.update(coset)
        cnorm = min(norm_lo[g] for g in coset)
        if cnorm == 0:
            continue
        dm = delta_mask(f)
        dnorm = sum((wh_vec[r] for r in range(len(hi)) if dm >> r & 1), Fraction(0))
        ratio = dnorm / cnorm
        if best is None or ratio < best:
            best = ratio
    return float("inf") if best is None else best


def brute_skeleton_alpha(n: int, d: int, tops, iterations: int = 80) -> Fraction:
    """Binary search on alpha, checking the defining inequality for every vertex set."""
    wv = weights(n, d, tops, 0)
    we = weights(n, d, tops, 1)
    subsets = []
    for r in range(1, n + 1):
        for A in combinations(range(1, n + 1), r):
            a = sum(wv[(v,)] for v in A)
            e = sum(we.get(x, 0) for x in combinations(A, 2))
            subsets.append((a, e))

    def holds(alpha: Fraction) -> bool:
        return all(e <= 4 * (a * a + alpha * a) for a, e in subsets)

    lo, hi = Fraction(0), Fraction(1)
    if holds(lo):
        return lo
    while not holds(hi):
        hi *= 2
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def spanning_trees(n: int) -> list[frozenset]:
    """All spanning trees of K_n as edge sets, by union-find over (n-1)-edge subsets."""
    edges = faces_of(n, 2)
    out = []
    for sub in combinations(edges, n - 1):
        parent = list(range(n + 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for a, b in sub:
            ra, rb = find(a), find(b)
            if ra == rb:
                ok = False
                break
            parent[ra] = rb
        if ok:
            out.append(frozenset(sub))
    return out


def f2_rank(rows: np.ndarray) -> int:
    """Rank over F2 of a 0/1 matrix by dense elimination."""
    a = (np.asarray(rows, dtype=np.uint8) & 1).copy()
    r = 0
    for c in range(a.shape[1] if a.ndim == 2 else 0):
        piv = np.flatnonzero(a[r:, c])
        if not len(piv):
            continue
        p = r + piv[0]
        a[[r, p]] = a[[p, r]]
        rows_to_clear = np.flatnonzero(a[:, c])
        rows_to_clear = rows_to_clear[rows_to_clear != r]
        a[rows_to_clear] ^= a[r]
        r += 1
        if r == a.shape[0]:
            break
    return r


def dpp_outcome_law(Q: np.ndarray) -> dict[frozenset, float]:
    """P(X = S) = |det(Q - I_{complement of S})| for every subset S."""
    m = len(Q)
    out = {}
    for mask in range(1 << m):
        S = frozenset(j for j in range(m) if mask >> j & 1)
        M = Q.copy()
        for j in range(m):
            if j not in S:
                M[j, j] -= 1.0
        out[S] = abs(float(np.linalg.det(M)))
    return out


def poisson_binomial_brute(probs) -> np.ndarray:
    probs = list(probs)
    pmf = np.zeros(len(probs) + 1)
    for mask in range(1 << len(probs)):
        p = 1.0
        for j, q in enumerate(probs):
            p *= q if mask >> j & 1 else 1 - q
        pmf[bin(mask).count("1")] += p
    return pmf


def signed_boundary(n: int, d: int, tops) -> list[list[int]]:
    """d_d with rows the d-subsets in lexicographic order, sign (-1)^i for dropping the i-th vertex."""
    rows = faces_of(n, d)
    rpos = {s: j for j, s in enumerate(rows)}
    M = [[0] * len(tops) for _ in rows]
    for c, t in enumerate(tops):
        for i in range(len(t)):
            M[rpos[t[:i] + t[i + 1:]]][c] = (-1) ** i
    return M


# A 6-vertex triangulation of the real projective plane.
RP2 = ((1, 2, 3), (1, 2, 6), (1, 3, 4), (1, 4, 5), (1, 5, 6),
       (2, 3, 5), (2, 4, 5), (2, 4, 6), (3, 4, 6), (3, 5, 6))
