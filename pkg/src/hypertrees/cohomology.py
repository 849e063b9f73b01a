"""F2 coboundaries, coset norms, minimal cochains and coboundary expansion.

Conventions
-----------
Cochains in dimension ``i`` are indexed by the positions of ``K.faces(i)``.
By default the degree-0 coboundary space is augmented, ``B^0 = {0, 1}``
(the image of the augmentation map), so that expansion in degree 0 is the
normalized Cheeger constant of the 1-skeleton and ``H^0`` is reduced
cohomology.  Pass ``augmented=False`` for ``B^0 = {0}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator

import numpy as np

from .combinatorics import boundary_ranks, colex_rank
from .complex import Cochain, Complex, norm
from .config import Caps, default_caps
from .errors import CapacityError, InvalidDimension, InvalidInput, UndefinedWeight
from .f2 import EchelonBasis, F2Matrix, bits

# max number of bool cells materialized at once by the vectorized scans
_CHUNK_CELLS = 1 << 23


@dataclass(frozen=True)
class CosetSummary:
    representative: Cochain
    coset_norm: Fraction
    delta_norm: Fraction


@dataclass(frozen=True)
class ExpansionResult:
    i: int
    value: Fraction | float
    witness: Cochain | None
    cosets: int


# -- matrices ----------------------------------------------------------------

def _target_boundaries(K: Complex, j: int) -> np.ndarray:
    """Positions of the (j-1)-subfaces of each j-face of K, shape (|K(j)|, j+1)."""
    if j < K.d:
        return boundary_ranks(K.n, j + 1)
    if not len(K):
        return np.zeros((0, j + 1), dtype=np.int64)
    top = K.top_array
    out = np.empty((len(K), j + 1), dtype=np.int64)
    for drop in range(j + 1):
        keep = [c for c in range(j + 1) if c != drop]
        out[:, drop] = [colex_rank(row) for row in top[:, keep].tolist()]
    return out


def coboundary_matrix(K: Complex, i: int, augmented: bool = True) -> F2Matrix:
    """Matrix of delta_i: rows are (i+1)-faces, bits are i-face positions."""
    if i >= K.d:
        raise InvalidDimension(f"delta_{i} is not defined on a {K.d}-complex")
    targets = K.faces(i + 1)
    if i == -1:
        rows = [1 if augmented else 0] * len(targets)
        return F2Matrix(rows, 1, targets, ((),))
    bnd = _target_boundaries(K, i + 1)
    rows = [sum(1 << int(c) for c in r) for r in bnd.tolist()]
    return F2Matrix(rows, len(K.faces(i)), targets, K.faces(i))


def to_bits(K: Complex, f: Cochain) -> int:
    v = 0
    for s in f.support:
        pos = K.face_position(f.i, s)
        if pos is None:
            raise InvalidInput(f"face {s} is not an {f.i}-face of the complex")
        v |= 1 << pos
    return v


def from_bits(K: Complex, i: int, v: int) -> Cochain:
    fs = K.faces(i)
    return Cochain(i, frozenset(fs[j] for j in bits(v)))


def _to_bool(K: Complex, f: Cochain) -> np.ndarray:
    out = np.zeros(len(K.faces(f.i)), dtype=bool)
    for s in f.support:
        pos = K.face_position(f.i, s)
        if pos is None:
            raise InvalidInput(f"face {s} is not an {f.i}-face of the complex")
        out[pos] = True
    return out


def coboundary(K: Complex, f: Cochain) -> Cochain:
    """delta f: the (i+1)-faces of K with an odd number of i-subfaces in supp f."""
    if f.i >= K.d:
        raise InvalidDimension(f"delta_{f.i} is not defined on a {K.d}-complex")
    if f.i < 0:
        raise InvalidDimension("cochains start in dimension 0")
    vec = _to_bool(K, f)
    bnd = _target_boundaries(K, f.i + 1)
    odd = vec[bnd].sum(axis=1) & 1
    targets = K.faces(f.i + 1)
    return Cochain(f.i + 1, frozenset(targets[j] for j in np.flatnonzero(odd)))


# -- coboundary spaces -------------------------------------------------------

def _reduced_basis(K: Complex, i: int, augmented: bool) -> list[tuple[int, int]]:
    cache = K.__dict__.setdefault("_basis_cache", {})
    key = (i, augmented)
    if key not in cache:
        if i == 0:
            gens = [(1 << len(K.faces(0))) - 1] if augmented and len(K.faces(0)) else []
        else:
            gens = coboundary_matrix(K, i - 1).transpose().rows
        cache[key] = EchelonBasis(gens).reduced()
    return cache[key]


def coboundary_space_basis(K: Complex, i: int, augmented: bool = True) -> list[Cochain]:
    """An F2 basis of B^i = im delta_{i-1}, in reduced echelon form."""
    if not 0 <= i <= K.d:
        raise InvalidDimension(f"B^{i} is not defined on a {K.d}-complex")
    return [from_bits(K, i, row) for _, row in _reduced_basis(K, i, augmented)]


def _rank_delta(K: Complex, i: int, augmented: bool, limit: int | None = None) -> int:
    if i == -1:
        return 1 if augmented and len(K.faces(0)) else 0
    return coboundary_matrix(K, i).rank(limit)


def f2_cohomology_dim(K: Complex, i: int, augmented: bool = True) -> int:
    """dim H^i(K; F2) = dim ker delta_i - rank delta_{i-1}."""
    if not 0 <= i <= K.d - 1:
        raise InvalidDimension(f"H^{i} is only computed for 0 <= i <= d-1")
    dim_c = len(K.faces(i))
    below = _rank_delta(K, i - 1, augmented)
    # im delta_{i-1} lies in ker delta_i, so rank delta_i <= dim_c - below
    here = _rank_delta(K, i, augmented, limit=dim_c - below)
    return dim_c - here - below


# -- exhaustive coset search ---------------------------------------------------

def _gray_minima(states: np.ndarray, basis_idx: list[np.ndarray], w: np.ndarray):
    """Walk every state through its coset span(basis) in Gray-code order.

    Returns the minimal weighted support size reached from each state and the
    Gray step index ``t`` achieving it (the coset element is
    ``state ^ XOR{basis[j] : bit j of t ^ (t >> 1)}``).
    """
    state = states.copy()
    cur = state.astype(np.int64) @ w
    best = cur.copy()
    best_t = np.zeros(len(state), dtype=np.int64)
    wsum = [int(w[idx].sum()) for idx in basis_idx]
    for t in range(1, 1 << len(basis_idx)):
        j = (t & -t).bit_length() - 1
        idx = basis_idx[j]
        old = state[:, idx]
        # flipping bits: set ones lose weight, unset ones gain it
        cur += wsum[j] - 2 * (old.astype(np.int64) @ w[idx])
        state[:, idx] = ~old
        better = cur < best
        if better.any():
            best[better] = cur[better]
            best_t[better] = t
    return best, best_t


def _gray_element(t: int, basis_rows: list[int]) -> int:
    g = t ^ (t >> 1)
    v = 0
    for j in bits(g):
        v ^= basis_rows[j]
    return v


def _bool_rows(values: np.ndarray, positions: list[int], width: int) -> np.ndarray:
    """Bool matrix whose row r has bit positions[k] set iff bit k of values[r]."""
    out = np.zeros((len(values), width), dtype=bool)
    for k, p in enumerate(positions):
        out[:, p] = (values >> k) & 1
    return out


def coset_min_norm(K: Complex, f: Cochain, caps: Caps | None = None, augmented: bool = True) -> CosetSummary:
    """Exact minimum of the norm over f + B^i, by Gray-code walk of the coset."""
    caps = caps or default_caps()
    if not len(K):
        raise UndefinedWeight("weights are undefined on a complex without top faces")
    i = f.i
    basis = [row for _, row in _reduced_basis(K, i, augmented)]
    r = len(basis)
    if r > caps.coset:
        raise CapacityError(f"coboundary space B^{i}", r, caps.coset)
    nb = len(K.faces(i))
    w = np.asarray(K.cover_counts(i), dtype=np.int64)
    start = to_bits(K, f)
    # enumerate the high basis vectors as start states, walk the low ones
    low = min(r, 14)
    high = basis[low:]
    combos = np.arange(1 << len(high), dtype=np.int64)
    starts = np.zeros((len(combos), nb), dtype=bool)
    starts[:, bits(start)] = True
    for k, row in enumerate(high):
        sel = ((combos >> k) & 1).astype(bool)
        starts[np.ix_(sel, bits(row))] ^= True
    low_idx = [np.array(bits(row), dtype=np.int64) for row in basis[:low]]
    best, best_t = _gray_minima(starts, low_idx, w)
    c = int(np.argmin(best))
    rep = start ^ _gray_element(int(best_t[c]), basis[:low])
    for k, row in enumerate(high):
        if (c >> k) & 1:
            rep ^= row
    rep_cochain = from_bits(K, i, rep)
    delta = norm(K, coboundary(K, f)) if i < K.d else Fraction(0)
    return CosetSummary(rep_cochain, Fraction(int(best[c]), K.weight_denominator(i)), delta)


def is_minimal(K: Complex, f: Cochain, caps: Caps | None = None, augmented: bool = True) -> bool:
    """True iff f has the least norm in its coset f + B^i."""
    if not f.support:
        return True
    return norm(K, f) == coset_min_norm(K, f, caps, augmented).coset_norm


@dataclass
class _CosetChunk:
    reps: np.ndarray        # quotient representatives (bool rows)
    delta: np.ndarray       # weighted |delta rep| numerators
    best: np.ndarray        # weighted coset minimum numerators
    best_t: np.ndarray      # Gray step reaching the minimum


def _coset_scan(
    K: Complex,
    i: int,
    w_src: np.ndarray,
    w_tgt: np.ndarray,
    augmented: bool,
    caps: Caps,
) -> Iterator[_CosetChunk]:
    """Enumerate every coset of B^i in C^i with its delta weight and min weight.

    Each coset has a unique representative supported off the pivot columns of
    the reduced echelon basis, so the quotient is enumerated by the subsets of
    the non-pivot coordinates.  delta is constant on cosets (delta o delta = 0),
    so it is evaluated once per representative.
    """
    nb = len(K.faces(i))
    if nb > caps.ambient:
        raise CapacityError(f"C^{i} dimension", nb, caps.ambient)
    red = _reduced_basis(K, i, augmented)
    if len(red) > caps.coset:
        raise CapacityError(f"coboundary space B^{i}", len(red), caps.coset)
    pivots = {p for p, _ in red}
    free = [j for j in range(nb) if j not in pivots]
    basis_idx = [np.array(bits(row), dtype=np.int64) for _, row in red]
    bnd = _target_boundaries(K, i + 1)
    live = np.flatnonzero(w_tgt)
    bnd = bnd[live]
    wt = np.asarray(w_tgt, dtype=np.int64)[live]
    total = 1 << len(free)
    per_rep = max(nb, bnd.size, 1)
    chunk = max(1, min(total, _CHUNK_CELLS // per_rep))
    for lo in range(0, total, chunk):
        vals = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        reps = _bool_rows(vals, free, nb)
        if len(bnd):
            delta = (reps[:, bnd].sum(axis=2) & 1).astype(np.int64) @ wt
        else:
            delta = np.zeros(len(vals), dtype=np.int64)
        best, best_t = _gray_minima(reps, basis_idx, w_src)
        yield _CosetChunk(reps, delta, best, best_t)


def expansion_result(K: Complex, i: int, caps: Caps | None = None, augmented: bool = True) -> ExpansionResult:
    """h_i(K) with a minimal witness cochain attaining it."""
    caps = caps or default_caps()
    if not 0 <= i <= K.d - 1:
        raise InvalidDimension(f"h_{i} is defined for 0 <= i <= d-1, d = {K.d}")
    if not len(K):
        raise UndefinedWeight("weights are undefined on a complex without top faces")
    w_src = np.asarray(K.cover_counts(i), dtype=np.int64)
    w_tgt = np.asarray(K.cover_counts(i + 1), dtype=np.int64)
    # ratio = (delta / W_{i+1}) / (coset / W_i)
    scale = Fraction(K.weight_denominator(i), K.weight_denominator(i + 1))
    best_val: Fraction | None = None
    best_wit = None
    cosets = 0
    red = _reduced_basis(K, i, augmented)
    basis_rows = [row for _, row in red]
    for ch in _coset_scan(K, i, w_src, w_tgt, augmented, caps):
        cosets += len(ch.reps)
        ok = ch.best > 0  # zero coset norm: f in B^i (or supported on uncovered faces)
        if not ok.any():
            continue
        ratio = ch.delta[ok] / ch.best[ok]
        lo = ratio.min()
        cand = np.flatnonzero(ok)[ratio <= lo * (1 + 1e-9) + 1e-300]
        for c in cand:
            val = Fraction(int(ch.delta[c]), int(ch.best[c])) * scale
            if best_val is None or val < best_val:
                rep = sum(1 << int(j) for j in np.flatnonzero(ch.reps[c]))
                rep ^= _gray_element(int(ch.best_t[c]), basis_rows)
                best_val, best_wit = val, rep
    if best_val is None:
        return ExpansionResult(i, math.inf, None, cosets)
    return ExpansionResult(i, best_val, from_bits(K, i, best_wit), cosets)


def expansion_constant(K: Complex, i: int, caps: Caps | None = None, augmented: bool = True) -> Fraction | float:
    """Exact h_i(K); ``math.inf`` when every i-cochain is a coboundary."""
    return expansion_result(K, i, caps, augmented).value


def coboundary_expansion(K: Complex, caps: Caps | None = None, augmented: bool = True) -> Fraction | float:
    """h(K) = min over 0 <= i <= d-1 of h_i(K)."""
    return min(expansion_constant(K, i, caps, augmented) for i in range(K.d))


@dataclass(frozen=True)
class MeshulamWallachScan:
    n: int
    i: int
    passed: bool
    cosets: int
    worst_margin: Fraction | None   # min of |delta A| (i+2) / (n |A|) over minimal A != 0
    witness: Cochain | None


def meshulam_wallach_scan(n: int, i: int, caps: Caps | None = None, augmented: bool = True) -> MeshulamWallachScan:
    """Check |delta A| >= |A| n / (i+2) for every minimal A of the full simplex."""
    caps = caps or default_caps()
    if n > 7:
        raise CapacityError("Meshulam-Wallach exhaustive check vertex count", n, 7)
    if not 0 <= i <= n - 2:
        raise InvalidInput(f"need 0 <= i <= n-2, got i={i}, n={n}")
    K = Complex.complete(n, i + 1)
    ones_src = np.ones(comb(n, i + 1), dtype=np.int64)
    ones_tgt = np.ones(comb(n, i + 2), dtype=np.int64)
    basis_rows = [row for _, row in _reduced_basis(K, i, augmented)]
    worst = None
    wit = None
    passed = True
    cosets = 0
    for ch in _coset_scan(K, i, ones_src, ones_tgt, augmented, caps):
        cosets += len(ch.reps)
        ok = ch.best > 0
        lhs = ch.delta[ok] * (i + 2)
        rhs = ch.best[ok] * n
        if np.any(lhs < rhs):
            passed = False
        if ok.any():
            margin = lhs / rhs
            c = np.flatnonzero(ok)[int(np.argmin(margin))]
            val = Fraction(int(ch.delta[c]) * (i + 2), int(ch.best[c]) * n)
            if worst is None or val < worst:
                rep = sum(1 << int(j) for j in np.flatnonzero(ch.reps[c]))
                rep ^= _gray_element(int(ch.best_t[c]), basis_rows)
                worst, wit = val, from_bits(K, i, rep)
    return MeshulamWallachScan(n, i, passed, cosets, worst, wit)


def meshulam_wallach_check(n: int, i: int, caps: Caps | None = None, augmented: bool = True) -> bool:
    return meshulam_wallach_scan(n, i, caps, augmented).passed
