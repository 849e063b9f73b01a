"""Hypertree kernels P_{n,d,l} and samplers for T_{n,d,l} and their unions.

Ground sets are the (d+1)-subsets of [n] in colex order (see
:mod:`hypertrees.combinatorics`).  ``P_{n,d} = I^T I / n`` for the signed
incidence ``I`` between d-subsets and (d+1)-subsets, and
``P_{n,d,l} = n/(n+l) P_{n,d} + l/(n+l) Id``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb, sqrt
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .combinatorics import Face, boundary_ranks, colex_rank, face_index, faces
from .complex import Complex, check_face
from .config import Caps, default_caps
from .detproc import (
    CHUNK,
    PositiveContraction,
    child_seed,
    projection_chain_batch,
    projection_chain_compiled,
    projection_chain_sparse,
    rng_for,
    sample_batch,
)
from .errors import CapacityError, InvalidInput

BACKENDS = ("kernel", "percolation")
#: ground-set size up to which projection draws use the batched dense chain
CHAIN_METHODS = ("dense", "compiled", "sparse")
#: above this many (columns x rank) of the factor the blocked BLAS chain wins
COMPILED_CHAIN_MAX = 600_000


@dataclass(frozen=True)
class SignedIncidence:
    """``I_{n,d}``: rows are d-subsets, columns (d+1)-subsets, entries in {-1, 0, 1}."""

    n: int
    d: int
    matrix: sp.csc_matrix

    @property
    def rows(self) -> tuple[Face, ...]:
        return faces(self.n, self.d)

    @property
    def cols(self) -> tuple[Face, ...]:
        return faces(self.n, self.d + 1)

    def entry(self, tau: Sequence[int], sigma: Sequence[int]) -> int:
        return int(self.matrix[colex_rank(tau), colex_rank(sigma)])


def _check_nd(n: int, d: int) -> None:
    if not 1 <= d < n:
        raise InvalidInput(f"need 1 <= d < n, got n={n}, d={d}")


@lru_cache(maxsize=32)
def incidence(n: int, d: int) -> SignedIncidence:
    """Column sigma = {x_0 < ... < x_d} has (-1)^i in row sigma minus x_i."""
    _check_nd(n, d)
    m = comb(n, d + 1)
    bnd = boundary_ranks(n, d + 1)
    signs = np.where(np.arange(d + 1) % 2 == 0, 1, -1)
    data = np.tile(signs, m)
    rows = bnd.ravel()
    cols = np.repeat(np.arange(m), d + 1)
    mat = sp.csc_matrix((data.astype(np.int64), (rows, cols)), shape=(comb(n, d), m))
    return SignedIncidence(n, d, mat)


def pair_sign(sigma: Sequence[int], tau: Sequence[int]) -> int:
    """J(sigma, tau) = I(sigma & tau, sigma) * I(sigma & tau, tau)."""
    s, t = tuple(sigma), tuple(tau)
    if len(s) != len(t):
        raise InvalidInput("faces must have the same dimension")
    common = set(s) & set(t)
    if len(common) != len(s) - 1:
        raise InvalidInput(f"{s} and {t} do not share a codimension-one face")
    (a,) = set(s) - common
    (b,) = set(t) - common
    return (-1) ** (s.index(a) + t.index(b))


class HypertreeKernel:
    """The kernel P_{n,d,l}, applied through the sparse incidence factor."""

    def __init__(self, n: int, d: int, ell: int = 0):
        _check_nd(n, d)
        if ell < 0:
            raise InvalidInput("l must be non-negative")
        self.n, self.d, self.ell = n, d, ell
        self.inc = incidence(n, d)

    @property
    def ground(self) -> tuple[Face, ...]:
        return faces(self.n, self.d + 1)

    def __len__(self) -> int:
        return comb(self.n, self.d + 1)

    @property
    def rank(self) -> int:
        """Rank of the projection part, C(n-1, d)."""
        return comb(self.n - 1, self.d)

    @property
    def diagonal_value(self) -> Fraction:
        return Fraction(self.d + 1 + self.ell, self.n + self.ell)

    @property
    def percolation_probability(self) -> Fraction:
        return Fraction(self.ell, self.n + self.ell)

    def eigenvalues(self) -> dict[Fraction, int]:
        """Spectrum with multiplicities: 1 on coboundaries, l/(n+l) elsewhere."""
        spectrum = {Fraction(1): self.rank}
        rest = len(self) - self.rank
        if rest:
            lo = self.percolation_probability
            spectrum[lo] = spectrum.get(lo, 0) + rest
        return spectrum

    def entry(self, sigma: Sequence[int], tau: Sequence[int]) -> Fraction:
        """Entry from the closed form."""
        s, t = tuple(sigma), tuple(tau)
        denom = self.n + self.ell
        if s == t:
            return Fraction(self.d + 1 + self.ell, denom)
        if len(set(s) & set(t)) == self.d:
            return Fraction(pair_sign(s, t), denom)
        return Fraction(0)

    @cached_property
    def gram(self) -> sp.csr_matrix:
        """Integer matrix I^T I (so that P_{n,d} = gram / n)."""
        I = self.inc.matrix
        return sp.csr_matrix(I.T @ I)

    @cached_property
    def factor(self) -> sp.csr_matrix:
        """Sparse F with F F^T = P_{n,d}: F = I^T / sqrt(n)."""
        return sp.csr_matrix(self.inc.matrix.T.astype(float) / sqrt(self.n))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        I = self.inc.matrix
        proj = I.T @ (I @ x) / self.n
        return (self.n * proj + self.ell * x) / (self.n + self.ell)

    def dense(self) -> np.ndarray:
        g = self.gram.toarray().astype(float)
        return (g + self.ell * np.eye(len(self))) / (self.n + self.ell)

    def exact_matrix(self) -> list[list[Fraction]]:
        g = self.gram.toarray()
        denom = self.n + self.ell
        m = len(self)
        return [[Fraction(int(g[i, j]) + (self.ell if i == j else 0), denom) for j in range(m)] for i in range(m)]

    def contraction(self, exact: bool = False, caps: Caps | None = None) -> PositiveContraction:
        caps = caps or default_caps()
        if len(self) > caps.dense:
            raise CapacityError("dense hypertree kernel", len(self), caps.dense)
        mat = self.exact_matrix() if exact else self.dense()
        return PositiveContraction(mat, self.ground, exact=exact)

    def submatrix_exact(self, cols: Sequence[int]) -> list[list[Fraction]]:
        """Exact principal submatrix on ground positions ``cols``."""
        g = self.gram[cols][:, cols].toarray()
        denom = self.n + self.ell
        k = len(cols)
        return [[Fraction(int(g[i, j]) + (self.ell if i == j else 0), denom) for j in range(k)] for i in range(k)]


def kernel(n: int, d: int, ell: int = 0) -> HypertreeKernel:
    return HypertreeKernel(n, d, ell)


# -- sampling ----------------------------------------------------------------------

def _projection_draws(K: HypertreeKernel, count: int, seed: int, method: str | None = None) -> np.ndarray:
    """``count`` draws of T_{n,d} as a (count, m) indicator matrix."""
    m = len(K)
    if method is None:
        method = "compiled" if K.factor.shape[1] * K.rank <= COMPILED_CHAIN_MAX else "sparse"
    out = np.zeros((count, m), dtype=bool)
    if method == "dense":
        F = K.factor.toarray()
        for c, lo in enumerate(range(0, count, CHUNK)):
            b = min(CHUNK, count - lo)
            out[lo:lo + b] = projection_chain_batch(F, np.full(b, K.rank), rng_for(seed, c))
    elif method in ("sparse", "compiled"):
        chain = projection_chain_sparse if method == "sparse" else projection_chain_compiled
        F = K.factor
        for r in range(count):
            out[r, chain(F, K.rank, rng_for(seed, 0, r))] = True
    else:
        raise InvalidInput(f"unknown chain method {method!r}")
    return out


def sample_hypertree_batch(n: int, d: int, ell: int, count: int, seed: int,
                           backend: str = "percolation", method: str | None = None) -> np.ndarray:
    """Indicator matrix ``(count, C(n, d+1))`` of draws of T_{n,d,l}.

    ``backend="kernel"`` runs the generic determinantal sampler on the dense
    kernel P_{n,d,l}.  ``backend="percolation"`` draws T_{n,d} with the
    projection chain and adds every absent face independently with
    probability l/(n+l).
    """
    K = HypertreeKernel(n, d, ell)
    if backend == "kernel":
        return sample_batch(K.contraction(), count, seed).indicators
    if backend != "percolation":
        raise InvalidInput(f"backend must be one of {BACKENDS}")
    ind = _projection_draws(K, count, seed, method)
    if ell:
        q = ell / (n + ell)
        extra = np.zeros_like(ind)
        for c, lo in enumerate(range(0, count, CHUNK)):
            b = min(CHUNK, count - lo)
            extra[lo:lo + b] = rng_for(seed, 1 << 20, c).random((b, len(K))) < q
        ind |= extra
    return ind


def indicator_to_complex(n: int, d: int, row: np.ndarray) -> Complex:
    ground = faces(n, d + 1)
    return Complex(n, d, tuple(ground[j] for j in np.flatnonzero(row)))


def complex_to_indicator(K: Complex) -> np.ndarray:
    out = np.zeros(comb(K.n, K.d + 1), dtype=bool)
    idx = face_index(K.n, K.d + 1)
    for f in K.top_faces:
        out[idx[f]] = True
    return out


def sample_hypertree(n: int, d: int, ell: int = 0, seed: int = 0, backend: str = "percolation",
                     method: str | None = None) -> Complex:
    """One draw of T_{n,d,l} as a :class:`Complex`."""
    row = sample_hypertree_batch(n, d, ell, 1, seed, backend, method)[0]
    return indicator_to_complex(n, d, row)


@dataclass(frozen=True)
class UnionDraw:
    complex: Complex
    copies: tuple[tuple[Face, ...], ...]     # the labeled X^Sigma view, copy by copy


def sample_union_batch(n: int, d: int, ell: int, k: int, count: int, seed: int,
                       backend: str = "percolation", method: str | None = None) -> np.ndarray:
    """Indicators of shape ``(count, k, C(n, d+1))``; copy j uses seed hash(seed, j)."""
    if k < 1:
        raise InvalidInput("k must be at least 1")
    return np.stack(
        [sample_hypertree_batch(n, d, ell, count, child_seed(seed, j), backend, method) for j in range(k)],
        axis=1,
    )


def sample_union_complex(n: int, d: int, ell: int = 0, k: int = 1, seed: int = 0,
                         backend: str = "percolation", method: str | None = None) -> UnionDraw:
    """K_{n,d,k} (or T^cup_{n,d,l}) with its per-copy face lists."""
    ind = sample_union_batch(n, d, ell, k, 1, seed, backend, method)[0]
    ground = faces(n, d + 1)
    copies = tuple(tuple(ground[j] for j in np.flatnonzero(row)) for row in ind)
    return UnionDraw(indicator_to_complex(n, d, ind.any(axis=0)), copies)


# -- structural identities -------------------------------------------------------

def submatrix_reduction_check(n: int, d: int, ell1: int, ell2: int) -> bool:
    """Principal submatrix of P_{n,d,l1} on faces containing the last l2 vertices
    equals P_{n-l2, d-l2, l1+l2} after stripping those vertices (exact)."""
    if not 0 <= ell2 <= d:
        raise InvalidInput("need 0 <= l2 <= d")
    big = HypertreeKernel(n, d, ell1)
    tail = tuple(range(n - ell2 + 1, n + 1))
    small_n, small_d = n - ell2, d - ell2
    if ell2 == 0:
        return True
    if small_d == 0:
        # the reduced ground set is [n - l2] as singletons: P_{m,0,l} has
        # diagonal (1+l)/(m+l) and off-diagonal +-1/(m+l) for two vertices sharing the empty face
        small_faces = faces(small_n, 1)
        small_entry = _zero_dim_entry(small_n, ell1 + ell2)
    else:
        small = HypertreeKernel(small_n, small_d, ell1 + ell2)
        small_faces = small.ground
        small_entry = small.entry
    cols = [colex_rank(tau + tail) for tau in small_faces]
    sub = big.submatrix_exact(cols)
    for a, s in enumerate(small_faces):
        for b, t in enumerate(small_faces):
            if sub[a][b] != small_entry(s, t):
                return False
    return True


def _zero_dim_entry(m: int, ell: int):
    def entry(s, t):
        if s == t:
            return Fraction(1 + ell, m + ell)
        # I_{m,0}: the empty face with coefficient (-1)^0 = 1 in every column
        return Fraction(1, m + ell)

    return entry


def faces_containing(n: int, d: int, sigma: Sequence[int]) -> np.ndarray:
    """Ground positions of the (d+1)-subsets containing ``sigma``."""
    s = check_face(sigma, n)
    ground = faces(n, d + 1)
    ss = set(s)
    return np.array([j for j, f in enumerate(ground) if ss.issubset(f)], dtype=np.int64)
