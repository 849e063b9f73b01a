"""Finite determinantal processes.

A :class:`PositiveContraction` is a symmetric kernel ``Q`` with spectrum in
[0, 1]; its determinantal process ``X`` satisfies ``P(A <= X) = det Q_A``.

Sampling follows the spectral recipe: keep eigenvector ``v_j`` with
probability ``lambda_j``, then run the projection chain on the kept
projection.  The chain is written in terms of a factor ``F`` with
``P = F F^T``: each element ``e`` has a row vector ``f_e`` and is picked with
probability proportional to the squared norm of ``f_e`` after projecting out
the rows already picked.  Two implementations share this contract:

* :func:`projection_chain_batch` runs many small draws at once (dense numpy);
* :func:`projection_chain_sparse` runs one large draw with a sparse factor,
  using blocked Gram-Schmidt and rejection against a stale upper bound so
  the heavy work happens in matrix-matrix products.

Randomness comes from counter-based Philox streams keyed by
``(seed, *keys)`` so results do not depend on batch scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import exp
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from numba import njit

from .errors import InvalidInput, NumericalFailure
from .exact import fraction_det

TOL = 1e-9
#: draws per RNG stream in batched sampling; fixed so results are scheduling independent
CHUNK = 4096
#: residual weights below this are treated as exactly zero by the chains
P_FLOOR = 1e-10
#: draws per chain call when every draw has its own factor
SUB_BATCH = 256
#: loss of orthogonality tolerated before a block is re-orthonormalized
ORTHO_TOL = 1e-9
ILL_CONDITIONED = 1e4


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), *keys])))


def child_seed(seed: int, *keys: int) -> int:
    """A 64-bit seed derived from ``(seed, *keys)``."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *keys])
    return int(ss.generate_state(1, np.uint64)[0])


class PositiveContraction:
    """Symmetric kernel with spectrum in [0, 1] on a labeled ground set.

    Passing a matrix of :class:`~fractions.Fraction` (or ``exact=True``) keeps
    an exact copy used by :func:`subset_probability`.
    """

    def __init__(self, kernel, ground: Sequence[Hashable] | None = None, *, exact: bool | None = None,
                 tol: float = TOL, validate: bool = True):
        rows = kernel.tolist() if isinstance(kernel, np.ndarray) and kernel.dtype == object else kernel
        if exact is None:
            exact = _is_fraction_matrix(rows)
        if exact:
            self.exact_matrix = [[Fraction(x) for x in row] for row in rows]
            self.matrix = np.array([[float(x) for x in row] for row in self.exact_matrix], dtype=float)
        else:
            self.exact_matrix = None
            self.matrix = np.array(kernel, dtype=float)
        m = self.matrix.shape[0] if self.matrix.ndim == 2 else -1
        if self.matrix.ndim != 2 or self.matrix.shape != (m, m):
            raise InvalidInput("kernel must be a square matrix")
        self.ground = tuple(range(m)) if ground is None else tuple(ground)
        if len(self.ground) != m or len(set(self.ground)) != m:
            raise InvalidInput("ground labels must be distinct and match the kernel size")
        self.index = {g: i for i, g in enumerate(self.ground)}
        self.tol = tol
        if validate:
            self.validate()

    @property
    def exact(self) -> bool:
        return self.exact_matrix is not None

    def __len__(self) -> int:
        return len(self.ground)

    def validate(self) -> None:
        if self.exact:
            q = self.exact_matrix
            if any(q[i][j] != q[j][i] for i in range(len(q)) for j in range(i)):
                raise InvalidInput("kernel is not symmetric")
        elif np.max(np.abs(self.matrix - self.matrix.T), initial=0.0) > self.tol:
            raise InvalidInput("kernel is not symmetric within tolerance")
        if len(self):
            lam = np.linalg.eigvalsh(self.matrix)
            if lam[0] < -self.tol or lam[-1] > 1 + self.tol:
                raise InvalidInput(f"spectrum [{lam[0]:.3g}, {lam[-1]:.3g}] is not inside [0, 1]")

    @cached_property
    def spectral(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues clamped to [0, 1] (ascending) and orthonormal eigenvectors."""
        lam, vec = np.linalg.eigh((self.matrix + self.matrix.T) / 2)
        lam = np.clip(lam, 0.0, 1.0)
        lam[lam < self.tol] = 0.0
        lam[lam > 1 - self.tol] = 1.0
        return lam, vec

    def positions(self, A: Iterable[Hashable]) -> list[int]:
        try:
            return [self.index[a] for a in A]
        except KeyError as exc:
            raise InvalidInput(f"{exc.args[0]!r} is not in the ground set") from None

    def submatrix(self, A: Iterable[Hashable]) -> np.ndarray:
        idx = self.positions(A)
        return self.matrix[np.ix_(idx, idx)]

    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()

    def exact_submatrix(self, A: Iterable[Hashable]) -> list[list[Fraction]]:
        if not self.exact:
            raise InvalidInput("kernel has no exact representation")
        idx = self.positions(A)
        return [[self.exact_matrix[i][j] for j in idx] for i in idx]


def _is_fraction_matrix(rows) -> bool:
    try:
        return any(isinstance(x, Fraction) for row in rows for x in row)
    except TypeError:
        return False


def subset_probability(Q: PositiveContraction, A: Iterable[Hashable], exact: bool | None = None):
    """P(A <= X) = det Q_A; a Fraction in exact mode, else a float."""
    A = list(A)
    if len(set(A)) != len(A):
        raise InvalidInput("subset has repeated elements")
    if exact is None:
        exact = Q.exact
    if exact:
        return fraction_det(Q.exact_submatrix(A))
    if not A:
        return 1.0
    det = float(np.linalg.det(Q.submatrix(A)))
    if det < -Q.tol:
        raise NumericalFailure(f"principal minor {det:.3g} is negative beyond tolerance")
    return max(det, 0.0)


# -- sampling ------------------------------------------------------------------

@dataclass
class SampleBatch:
    """Draws of a determinantal process, stored as an indicator matrix.

    With ``k`` copies, ``indicators`` has shape ``(draws, k, |E|)``.
    """

    seed: int
    ground: tuple
    indicators: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.indicators)

    @property
    def copies(self) -> int:
        return 1 if self.indicators.ndim == 2 else self.indicators.shape[1]

    @property
    def draws(self) -> list[frozenset]:
        ind = self.indicators if self.indicators.ndim == 2 else self.indicators.any(axis=1)
        g = self.ground
        return [frozenset(g[j] for j in np.flatnonzero(row)) for row in ind]

    def union(self) -> np.ndarray:
        """Indicators of X^cup (the union over copies)."""
        return self.indicators if self.indicators.ndim == 2 else self.indicators.any(axis=1)

    def labeled(self, r: int) -> list[tuple[int, Hashable]]:
        """Draw ``r`` of X^Sigma as (copy, element) pairs, copies numbered from 1."""
        ind = self.indicators[r]
        if ind.ndim == 1:
            ind = ind[None, :]
        return [(c + 1, self.ground[j]) for c in range(ind.shape[0]) for j in np.flatnonzero(ind[c])]


def _pick(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise categorical draw from unnormalized weights ``p`` with uniforms ``u``.

    Inverse CDF; the lowest index wins ties at a CDF boundary.
    """
    cs = np.cumsum(p, axis=1)
    target = u * cs[:, -1]
    s = (cs <= target[:, None]).sum(axis=1)
    last = p.shape[1] - 1 - np.argmax(p[:, ::-1] > 0, axis=1)
    return np.minimum(s, last)


def projection_chain_batch(F: np.ndarray, steps: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Run ``len(steps)`` independent projection chains.

    ``F`` is either a shared factor ``(m, N)`` or per-draw factors
    ``(B, m, N)``; draw ``b`` takes ``steps[b]`` elements from the projection
    ``F_b F_b^T``.  Returns a ``(B, m)`` bool indicator matrix.
    """
    steps = np.asarray(steps, dtype=np.int64)
    B = len(steps)
    shared = F.ndim == 2
    m, N = F.shape[-2:]
    out = np.zeros((B, m), dtype=bool)
    rmax = int(steps.max(initial=0))
    if rmax == 0:
        return out
    if shared:
        p = np.broadcast_to(np.einsum("mn,mn->m", F, F), (B, m)).copy()
    else:
        p = np.einsum("bmn,bmn->bm", F, F)
    U = np.zeros((B, rmax, N))
    rows = np.arange(B)
    for t in range(rmax):
        act = rows[steps > t]
        if len(act) == 0:
            break
        pa = p[act]
        pa[pa < P_FLOOR] = 0.0
        s = _pick(pa, rng.random(len(act)))
        out[act, s] = True
        f = F[s] if shared else F[act, s]
        Ua = U[act, :t]
        for _ in range(2):  # classical Gram-Schmidt, applied twice
            if t:
                f = f - np.einsum("btn,bt->bn", Ua, np.einsum("btn,bn->bt", Ua, f))
        f = f / np.linalg.norm(f, axis=1, keepdims=True)
        U[act, t] = f
        proj = f @ F.T if shared else np.einsum("bmn,bn->bm", F[act], f)
        pa = p[act] - proj * proj
        pa[np.arange(len(act)), s] = 0.0
        p[act] = pa
    return out


def projection_chain_sparse(F: sp.csr_matrix, rank: int, rng: np.random.Generator, block: int = 64) -> np.ndarray:
    """One draw of the projection process with kernel ``F F^T`` of the given rank.

    ``F`` is a sparse ``(m, N)`` factor with ``F F^T`` an orthogonal projection.
    The orthonormal basis ``U`` of the picked rows is extended in blocks of
    up to ``block`` vectors.  Inside a block, candidates are proposed from the
    residual weights at the block start (which only decrease) and accepted
    with probability current/stale; the current residual of a candidate needs
    only its few nonzero coordinates.  At the end of each block the new
    vectors are re-orthonormalized against ``U`` and the residual weights are
    refreshed with one sparse-dense product.  Returns the picked indices.
    """
    F = sp.csr_matrix(F)
    m, N = F.shape
    indptr, indices, data = F.indptr, F.indices, F.data
    p0 = np.asarray(F.multiply(F).sum(axis=1)).ravel()
    U = np.zeros((N, rank), order="F")
    chosen = np.zeros(m, dtype=bool)
    picked = []
    t0 = 0
    while t0 < rank:
        b = max(1, min(block, rank - t0, (rank - t0) // 2))
        p0[p0 < P_FLOOR] = 0.0
        p0[chosen] = 0.0
        cs = np.cumsum(p0)
        total = cs[-1]
        if total <= 0:
            raise NumericalFailure("projection chain ran out of mass before reaching its rank")
        last = int(np.flatnonzero(p0)[-1])
        Uo = U[:, :t0]
        A = np.zeros((t0, b))
        Tinv = np.zeros((b, b))
        Fb = np.zeros((N, b))
        worst = 0.0
        j = 0
        while j < b:
            u = rng.random(2)
            s = min(int(np.searchsorted(cs, u[0] * total, side="right")), last)
            if chosen[s]:
                continue
            idx = indices[indptr[s]:indptr[s + 1]]
            vals = data[indptr[s]:indptr[s + 1]]
            if j:
                # coordinates idx of the in-block basis vectors
                R = Fb[idx, :j] - (Uo[idx] @ A[:, :j] if t0 else 0.0)
                q = vals @ (R @ Tinv[:j, :j])
                ps = p0[s] - q @ q
            else:
                q = np.zeros(0)
                ps = p0[s]
            if ps < P_FLOOR or u[1] * p0[s] >= ps:
                continue
            worst = max(worst, (vals @ vals) / ps)
            nu = np.sqrt(ps)
            if t0:
                A[:, j] = Uo[idx].T @ vals
            Tinv[:j, j] = -(Tinv[:j, :j] @ q) / nu
            Tinv[j, j] = 1.0 / nu
            Fb[idx, j] = vals
            chosen[s] = True
            picked.append(s)
            j += 1
        R = Fb[:, :j] - (Uo @ A[:, :j] if t0 else 0.0)
        W = R @ Tinv[:j, :j]
        # W is orthonormal in exact arithmetic and classical Gram-Schmidt
        # drifts like eps * |f|^2 / residual, so the full check against U
        # runs periodically or after an ill-conditioned pick
        if t0 and (worst > ILL_CONDITIONED or (t0 // block) % 4 == 3):
            C = Uo.T @ W
            if np.abs(C).max() > ORTHO_TOL:
                W -= Uo @ C
        G = W.T @ W
        if np.abs(G - np.eye(j)).max() > ORTHO_TOL:
            W, _ = np.linalg.qr(W)
        U[:, t0:t0 + j] = W
        FW = F @ W
        p0 -= np.einsum("ij,ij->i", FW, FW)
        t0 += j
    return np.array(sorted(picked), dtype=np.int64)


@njit(cache=True)
def _compiled_chain(indptr, indices, data, ncols, rank, uniforms, floor):  # pragma: no cover - jitted
    m = len(indptr) - 1
    p = np.zeros(m)
    for e in range(m):
        acc = 0.0
        for k in range(indptr[e], indptr[e + 1]):
            acc += data[k] * data[k]
        p[e] = acc
    U = np.zeros((rank, ncols))
    picked = np.empty(rank, dtype=np.int64)
    for t in range(rank):
        total = 0.0
        last = -1
        for e in range(m):
            if p[e] < floor:
                p[e] = 0.0
            else:
                total += p[e]
                last = e
        if last < 0:
            return picked[:t]
        target = uniforms[t] * total
        acc = 0.0
        s = last
        for e in range(m):
            acc += p[e]
            if acc > target:
                s = e
                break
        if p[s] == 0.0:
            s = last
        picked[t] = s
        # f_s is sparse, so its coefficients on U are exact gathers
        c = np.zeros(t)
        for j in range(t):
            acc = 0.0
            for k in range(indptr[s], indptr[s + 1]):
                acc += U[j, indices[k]] * data[k]
            c[j] = acc
        if t:
            r = -np.dot(c, U[:t])
        else:
            r = np.zeros(ncols)
        for k in range(indptr[s], indptr[s + 1]):
            r[indices[k]] += data[k]
        nrm = 0.0
        for x in range(ncols):
            nrm += r[x] * r[x]
        nrm = np.sqrt(nrm)
        for x in range(ncols):
            U[t, x] = r[x] / nrm
        p[s] = 0.0
        for e in range(m):
            if p[e] > 0.0:
                q = 0.0
                for k in range(indptr[e], indptr[e + 1]):
                    q += data[k] * U[t, indices[k]]
                p[e] -= q * q
    return picked


def projection_chain_compiled(F: sp.csr_matrix, rank: int, rng: np.random.Generator) -> np.ndarray:
    """One draw of the projection process ``F F^T``, sequential and compiled.

    Same contract as :func:`projection_chain_sparse`; costs ``O(N t)`` per step
    with no interpreter overhead, which wins for ranks up to a few hundred.
    """
    F = sp.csr_matrix(F)
    u = rng.random(rank)
    picked = _compiled_chain(F.indptr.astype(np.int64), F.indices.astype(np.int64), F.data.astype(float),
                             F.shape[1], rank, u, P_FLOOR)
    if len(picked) < rank:
        raise NumericalFailure("projection chain ran out of mass before reaching its rank")
    return np.sort(picked)


def _draw_chunk(Q: PositiveContraction, count: int, rng: np.random.Generator) -> np.ndarray:
    lam, vec = Q.spectral
    keep = rng.random((count, len(lam))) < lam
    if np.all(lam[lam > 0] == 1.0):
        # a projection: every draw keeps the same eigenvectors
        return projection_chain_batch(vec[:, lam == 1.0], np.full(count, int((lam == 1.0).sum())), rng)
    steps = keep.sum(axis=1)
    out = np.zeros((count, len(lam)), dtype=bool)
    # fixed sub-batches bound memory; kept eigenvectors are packed to the left
    for lo in range(0, count, SUB_BATCH):
        kb = keep[lo:lo + SUB_BATCH]
        width = int(steps[lo:lo + SUB_BATCH].max(initial=0))
        order = np.argsort(~kb, axis=1, kind="stable")[:, :width]
        Fb = vec.T[order].transpose(0, 2, 1) * np.take_along_axis(kb, order, axis=1)[:, None, :]
        out[lo:lo + SUB_BATCH] = projection_chain_batch(Fb, steps[lo:lo + SUB_BATCH], rng)
    return out


def sample_batch(Q: PositiveContraction, count: int, seed: int, chunk: int = CHUNK) -> SampleBatch:
    """``count`` independent draws; chunk ``c`` uses the stream ``(seed, c)``."""
    parts = []
    for c, lo in enumerate(range(0, count, chunk)):
        parts.append(_draw_chunk(Q, min(chunk, count - lo), rng_for(seed, c)))
    ind = np.concatenate(parts) if parts else np.zeros((0, len(Q)), dtype=bool)
    return SampleBatch(seed, Q.ground, ind)


def sample(Q: PositiveContraction, seed: int) -> frozenset:
    """A single draw of the determinantal process of ``Q``."""
    return sample_batch(Q, 1, seed).draws[0]


def sample_union_batch(Q: PositiveContraction, k: int, count: int, seed: int) -> SampleBatch:
    """``count`` draws of k independent copies; copy ``j`` uses seed ``hash(seed, j)``."""
    if k < 1:
        raise InvalidInput("k must be at least 1")
    per_copy = [sample_batch(Q, count, child_seed(seed, j)).indicators for j in range(k)]
    ind = np.stack(per_copy, axis=1)
    return SampleBatch(seed, Q.ground, ind, {"k": k})


def sample_union(Q: PositiveContraction, k: int, seed: int) -> tuple[list[tuple[int, Hashable]], frozenset]:
    """One draw of (X^Sigma, X^cup) for k independent copies of X."""
    batch = sample_union_batch(Q, k, 1, seed)
    return batch.labeled(0), batch.draws[0]


# -- laws and bounds -----------------------------------------------------------

def poisson_binomial(probs: Iterable[float]) -> np.ndarray:
    """pmf of a sum of independent Bernoulli(p_i), by sequential convolution."""
    pmf = np.array([1.0])
    for p in probs:
        nxt = np.zeros(len(pmf) + 1)
        nxt[:-1] += pmf * (1 - p)
        nxt[1:] += pmf * p
        pmf = nxt
    return pmf


def count_law(Q: PositiveContraction, A: Iterable[Hashable]) -> np.ndarray:
    """Law of |X & A|: Poisson-binomial in the eigenvalues of Q_A."""
    A = list(A)
    if len(A) > 2000:
        raise InvalidInput("count_law supports |A| <= 2000")
    if not A:
        return np.array([1.0])
    lam = np.clip(np.linalg.eigvalsh(Q.submatrix(A)), 0.0, 1.0)
    return poisson_binomial(lam)


def bernstein_bound(mean: float, eps: float) -> float:
    """Upper bound 2 exp(-eps^2 mean / 4) on P(| |X&A| - mean | >= eps mean)."""
    if not 0 <= eps <= 1:
        raise InvalidInput("eps must lie in [0, 1]")
    if mean < 0:
        raise InvalidInput("mean must be non-negative")
    return 2.0 * exp(-eps * eps * mean / 4.0)


# -- matrix files ----------------------------------------------------------------

def read_matrix(path) -> PositiveContraction:
    """Read a kernel file: header ``N`` then ``N`` whitespace-separated rows.

    Entries written as ``p/q`` are parsed exactly.
    """
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or len(lines[0]) != 1:
        raise InvalidInput("matrix file must start with a line containing N")
    n = int(lines[0][0])
    rows = lines[1:]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise InvalidInput(f"expected {n} rows of {n} entries")
    exact = any("/" in tok for r in rows for tok in r)
    conv = Fraction if exact else float
    return PositiveContraction([[conv(tok) for tok in r] for r in rows], exact=exact)


def write_matrix(Q: PositiveContraction, path) -> None:
    src = Q.exact_matrix if Q.exact else Q.matrix.tolist()
    fmt = str if Q.exact else repr
    body = "\n".join(" ".join(fmt(x) for x in row) for row in src)
    Path(path).write_text(f"{len(Q)}\n{body}\n")
