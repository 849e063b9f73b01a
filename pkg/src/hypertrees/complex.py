"""Simplicial complexes with complete lower skeleton, cochains, weights and norms.

A :class:`Complex` on ``[n]`` of dimension ``d`` stores only its ``d``-faces;
for ``i < d`` the ``i``-faces are all ``(i+1)``-subsets of ``[n]``.  Weights
and norms are exact :class:`~fractions.Fraction` values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Iterable

import numpy as np

from .combinatorics import Face, colex_rank, faces
from .errors import InvalidInput, UndefinedWeight


def check_face(face: Iterable[int], n: int) -> Face:
    """Validate and return ``face`` as a strictly increasing tuple in [1, n]."""
    f = tuple(int(v) for v in face)
    if any(a >= b for a, b in zip(f, f[1:])):
        raise InvalidInput(f"face {f} is not strictly increasing")
    if f and (f[0] < 1 or f[-1] > n):
        raise InvalidInput(f"face {f} has vertices outside [1, {n}]")
    return f


@dataclass(frozen=True)
class Complex:
    """A d-complex on [n] with complete (d-1)-skeleton, stored by its top faces."""

    n: int
    d: int
    top_faces: tuple[Face, ...] = field(default=())

    def __post_init__(self):
        if self.n < 0 or self.d < 0:
            raise InvalidInput("n and d must be non-negative")
        if self.d + 1 > self.n and self.top_faces:
            raise InvalidInput(f"a {self.d}-face needs {self.d + 1} vertices, only {self.n} available")
        checked = []
        for f in self.top_faces:
            f = check_face(f, self.n)
            if len(f) != self.d + 1:
                raise InvalidInput(f"top face {f} does not have {self.d + 1} vertices")
            checked.append(f)
        checked.sort()
        for a, b in zip(checked, checked[1:]):
            if a == b:
                raise InvalidInput(f"duplicate top face {a}")
        object.__setattr__(self, "top_faces", tuple(checked))

    @classmethod
    def complete(cls, n: int, d: int) -> "Complex":
        """The d-skeleton of the full simplex on [n]."""
        return cls(n, d, tuple(combinations(range(1, n + 1), d + 1)))

    def __len__(self) -> int:
        return len(self.top_faces)

    def __contains__(self, face) -> bool:
        return tuple(face) in self._top_set

    def __iter__(self):
        return iter(self.top_faces)

    @cached_property
    def _top_set(self) -> frozenset:
        return frozenset(self.top_faces)

    @cached_property
    def top_index(self) -> dict[Face, int]:
        return {f: i for i, f in enumerate(self.top_faces)}

    @cached_property
    def top_array(self) -> np.ndarray:
        return np.array(self.top_faces, dtype=np.int64).reshape(len(self.top_faces), self.d + 1)

    def faces(self, i: int) -> tuple[Face, ...]:
        """The i-faces: all (i+1)-subsets for i < d (colex order), the top faces for i = d."""
        if i == self.d:
            return self.top_faces
        if 0 <= i < self.d:
            return faces(self.n, i + 1)
        if i == -1:
            return ((),)
        raise InvalidInput(f"no {i}-faces in a {self.d}-complex")

    def face_position(self, i: int, face: Face) -> int | None:
        if i == self.d:
            return self.top_index.get(face)
        return colex_rank(face)

    def cover_counts(self, i: int) -> np.ndarray:
        """Array of cover counts of the i-faces, aligned with :meth:`faces`."""
        return self._cover_counts(i)

    def _cover_counts(self, i: int) -> np.ndarray:
        cache = self.__dict__.setdefault("_cover_cache", {})
        if i in cache:
            return cache[i]
        if i == self.d:
            out = np.ones(len(self), dtype=np.int64)
        elif 0 <= i < self.d:
            out = np.zeros(comb(self.n, i + 1), dtype=np.int64)
            if len(self):
                top = self.top_array - 1
                for pos in combinations(range(self.d + 1), i + 1):
                    sub = top[:, pos]
                    ranks = sum(_binom_col(sub[:, j], j + 1) for j in range(i + 1))
                    out += np.bincount(ranks, minlength=len(out))
        else:
            raise InvalidInput(f"no {i}-faces in a {self.d}-complex")
        out.setflags(write=False)
        cache[i] = out
        return out

    def weight_denominator(self, i: int) -> int:
        """Common denominator of the i-face weights: C(d+1, i+1) |K(d)|."""
        return comb(self.d + 1, i + 1) * len(self)

    def is_pure(self) -> bool:
        """Every (d-1)-face lies in some top face."""
        if self.d == 0:
            return True
        return bool(np.all(self.cover_counts(self.d - 1) > 0))


def _binom_col(values: np.ndarray, k: int) -> np.ndarray:
    # C(values, k) for small non-negative integer arrays
    out = np.ones_like(values)
    for j in range(k):
        out = out * (values - j)
    fact = 1
    for j in range(2, k + 1):
        fact *= j
    return out // fact


@dataclass(frozen=True)
class Cochain:
    """An F2 i-cochain, identified with its support."""

    i: int
    support: frozenset = frozenset()

    def __post_init__(self):
        supp = frozenset(tuple(f) for f in self.support)
        for f in supp:
            if len(f) != self.i + 1:
                raise InvalidInput(f"face {f} does not have dimension {self.i}")
        object.__setattr__(self, "support", supp)

    def __len__(self) -> int:
        return len(self.support)

    def __add__(self, other: "Cochain") -> "Cochain":
        if other.i != self.i:
            raise InvalidInput("cannot add cochains of different dimension")
        return Cochain(self.i, self.support ^ other.support)


def cover_count(K: Complex, sigma: Iterable[int]) -> int:
    """Number of top faces of ``K`` containing ``sigma``."""
    s = check_face(sigma, K.n)
    if len(s) - 1 > K.d:
        raise InvalidInput(f"face {s} has dimension above {K.d}")
    if len(s) == K.d + 1:
        return int(s in K)
    if len(s) == 0:
        return len(K)
    return int(K.cover_counts(len(s) - 1)[colex_rank(s)])


def weight(K: Complex, sigma: Iterable[int]) -> Fraction:
    s = check_face(sigma, K.n)
    if not len(K):
        raise UndefinedWeight("weights are undefined on a complex without top faces")
    return Fraction(cover_count(K, s), K.weight_denominator(len(s) - 1))


def norm(K: Complex, f: Cochain) -> Fraction:
    """Sum of the weights of the support of ``f``."""
    if not f.support:
        return Fraction(0)
    if f.i > K.d:
        raise InvalidInput(f"cochain dimension {f.i} above {K.d}")
    if not len(K):
        raise UndefinedWeight("weights are undefined on a complex without top faces")
    total = sum(cover_count(K, s) for s in f.support)
    return Fraction(total, K.weight_denominator(f.i))


def link(K: Complex, sigma: Iterable[int]) -> tuple[Complex, dict[int, int]]:
    """Link of ``sigma``, relabeled monotonically onto ``[n - |sigma|]``.

    Returns the link complex and the map old vertex -> new vertex.
    """
    s = check_face(sigma, K.n)
    if not 1 <= len(s) <= K.d:
        raise InvalidInput(f"link needs 1 <= |sigma| <= {K.d}, got {len(s)}")
    ss = set(s)
    relabel = {}
    for v in range(1, K.n + 1):
        if v not in ss:
            relabel[v] = len(relabel) + 1
    tops = [
        tuple(relabel[v] for v in tau if v not in ss)
        for tau in K.top_faces
        if ss.issubset(tau)
    ]
    return Complex(K.n - len(s), K.d - len(s), tuple(tops)), relabel


def face_count_by_overlap(K: Complex, A: Iterable[int], i: int) -> int:
    """``|{tau in K(d) : |tau & A| = i}|``."""
    mask = _vertex_mask(K, A)
    return int(np.count_nonzero(_overlaps(K, mask) == i))


def face_count_overlap_at_least(K: Complex, A: Iterable[int], i: int = 2) -> int:
    """``|{tau in K(d) : |tau & A| >= i}|``; ``i = 2`` gives the E_{>=2} count."""
    mask = _vertex_mask(K, A)
    return int(np.count_nonzero(_overlaps(K, mask) >= i))


def _vertex_mask(K: Complex, A: Iterable[int]) -> np.ndarray:
    mask = np.zeros(K.n + 1, dtype=bool)
    for v in A:
        if not 1 <= v <= K.n:
            raise InvalidInput(f"vertex {v} outside [1, {K.n}]")
        mask[v] = True
    return mask


def _overlaps(K: Complex, mask: np.ndarray) -> np.ndarray:
    if not len(K):
        return np.zeros(0, dtype=np.int64)
    return mask[K.top_array].sum(axis=1)


def edge_norm(K: Complex, A: Iterable[int]) -> Fraction:
    """Norm of the 1-cochain of edges with both endpoints in ``A``."""
    if K.d < 1:
        raise InvalidInput("edge norm needs d >= 1")
    verts = sorted(set(A))
    return norm(K, Cochain(1, frozenset(combinations(verts, 2))))


# -- file format -------------------------------------------------------------

def parse_complex(text: str) -> Complex:
    """Parse the text format: header ``n d``, then one top face per line."""
    header = None
    tops = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            nums = [int(tok) for tok in line.split()]
        except ValueError as exc:
            raise InvalidInput(f"line {lineno}: {exc}") from None
        if header is None:
            if len(nums) != 2:
                raise InvalidInput(f"line {lineno}: header must be 'n d'")
            header = nums
            continue
        face = tuple(nums)
        if len(face) != header[1] + 1:
            raise InvalidInput(f"line {lineno}: expected {header[1] + 1} vertices")
        if any(a >= b for a, b in zip(face, face[1:])):
            raise InvalidInput(f"line {lineno}: vertices must be ascending")
        if face in seen:
            raise InvalidInput(f"line {lineno}: duplicate face {face}")
        seen.add(face)
        tops.append(face)
    if header is None:
        raise InvalidInput("missing 'n d' header")
    return Complex(header[0], header[1], tuple(tops))


def format_complex(K: Complex, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"{K.n} {K.d}")
    lines.extend(" ".join(map(str, f)) for f in K.top_faces)
    return "\n".join(lines) + "\n"


def read_complex(path) -> Complex:
    return parse_complex(Path(path).read_text())


def write_complex(K: Complex, path, comment: str | None = None) -> None:
    Path(path).write_text(format_complex(K, comment))
