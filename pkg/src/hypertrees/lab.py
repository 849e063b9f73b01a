"""Skeleton expansion and the statistical verification harness.

Every ``verify_*`` function returns a :class:`Report` whose verdict is one of
``pass``, ``fail`` or ``inconclusive``.  Monte Carlo draws are organised in
fixed blocks of :data:`BLOCK` draws; block ``b`` is seeded by
``child_seed(seed, b)``, so results are identical for every worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing as mp
import os
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .cohomology import coboundary_expansion, f2_cohomology_dim, meshulam_wallach_scan
from .combinatorics import Face, colex_masks, faces
from .complex import Complex, check_face
from .config import Caps, default_caps
from .detproc import CHUNK, PositiveContraction, bernstein_bound, child_seed, poisson_binomial, rng_for, sample_batch
from .errors import CapacityError, InvalidInput, UndefinedWeight
from .exact import bareiss_det, fraction_det
from .homology import (
    _columns,
    _diagonalize,
    _order_from_diag,
    candidate_count,
    determinant_weight,
    hypertree_records,
    kalai_total,
)
from .hypertree import (
    HypertreeKernel,
    incidence,
    indicator_to_complex,
    kernel,
    sample_hypertree_batch,
)

ALPHA = 0.001
BLOCK = CHUNK
VERDICTS = ("pass", "fail", "inconclusive")


def available_threads() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-linux
        return os.cpu_count() or 1


# -- reports -------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass
class Report:
    name: str
    params: dict
    seed: int | None
    statistics: list[dict] = field(default_factory=list)
    p_value: float | None = None
    bound: object = None
    verdict: str = "inconclusive"
    wall_time_ms: float = 0.0

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise InvalidInput(f"verdict must be one of {VERDICTS}")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def stat(self, name: str, **match) -> dict:
        """First statistics row with this name (and matching fields)."""
        for row in self.statistics:
            if row.get("name") == name and all(row.get(k) == v for k, v in match.items()):
                return row
        raise KeyError(name)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def to_csv(self) -> str:
        """Long-format table: one row per (statistic, field)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "row", "stat", "field", "value"])
        for r, row in enumerate(self.to_dict()["statistics"]):
            for key, value in row.items():
                if key != "name":
                    w.writerow([self.name, r, row.get("name", ""), key, value])
        return buf.getvalue()


class _Timer:
    """Wall clock in milliseconds; ``ms`` is live inside the block, frozen after it."""

    def __enter__(self):
        self.t0 = time.perf_counter()
        self._end = None
        return self

    def __exit__(self, *exc):
        self._end = time.perf_counter()

    @property
    def ms(self) -> float:
        end = time.perf_counter() if self._end is None else self._end
        return (end - self.t0) * 1000.0


def _finish(report: Report, timer: _Timer) -> Report:
    report.wall_time_ms = round(timer.ms, 3)
    return report


# -- parallel helpers ------------------------------------------------------------

def pmap(fn: Callable, jobs: Sequence, threads: int = 1) -> list:
    """Ordered map; uses forked worker processes when ``threads > 1``."""
    if threads > 1 and len(jobs) > 1:
        with mp.get_context("fork").Pool(min(threads, len(jobs))) as pool:
            return pool.map(fn, jobs, chunksize=1)
    return [fn(j) for j in jobs]


def resolve_backend(n: int, d: int, ell: int, backend: str = "auto") -> str:
    if backend == "auto":
        return "kernel" if comb(n, d + 1) <= 64 else "percolation"
    if backend not in ("kernel", "percolation"):
        raise InvalidInput(f"unknown backend {backend!r}")
    return backend


def _draw_block(args) -> np.ndarray:
    n, d, ell, size, seed, backend = args
    return sample_hypertree_batch(n, d, ell, size, seed, backend)


def hypertree_draws(n: int, d: int, ell: int, count: int, seed: int, backend: str = "auto",
                    threads: int = 1) -> np.ndarray:
    """``(count, C(n, d+1))`` indicators of independent draws of T_{n,d,l}."""
    backend = resolve_backend(n, d, ell, backend)
    jobs = [(n, d, ell, min(BLOCK, count - lo), child_seed(seed, b), backend)
            for b, lo in enumerate(range(0, count, BLOCK))]
    parts = pmap(_draw_block, jobs, threads)
    return np.concatenate(parts) if parts else np.zeros((0, comb(n, d + 1)), dtype=bool)


def union_draws(n: int, d: int, ell: int, k: int, count: int, seed: int, backend: str = "auto",
                threads: int = 1) -> np.ndarray:
    """``(count, k, m)`` indicators; copy ``j`` uses the seed ``child_seed(seed, j)``."""
    if k < 1:
        raise InvalidInput("k must be at least 1")
    copies = [hypertree_draws(n, d, ell, count, child_seed(seed, j), backend, threads) for j in range(k)]
    return np.stack(copies, axis=1)


def _choice_rng(seed: int, tag: int) -> np.random.Generator:
    # parameter choices (random faces, random sets) use their own streams
    return rng_for(seed, 1 << 30, tag)


# -- statistics ----------------------------------------------------------------

def _merge_small(expected: np.ndarray, observed: np.ndarray, min_expected: float):
    """Cochran merging: pool bins with expected count below ``min_expected``."""
    big = expected >= min_expected
    e = list(expected[big])
    o = list(observed[big])
    e_small, o_small = expected[~big].sum(), observed[~big].sum()
    if e_small > 0 or o_small > 0:
        if e_small >= min_expected or not e:
            e.append(e_small)
            o.append(o_small)
        else:
            j = int(np.argmin(e))
            e[j] += e_small
            o[j] += o_small
    return np.array(e, dtype=float), np.array(o, dtype=float)


def chi_square_gof(observed: Sequence[int], probs: Sequence[float],
                   min_expected: float = 5.0) -> tuple[float, int, float]:
    """Goodness of fit; returns (statistic, degrees of freedom, p-value)."""
    observed = np.asarray(observed, dtype=float)
    probs = np.asarray(probs, dtype=float)
    total = observed.sum()
    # an outcome of probability zero was observed; merging must not hide it
    if np.any((probs == 0) & (observed > 0)):
        return math.inf, max(int(np.count_nonzero(probs)) - 1, 0), 0.0
    e, o = _merge_small(probs / probs.sum() * total, observed, min_expected)
    keep = e > 0
    e, o = e[keep], o[keep]
    df = len(e) - 1
    if df < 1:
        return 0.0, 0, 1.0
    stat = float(((o - e) ** 2 / e).sum())
    return stat, df, float(stats.chi2.sf(stat, df))


def chi_square_two_sample(a: dict, b: dict, min_expected: float = 5.0) -> tuple[float, int, float]:
    """Homogeneity test between two categorical samples given as count dicts."""
    keys = sorted(set(a) | set(b))
    ca = np.array([a.get(k, 0) for k in keys], dtype=float)
    cb = np.array([b.get(k, 0) for k in keys], dtype=float)
    na, nb = ca.sum(), cb.sum()
    tot = ca + cb
    # expected counts under homogeneity are proportional to the pooled column
    small_exp = np.minimum(tot * na, tot * nb) / (na + nb)
    big = small_exp >= min_expected
    cols_a, cols_b = list(ca[big]), list(cb[big])
    if (~big).any():
        cols_a.append(ca[~big].sum())
        cols_b.append(cb[~big].sum())
    table = np.array([cols_a, cols_b])
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return 0.0, 0, 1.0
    stat, p, df, _ = stats.chi2_contingency(table, correction=False)
    return float(stat), int(df), float(p)


def _se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n) if n else math.inf


# -- skeleton expansion ----------------------------------------------------------

def skeleton_alpha(K: Complex, caps: Caps | None = None) -> Fraction:
    """Least alpha with ``||E(A,A)|| <= 4 (||A||^2 + alpha ||A||)`` for all vertex sets.

    Exhaustive over the ``2^n`` subsets with integer numerators; the
    maximizing sets are then re-evaluated exactly.
    """
    caps = caps or default_caps()
    n = K.n
    if n > caps.skeleton:
        raise CapacityError("skeleton expansion vertex count", n, caps.skeleton)
    if K.d < 1:
        raise InvalidInput("skeleton expansion needs d >= 1")
    if not len(K):
        raise UndefinedWeight("weights are undefined on a complex without top faces")
    cv = K.cover_counts(0).astype(np.int64)
    ce = K.cover_counts(1).astype(np.int64)
    # K.faces(1) is aligned with cover_counts(1): the top faces when d = 1
    w = np.zeros((n, n), dtype=np.int64)
    for (a, b), c in zip(K.faces(1), ce):
        w[a - 1, b - 1] = w[b - 1, a - 1] = c
    size = 1 << n
    V = np.zeros(size, dtype=np.int64)
    E = np.zeros(size, dtype=np.int64)
    for v in range(n):
        lo = 1 << v
        S = np.zeros(lo, dtype=np.int64)
        for u in range(v):
            S[1 << u: 2 << u] = S[: 1 << u] + w[u, v]
        V[lo: 2 * lo] = V[:lo] + cv[v]
        E[lo: 2 * lo] = E[:lo] + S
    Dv, De = K.weight_denominator(0), K.weight_denominator(1)
    ok = V > 0
    vals = np.full(size, -np.inf)
    Vf = V[ok].astype(float)
    vals[ok] = E[ok] * Dv / (4.0 * De * Vf) - Vf / Dv
    top = float(vals.max())
    if top <= 0:
        # check exactly in case rounding hid a tiny positive value
        cand = np.flatnonzero(vals >= -1e-12)
    else:
        cand = np.flatnonzero(vals >= top - 1e-9 * (1 + abs(top)))
    best = Fraction(0)
    for mask in cand:
        a = Fraction(int(E[mask]) * Dv, 4 * De * int(V[mask])) - Fraction(int(V[mask]), Dv)
        best = max(best, a)
    return best


# -- experiments -------------------------------------------------------------------

def _measure_scan(args) -> tuple[int, int, int, int, int | None]:
    """Check det(P)_S * n^{C(n-2,d)} == |H|^2 * n^{|S|} on a colex rank range."""
    n, d, start, stop = args
    universe, k = comb(n, d + 1), comb(n - 1, d)
    gram = kernel(n, d).gram.toarray().astype(int).tolist()
    cols = _columns(n, d)
    kal = kalai_total(n, d)
    scale = n ** k
    hyper = mismatch = total_h2 = 0
    first_bad = None
    count = 0
    for mask in colex_masks(universe, k, start, stop):
        count += 1
        S = [j for j in range(universe) if mask >> j & 1]
        rows = [list(r) for r in zip(*(cols[j] for j in S))]
        h = _order_from_diag(_diagonalize(rows), k)
        h2 = 0 if h == math.inf else h * h
        det = bareiss_det([[gram[a][b] for b in S] for a in S])
        if det * kal != h2 * scale:
            mismatch += 1
            if first_bad is None:
                first_bad = mask
        if h2:
            hyper += 1
            total_h2 += h2
    return count, hyper, mismatch, total_h2, first_bad


def verify_measure(n: int, d: int, caps: Caps | None = None, threads: int = 1,
                   all_candidates: bool = True) -> Report:
    """Exact agreement of homology weights with kernel minors.

    With ``all_candidates`` every C(n-1,d)-subset of faces is checked (the
    minor must vanish off hypertrees); otherwise only enumerated hypertrees.
    """
    caps = caps or default_caps()
    params = {"n": n, "d": d, "all_candidates": all_candidates}
    rep = Report("measure", params, None)
    with _Timer() as t:
        try:
            total = candidate_count(n, d)
            if total > caps.enumeration:
                raise CapacityError("hypertree enumeration candidates", total, caps.enumeration)
        except CapacityError as exc:
            rep.statistics.append({"name": "capacity", "detail": str(exc)})
            rep.verdict = "inconclusive"
            return _finish(rep, t)
        kal = kalai_total(n, d)
        if all_candidates:
            step = max(1, -(-total // 64))
            jobs = [(n, d, lo, min(lo + step, total)) for lo in range(0, total, step)]
            parts = pmap(_measure_scan, jobs, threads)
            count = sum(p[0] for p in parts)
            hyper = sum(p[1] for p in parts)
            mismatch = sum(p[2] for p in parts)
            total_h2 = sum(p[3] for p in parts)
            bad = next((p[4] for p in parts if p[4] is not None), None)
        else:
            recs = hypertree_records(n, d, caps, threads)
            count, hyper = total, len(recs)
            mismatch = sum(determinant_weight(r.complex) != r.weight for r in recs)
            total_h2 = sum(r.order ** 2 for r in recs)
            bad = None
        weight_sum = Fraction(total_h2, kal)
        rep.statistics += [
            {"name": "candidates", "value": count},
            {"name": "hypertrees", "value": hyper},
            {"name": "determinant_mismatches", "value": mismatch, "first_mask": bad},
            {"name": "sum_torsion_squared", "value": total_h2, "target": kal},
            {"name": "sum_weights", "value": weight_sum, "target": 1},
        ]
        rep.bound = kal
        rep.verdict = "pass" if mismatch == 0 and total_h2 == kal and weight_sum == 1 else "fail"
    return _finish(rep, t)


def exact_law(n: int, d: int, caps: Caps | None = None, threads: int = 1) -> tuple[list[int], list[Fraction]]:
    """Masks of all hypertrees (colex order of ground faces) with their probabilities."""
    recs = hypertree_records(n, d, caps, threads)
    return [r.mask for r in recs], [r.weight for r in recs]


def _masks(ind: np.ndarray) -> np.ndarray:
    """Pack indicator rows into integers (bit j = ground face j); needs <= 63 faces."""
    if ind.shape[1] > 63:
        raise InvalidInput("outcome packing supports at most 63 ground faces")
    weights = (1 << np.arange(ind.shape[1], dtype=np.int64)).astype(np.int64)
    return ind.astype(np.int64) @ weights


def verify_exact_law(n: int, d: int, samples: int, seed: int, backend: str = "kernel",
                     threads: int = 1, caps: Caps | None = None) -> Report:
    """Chi-square of sampled T_{n,d} against the enumerated homology-weighted law."""
    params = {"n": n, "d": d, "l": 0, "samples": samples, "backend": backend}
    rep = Report("exact-law", params, seed)
    with _Timer() as t:
        masks, weights = exact_law(n, d, caps, threads)
        X = hypertree_draws(n, d, 0, samples, seed, backend, threads)
        got = Counter(_masks(X).tolist())
        obs = [got.get(m, 0) for m in masks]
        stray = samples - sum(obs)
        stat, df, p = chi_square_gof(obs + [stray], [float(w) for w in weights] + [0.0])
        rep.statistics += [
            {"name": "outcomes", "value": len(masks)},
            {"name": "non_hypertree_draws", "value": stray},
            {"name": "chi_square", "value": stat, "df": df},
        ]
        rep.p_value = p
        rep.bound = ALPHA
        rep.verdict = "pass" if p > ALPHA and stray == 0 else "fail"
    return _finish(rep, t)


def verify_marginals(n: int, d: int, ell: int, samples: int, seed: int, faces_checked: int = 20,
                     backend: str = "auto", threads: int = 1) -> Report:
    """Empirical P(sigma in T) within 4 standard errors of (d+1+l)/(n+l)."""
    params = {"n": n, "d": d, "l": ell, "samples": samples, "faces": faces_checked, "backend": backend}
    rep = Report("marginals", params, seed)
    with _Timer() as t:
        K = HypertreeKernel(n, d, ell)
        target = float(K.diagonal_value)
        m = len(K)
        chosen = np.sort(_choice_rng(seed, 1).choice(m, size=min(faces_checked, m), replace=False))
        X = hypertree_draws(n, d, ell, samples, seed, backend, threads)
        se = _se(target, samples)
        worst_z, p_min, ok = 0.0, 1.0, True
        ground = K.ground
        for j in chosen:
            phat = float(X[:, j].mean())
            if se == 0:
                z = 0.0 if phat == target else math.inf
            else:
                z = abs(phat - target) / se
            ok &= z <= 4.0
            worst_z = max(worst_z, z)
            p_min = min(p_min, float(2 * stats.norm.sf(z)))
            rep.statistics.append({"name": "marginal", "face": list(ground[j]), "empirical": phat,
                                   "target": target, "se": se, "z": z})
        rep.statistics.append({"name": "max_z", "value": worst_z})
        rep.p_value = p_min
        rep.bound = str(K.diagonal_value)
        rep.verdict = "pass" if ok else "fail"
    return _finish(rep, t)


def random_face_set(n: int, d: int, size: int, rng: np.random.Generator) -> list[Face]:
    ground = faces(n, d + 1)
    idx = np.sort(rng.choice(len(ground), size=size, replace=False))
    return [ground[j] for j in idx]


def verify_count_law(n: int, d: int, ell: int, A: Iterable[Iterable[int]], samples: int, seed: int,
                     backend: str = "auto", threads: int = 1) -> Report:
    """Histogram of |T & A| against the Poisson-binomial law of eig(Q_A)."""
    A = [check_face(a, n) for a in A]
    if not 1 <= len(A) <= 12:
        raise InvalidInput("count law needs 1 <= |A| <= 12")
    if any(len(a) != d + 1 for a in A):
        raise InvalidInput(f"faces of A must have {d + 1} vertices")
    params = {"n": n, "d": d, "l": ell, "samples": samples, "A": [list(a) for a in A], "backend": backend}
    rep = Report("count-law", params, seed)
    with _Timer() as t:
        K = HypertreeKernel(n, d, ell)
        pos = [K.ground.index(a) for a in A]
        sub = np.array([[float(K.entry(a, b)) for b in A] for a in A])
        lam = np.clip(np.linalg.eigvalsh(sub), 0.0, 1.0)
        pmf = poisson_binomial(lam)
        X = hypertree_draws(n, d, ell, samples, seed, backend, threads)
        counts = np.bincount(X[:, pos].sum(axis=1), minlength=len(pmf))
        stat, df, p = chi_square_gof(counts, pmf)
        rep.statistics += [
            {"name": "histogram", "value": counts.tolist()},
            {"name": "pmf", "value": pmf.tolist()},
            {"name": "chi_square", "value": stat, "df": df},
        ]
        rep.p_value = p
        rep.bound = ALPHA
        rep.verdict = "pass" if p > ALPHA else "fail"
    return _finish(rep, t)


def _link_masks(ind: np.ndarray, n: int, d: int, sigma: Face) -> np.ndarray:
    """Relabeled link of each draw at ``sigma``, packed as masks over the link ground."""
    ss = set(sigma)
    relabel = {}
    for v in range(1, n + 1):
        if v not in ss:
            relabel[v] = len(relabel) + 1
    ground = faces(n, d + 1)
    lk_index = {f: i for i, f in enumerate(faces(n - len(sigma), d + 1 - len(sigma)))}
    cols, bits = [], []
    for j, tau in enumerate(ground):
        if ss.issubset(tau):
            cols.append(j)
            bits.append(lk_index[tuple(relabel[v] for v in tau if v not in ss)])
    sub = ind[:, cols].astype(np.int64)
    return sub @ (1 << np.array(bits, dtype=np.int64))


def verify_links(n: int, d: int, ell: int, sigma: Iterable[int], samples: int, seed: int,
                 backend: str = "auto", threads: int = 1) -> Report:
    """Links of T_{n,d,l} at sigma against direct draws of T_{n-s, d-s, l+s}."""
    sigma = check_face(sigma, n)
    s = len(sigma)
    if not 1 <= s <= d:
        raise InvalidInput(f"need 1 <= |sigma| <= {d}")
    params = {"n": n, "d": d, "l": ell, "sigma": list(sigma), "samples": samples, "backend": backend}
    rep = Report("links", params, seed)
    with _Timer() as t:
        n2, d2, l2 = n - s, d - s, ell + s
        if comb(n2, d2 + 1) > 63:
            rep.statistics.append({"name": "capacity", "detail": "link outcome space too large to enumerate"})
            rep.verdict = "inconclusive"
            return _finish(rep, t)
        if d2 == 0:
            # the link is a vertex set; the comparison process has no 0-dim sampler here
            rep.statistics.append({"name": "note", "detail": "0-dimensional link; see marginals"})
        X = hypertree_draws(n, d, ell, samples, seed, backend, threads)
        link = Counter(_link_masks(X, n, d, sigma).tolist())
        if d2 >= 1:
            Y = hypertree_draws(n2, d2, l2, samples, child_seed(seed, 1 << 40), backend, threads)
            direct = Counter(_masks(Y).tolist())
        else:
            Y = _zero_dim_draws(n2, l2, samples, seed)
            direct = Counter(_masks(Y).tolist())
        stat, df, p = chi_square_two_sample(link, direct)
        rep.statistics += [
            {"name": "comparison", "n": n2, "d": d2, "l": l2},
            {"name": "outcomes_link", "value": len(link)},
            {"name": "outcomes_direct", "value": len(direct)},
            {"name": "chi_square", "value": stat, "df": df},
        ]
        rep.p_value = p
        rep.bound = ALPHA
        rep.verdict = "pass" if p > ALPHA else "fail"
    return _finish(rep, t)


def _zero_dim_draws(m: int, ell: int, samples: int, seed: int) -> np.ndarray:
    """T_{m,0,l}: kernel (J + l I)/(m + l) on the m vertices."""
    Q = (np.ones((m, m)) + ell * np.eye(m)) / (m + ell)
    return sample_batch(PositiveContraction(Q), samples, child_seed(seed, 1 << 40)).indicators


def verify_union_bound(n: int, d: int, ell: int, k: int, samples: int, seed: int, sets: int = 50,
                       max_size: int = 3, backend: str = "auto", threads: int = 1) -> Report:
    """P(A in X^cup) <= k^{|A|} prod Q(a,a) + 4 SE over random small sets A."""
    params = {"n": n, "d": d, "l": ell, "k": k, "samples": samples, "sets": sets, "backend": backend}
    rep = Report("union-bound", params, seed)
    with _Timer() as t:
        K = HypertreeKernel(n, d, ell)
        q = float(K.diagonal_value)
        rng = _choice_rng(seed, 2)
        X = union_draws(n, d, ell, k, samples, seed, backend, threads).any(axis=1)
        ok, worst = True, -math.inf
        for _ in range(sets):
            size = int(rng.integers(1, max_size + 1))
            idx = np.sort(rng.choice(len(K), size=size, replace=False))
            emp = float(X[:, idx].all(axis=1).mean())
            bound = (k * q) ** size
            se = _se(emp, samples)
            good = bound >= 1 or emp <= bound + 4 * se
            ok &= good
            worst = max(worst, emp - bound)
            rep.statistics.append({"name": "set", "A": [list(K.ground[j]) for j in idx], "empirical": emp,
                                   "bound": bound, "se": se, "ok": good})
        rep.statistics.append({"name": "max_excess", "value": worst})
        rep.bound = "k^|A| prod Q(a,a)"
        rep.verdict = "pass" if ok else "fail"
    return _finish(rep, t)


def verify_hadamard(n: int, d: int, ell: int, minors: int, seed: int, max_size: int = 6) -> Report:
    """Exact check of 0 <= det Q_A <= prod Q(a,a) on random principal minors."""
    params = {"n": n, "d": d, "l": ell, "minors": minors, "max_size": max_size}
    rep = Report("hadamard", params, seed)
    with _Timer() as t:
        K = HypertreeKernel(n, d, ell)
        diag = K.diagonal_value
        rng = _choice_rng(seed, 3)
        violations = negative = 0
        tight = 0
        for _ in range(minors):
            size = int(rng.integers(1, min(max_size, len(K)) + 1))
            idx = sorted(rng.choice(len(K), size=size, replace=False).tolist())
            det = fraction_det(K.submatrix_exact(idx))
            if det < 0:
                negative += 1
            if det > diag ** size:
                violations += 1
            if det == diag ** size:
                tight += 1
        rep.statistics += [
            {"name": "violations", "value": violations},
            {"name": "negative_minors", "value": negative},
            {"name": "equality_cases", "value": tight},
        ]
        rep.bound = "prod Q(a,a)"
        rep.verdict = "pass" if violations == 0 and negative == 0 else "fail"
    return _finish(rep, t)


def verify_bernstein(n: int, d: int, ell: int, set_size: int, samples: int, seed: int,
                     eps: Sequence[float] = (0.25, 0.5, 1.0), backend: str = "auto",
                     threads: int = 1) -> Report:
    """Tail frequencies of |T & A| against 2 exp(-eps^2 mean / 4) + 4 SE."""
    params = {"n": n, "d": d, "l": ell, "set_size": set_size, "samples": samples, "eps": list(eps),
              "backend": backend}
    rep = Report("bernstein", params, seed)
    with _Timer() as t:
        K = HypertreeKernel(n, d, ell)
        idx = np.sort(_choice_rng(seed, 4).choice(len(K), size=set_size, replace=False))
        mean = set_size * float(K.diagonal_value)
        X = hypertree_draws(n, d, ell, samples, seed, backend, threads)
        cnt = X[:, idx].sum(axis=1)
        ok = True
        for e in eps:
            freq = float((np.abs(cnt - mean) >= e * mean).mean())
            bound = bernstein_bound(mean, e)
            se = _se(min(bound, 1.0), samples)
            good = freq <= bound + 4 * se
            ok &= good
            rep.statistics.append({"name": "tail", "eps": e, "frequency": freq, "bound": bound,
                                   "se": se, "ok": good})
        rep.statistics.append({"name": "mean", "value": mean, "empirical": float(cnt.mean())})
        rep.bound = "2 exp(-eps^2 mean / 4)"
        rep.verdict = "pass" if ok else "fail"
    return _finish(rep, t)


def verify_backends(n: int, d: int, ell: int, samples: int, seed: int, threads: int = 1) -> Report:
    """Full-outcome two-sample chi-square between the two samplers."""
    params = {"n": n, "d": d, "l": ell, "samples": samples}
    rep = Report("backends", params, seed)
    with _Timer() as t:
        a = Counter(_masks(hypertree_draws(n, d, ell, samples, seed, "kernel", threads)).tolist())
        b = Counter(_masks(hypertree_draws(n, d, ell, samples, child_seed(seed, 1 << 41), "percolation",
                                           threads)).tolist())
        stat, df, p = chi_square_two_sample(a, b)
        rep.statistics += [
            {"name": "outcomes_kernel", "value": len(a)},
            {"name": "outcomes_percolation", "value": len(b)},
            {"name": "chi_square", "value": stat, "df": df},
        ]
        rep.p_value = p
        rep.bound = ALPHA
        rep.verdict = "pass" if p > ALPHA else "fail"
    return _finish(rep, t)


def _purity_block(args) -> tuple[int, int, int]:
    n, d, size, seed = args
    X = sample_hypertree_batch(n, d, 0, size, seed, "percolation")
    k = comb(n - 1, d)
    wrong_size = int((X.sum(axis=1) != k).sum())
    inc = incidence(n, d).matrix.tocsr()
    covered = (inc.astype(np.int64) != 0).astype(np.int64) @ X.T.astype(np.int64)
    impure = int((covered == 0).any(axis=0).sum())
    return size, wrong_size, impure


def verify_purity(n: int, d: int, samples: int, seed: int, threads: int = 1) -> Report:
    """Every draw of T_{n,d} has C(n-1,d) faces and covers every (d-1)-face."""
    params = {"n": n, "d": d, "l": 0, "samples": samples}
    rep = Report("purity", params, seed)
    with _Timer() as t:
        jobs = [(n, d, min(BLOCK, samples - lo), child_seed(seed, b))
                for b, lo in enumerate(range(0, samples, BLOCK))]
        parts = pmap(_purity_block, jobs, threads)
        wrong = sum(p[1] for p in parts)
        impure = sum(p[2] for p in parts)
        rep.statistics += [
            {"name": "draws", "value": sum(p[0] for p in parts)},
            {"name": "wrong_size", "value": wrong, "target": comb(n - 1, d)},
            {"name": "impure", "value": impure},
        ]
        rep.bound = 0
        rep.verdict = "pass" if wrong == 0 and impure == 0 else "fail"
    return _finish(rep, t)


def verify_meshulam_wallach(n_values: Sequence[int], i_values: Sequence[int] = (0, 1),
                            caps: Caps | None = None) -> Report:
    """Exhaustive |delta A| >= |A| n/(i+2) for every minimal A on the complete complex."""
    params = {"n": list(n_values), "i": list(i_values)}
    rep = Report("meshulam-wallach", params, None)
    with _Timer() as t:
        ok = True
        for n in n_values:
            for i in i_values:
                if i + 2 > n:
                    continue
                scan = meshulam_wallach_scan(n, i, caps)
                ok &= scan.passed
                rep.statistics.append({"name": "scan", "n": n, "i": i, "cosets": scan.cosets,
                                       "worst_margin": scan.worst_margin, "passed": scan.passed})
        rep.bound = "|A| n / (i+2)"
        rep.verdict = "pass" if ok else "fail"
    return _finish(rep, t)


# -- desk-scale trend ---------------------------------------------------------------

def _trend_draw(args) -> dict:
    n, d, k, seed, r, exact, caps = args
    ind = np.zeros(comb(n, d + 1), dtype=bool)
    for j in range(k):
        ind |= sample_hypertree_batch(n, d, 0, 1, child_seed(seed, n, r, j), "percolation")[0]
    K = indicator_to_complex(n, d, ind)
    dims = [f2_cohomology_dim(K, i) for i in range(d)]
    out = {"faces": len(K), "dims": dims, "vanish": all(x == 0 for x in dims)}
    if exact:
        try:
            out["h"] = coboundary_expansion(K, caps)
        except CapacityError as exc:
            out["capacity"] = str(exc)
    return out


def theorem_trend(d: int, k: int, n_grid: Sequence[int], samples: int, seed: int,
                  exact_grid: Sequence[int] = (), exact_samples: int | None = None,
                  caps: Caps | None = None, threads: int = 1) -> Report:
    """F2-vanishing fraction of K_{n,d,k} along ``n_grid`` plus exact h where feasible.

    Grid points where ``C(n, d) <= caps.ambient`` also get exact expansion
    constants; ``exact_grid`` adds points that only get those.
    """
    caps = caps or default_caps()
    exact_samples = samples if exact_samples is None else exact_samples
    params = {"d": d, "k": k, "n_grid": list(n_grid), "samples": samples, "exact_grid": list(exact_grid),
              "exact_samples": exact_samples}
    rep = Report("trend", params, seed)
    with _Timer() as t:
        rep.statistics.append({"name": "note", "detail": "the limiting constants are non-constructive; "
                               "empirical quantiles of h are reported, no fixed threshold is tested"})
        rep.statistics.append({"name": "note", "detail": "H^0 and h_0 use the augmented convention "
                               "B^0 = {0, all-ones}, so vanishing means connected"})
        fracs = []
        points = [(n, samples, True) for n in n_grid] + [(n, exact_samples, False) for n in exact_grid]
        for n, count, on_grid in points:
            exact = comb(n, d) <= caps.ambient
            if not on_grid and not exact:
                rep.statistics.append({"name": "capacity", "n": n, "detail": "exact h skipped: C(n,d) above ambient cap"})
                continue
            jobs = [(n, d, k, seed, r, exact, caps) for r in range(count)]
            res = pmap(_trend_draw, jobs, threads)
            if on_grid:
                frac = sum(x["vanish"] for x in res) / count
                se = _se(frac, count)
                fracs.append((frac, se))
                rep.statistics.append({"name": "vanishing_fraction", "n": n, "value": frac, "se": se,
                                       "samples": count, "mean_faces": float(np.mean([x["faces"] for x in res]))})
            if exact:
                hs = [x["h"] for x in res if "h" in x]
                if len(hs) < len(res):
                    rep.statistics.append({"name": "capacity", "n": n, "detail": "exact h failed for some draws"})
                if hs:
                    hf = np.array([float(h) for h in hs])
                    rep.statistics.append({
                        "name": "expansion", "n": n, "samples": len(hs), "min": min(hs),
                        "q10": float(np.quantile(hf, 0.1)), "median": float(np.median(hf)),
                        "max": max(hs), "positive_fraction": float((hf > 0).mean()),
                    })
            elif on_grid:
                rep.statistics.append({"name": "capacity", "n": n, "detail": "exact h skipped: C(n,d) above ambient cap"})
        monotone = all(b[0] >= a[0] - 2 * math.hypot(a[1], b[1]) for a, b in zip(fracs, fracs[1:]))
        rep.statistics.append({"name": "monotone_within_2se", "value": monotone})
        rep.bound = "nondecreasing within 2 SE"
        rep.verdict = "pass" if monotone and fracs else ("inconclusive" if not fracs else "fail")
    return _finish(rep, t)


# -- suites -----------------------------------------------------------------------

SUITES = ("measure", "marginals", "counts", "links", "union-bound", "bernstein", "trend",
          "backends", "exact-law", "purity", "hadamard", "meshulam-wallach")


@dataclass
class SuiteConfig:
    n: int | None = None
    d: int | None = None
    ell: int | None = None
    k: int | None = None
    samples: int | None = None
    seed: int = 0
    backend: str = "auto"
    threads: int = 1
    quick: bool = False
    caps: Caps = field(default_factory=default_caps)


def _pick(value, default):
    return default if value is None else value


def run_suite(name: str, cfg: SuiteConfig) -> list[Report]:
    """Run one named suite (or ``all``) with defaults sized by ``cfg.quick``."""
    if name == "all":
        return [r for s in SUITES for r in run_suite(s, cfg)]
    if name not in SUITES:
        raise InvalidInput(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    q = cfg.quick
    S = lambda full, quick: _pick(cfg.samples, quick if q else full)  # noqa: E731
    n, d, ell, k = cfg.n, cfg.d, cfg.ell, cfg.k
    seed, th, be = cfg.seed, cfg.threads, cfg.backend
    if name == "measure":
        return [verify_measure(_pick(n, 5), _pick(d, 2), cfg.caps, th)]
    if name == "marginals":
        return [verify_marginals(_pick(n, 10), _pick(d, 2), _pick(ell, 0), S(100_000, 20_000), seed,
                                 backend=be, threads=th)]
    if name == "counts":
        nn, dd = _pick(n, 8), _pick(d, 2)
        size = int(_choice_rng(seed, 5).integers(1, 11))
        A = random_face_set(nn, dd, size, _choice_rng(seed, 6))
        return [verify_count_law(nn, dd, _pick(ell, 0), A, S(100_000, 20_000), seed, be, th)]
    if name == "links":
        nn, dd = _pick(n, 6), _pick(d, 2)
        return [verify_links(nn, dd, _pick(ell, 0), (nn,), S(1_000_000, 50_000), seed, be, th)]
    if name == "union-bound":
        return [verify_union_bound(_pick(n, 10), _pick(d, 2), _pick(ell, 0), _pick(k, 3), S(50_000, 10_000),
                                   seed, backend=be, threads=th)]
    if name == "bernstein":
        nn, dd = _pick(n, 20), _pick(d, 2)
        size = min(200, comb(nn, dd + 1))
        return [verify_bernstein(nn, dd, _pick(ell, 0), size, S(100_000, 5_000), seed, backend=be, threads=th)]
    if name == "trend":
        dd = _pick(d, 2)
        if q:
            return [theorem_trend(dd, _pick(k, 10), [8, 12, 16] if n is None else [n], S(200, 30), seed,
                                  exact_grid=[6], exact_samples=10, caps=cfg.caps, threads=th)]
        grid = [20, 40, 60] if n is None else [n]
        return [theorem_trend(dd, _pick(k, 40), grid, S(200, 200), seed, exact_grid=[7], exact_samples=50,
                              caps=cfg.caps, threads=th)]
    if name == "backends":
        return [verify_backends(_pick(n, 5), _pick(d, 2), _pick(ell, 1), S(1_000_000, 50_000), seed, th)]
    if name == "exact-law":
        return [verify_exact_law(_pick(n, 6), _pick(d, 1), S(1_000_000, 50_000), seed, "kernel", th, cfg.caps)]
    if name == "purity":
        return [verify_purity(_pick(n, 20), _pick(d, 2), S(10_000, 500), seed, th)]
    if name == "hadamard":
        return [verify_hadamard(_pick(n, 10), _pick(d, 2), _pick(ell, 3), S(10_000, 1_000), seed)]
    if name == "meshulam-wallach":
        top = _pick(n, 5 if q else 6)
        return [verify_meshulam_wallach(list(range(3, top + 1)), (0, 1), cfg.caps)]
    raise AssertionError(name)  # pragma: no cover


def overall_verdict(reports: Sequence[Report]) -> str:
    verdicts = {r.verdict for r in reports}
    if "fail" in verdicts:
        return "fail"
    if "inconclusive" in verdicts:
        return "inconclusive"
    return "pass"
