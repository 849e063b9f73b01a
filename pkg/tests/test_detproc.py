from __future__ import annotations

import itertools
from fractions import Fraction
from math import exp

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from hypertrees import InvalidInput, NumericalFailure, PositiveContraction, bernstein_bound, count_law, sample, sample_union, subset_probability
from hypertrees.detproc import (
    child_seed,
    poisson_binomial,
    projection_chain_compiled,
    projection_chain_sparse,
    read_matrix,
    sample_batch,
    sample_union_batch,
    write_matrix,
)
from hypertrees.hypertree import kernel
from oracles import dpp_outcome_law, poisson_binomial_brute

HALF = [[Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 2), Fraction(1, 2)]]


def _random_contraction(rng: np.random.Generator, m: int) -> np.ndarray:
    v, _ = np.linalg.qr(rng.normal(size=(m, m)))
    return (v * rng.uniform(0, 1, m)) @ v.T


def test_subset_probability_examples():
    Q = PositiveContraction(HALF)
    assert subset_probability(Q, []) == 1
    assert subset_probability(Q, [0, 1]) == 0
    assert subset_probability(Q, [1]) == Fraction(1, 2)


@given(st.integers(0, 2**32 - 1))
def test_hadamard_inequality(seed):
    rng = np.random.default_rng(seed)
    Q = PositiveContraction(_random_contraction(rng, 7))
    A = [j for j in range(7) if rng.random() < 0.5]
    assert subset_probability(Q, A) <= np.prod(Q.diagonal()[A]) + 1e-12


def test_rejects_non_contractions():
    with pytest.raises(InvalidInput):
        PositiveContraction([[2.0]])
    with pytest.raises(InvalidInput):
        PositiveContraction([[0.5, 0.1], [0.2, 0.5]])
    with pytest.raises(InvalidInput):
        PositiveContraction([[1.0, 0.0]])
    with pytest.raises(InvalidInput):
        PositiveContraction(np.eye(2), ground=["a", "a"])


def test_identity_always_full():
    Q = PositiveContraction(np.eye(5), ground="abcde")
    assert all(sample(Q, s) == frozenset("abcde") for s in range(20))


def test_rank_one_projection_law():
    Q = PositiveContraction(HALF)
    draws = sample_batch(Q, 20_000, seed=11).draws
    assert all(len(x) == 1 for x in draws)
    ones = sum(x == frozenset({0}) for x in draws)
    assert stats.binomtest(ones, len(draws), 0.5).pvalue > 0.001


def test_projection_size_fixed():
    P = kernel(7, 2).contraction()
    batch = sample_batch(P, 500, seed=3)
    assert set(batch.indicators.sum(axis=1)) == {15}


def test_outcome_law_matches_exact_atoms():
    rng = np.random.default_rng(7)
    m = 5
    Qm = _random_contraction(rng, m)
    law = dpp_outcome_law(Qm)
    assert sum(law.values()) == pytest.approx(1)
    batch = sample_batch(PositiveContraction(Qm), 60_000, seed=9)
    masks = batch.indicators.astype(np.int64) @ (1 << np.arange(m))
    obs = np.bincount(masks, minlength=1 << m)
    exp_ = np.array([law[frozenset(j for j in range(m) if k >> j & 1)] for k in range(1 << m)])
    keep = exp_ * len(masks) >= 5
    o, e = obs[keep], exp_[keep] * len(masks)
    e *= o.sum() / e.sum()
    assert stats.chisquare(o, e).pvalue > 0.001


def test_determinism_and_chunk_independence():
    Q = PositiveContraction(_random_contraction(np.random.default_rng(1), 6))
    a = sample_batch(Q, 300, seed=5).indicators
    b = sample_batch(Q, 300, seed=5).indicators
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_batch(Q, 300, seed=6).indicators)
    assert sample(Q, 5) == sample_batch(Q, 1, seed=5).draws[0]


def test_frozen_draws():
    Q = PositiveContraction(HALF)
    assert sample(Q, 3) == {0}
    assert sample(Q, 4) == {1}


def test_union():
    Q = PositiveContraction(_random_contraction(np.random.default_rng(2), 6))
    labeled, union = sample_union(Q, 1, seed=8)
    assert union == {e for _, e in labeled}
    for s in range(10):
        labeled, union = sample_union(Q, 3, seed=s)
        assert len(union) <= len(labeled)
        assert union == {e for _, e in labeled}
        assert {c for c, _ in labeled} <= {1, 2, 3}
    b = sample_union_batch(Q, 3, 50, seed=1)
    assert b.indicators.shape == (50, 3, 6) and b.copies == 3
    assert np.array_equal(b.indicators[:, 1], sample_batch(Q, 50, child_seed(1, 1)).indicators)


def test_count_law_examples():
    Q = PositiveContraction(np.eye(4))
    assert count_law(Q, [0, 1, 2]) == pytest.approx([0, 0, 0, 1])
    assert count_law(PositiveContraction(HALF), [0, 1]) == pytest.approx([0, 1, 0])


@given(st.integers(0, 2**32 - 1))
def test_count_law_mean_and_brute(seed):
    rng = np.random.default_rng(seed)
    Qm = _random_contraction(rng, 6)
    Q = PositiveContraction(Qm)
    A = [0, 2, 3, 5]
    pmf = count_law(Q, A)
    assert pmf.sum() == pytest.approx(1)
    assert pmf @ np.arange(len(pmf)) == pytest.approx(np.trace(Q.submatrix(A)))
    lam = np.clip(np.linalg.eigvalsh(Q.submatrix(A)), 0, 1)
    assert pmf == pytest.approx(poisson_binomial_brute(lam), abs=1e-12)


def test_poisson_binomial_matches_brute():
    p = [0.1, 0.5, 0.9, 0.3, 0.0, 1.0]
    assert poisson_binomial(p) == pytest.approx(poisson_binomial_brute(p), abs=1e-14)


def test_bernstein_bound():
    assert bernstein_bound(100, 0) == 2
    assert bernstein_bound(100, 1) == pytest.approx(2 * exp(-25))
    assert bernstein_bound(10, 0.5) == pytest.approx(2 * exp(-0.25 * 10 / 4))


def test_chains_agree_in_law():
    # compiled and sparse chains on the same factor, compared to the fixed size and to each other
    K = kernel(6, 2)
    F = K.factor
    counts = {}
    for name, chain in (("compiled", projection_chain_compiled), ("sparse", projection_chain_sparse)):
        c = {}
        for r in range(3000):
            x = tuple(chain(F, K.rank, np.random.default_rng(r)).tolist())
            assert len(x) == K.rank
            c[x] = c.get(x, 0) + 1
        counts[name] = c
    keys = sorted(set(counts["compiled"]) | set(counts["sparse"]))
    # pool sparse cells
    tab = np.array([[counts[n].get(k, 0) for k in keys] for n in counts])
    total = tab.sum(axis=0)
    big = total >= 10
    tab = np.column_stack([tab[:, big], tab[:, ~big].sum(axis=1)])
    assert stats.chi2_contingency(tab)[1] > 0.001


def test_chain_rejects_bad_rank():
    K = kernel(5, 1)
    with pytest.raises(NumericalFailure):
        projection_chain_compiled(K.factor, K.rank + 1, np.random.default_rng(0))


def test_matrix_file_roundtrip(tmp_path):
    Q = PositiveContraction(HALF, ground=["x", "y"])
    write_matrix(Q, tmp_path / "q.txt")
    R = read_matrix(tmp_path / "q.txt")
    assert np.allclose(R.matrix, Q.matrix)
    assert subset_probability(R, list(R.ground)[:1]) == pytest.approx(0.5)


def test_exact_vs_float_probability():
    P = kernel(5, 2, 1)
    Q = P.contraction(exact=True)
    A = list(itertools.islice(Q.ground, 4))
    assert float(subset_probability(Q, A)) == pytest.approx(subset_probability(Q, A, exact=False))


@pytest.mark.parametrize("mean,eps", [(-1.0, 0.5), (10.0, 1.5), (10.0, -0.1)])
def test_bernstein_rejects_bad_arguments(mean, eps):
    with pytest.raises(InvalidInput):
        bernstein_bound(mean, eps)
