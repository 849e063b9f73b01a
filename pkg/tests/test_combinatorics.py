from __future__ import annotations

from itertools import combinations
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypertrees.combinatorics import (
    boundary_ranks,
    colex_masks,
    colex_rank,
    colex_unrank,
    face_index,
    faces,
    next_colex_mask,
)


@given(st.integers(1, 8).flatmap(lambda k: st.sets(st.integers(1, 40), min_size=k, max_size=k)))
def test_rank_unrank_roundtrip(s):
    f = tuple(sorted(s))
    assert colex_unrank(colex_rank(f), len(f)) == f


@pytest.mark.parametrize("n,k", [(5, 1), (6, 2), (7, 3), (8, 4)])
def test_faces_are_colex_ordered_and_complete(n, k):
    fs = faces(n, k)
    assert len(fs) == comb(n, k)
    assert set(fs) == set(combinations(range(1, n + 1), k))
    # colex: compare reversed tuples
    assert list(fs) == sorted(fs, key=lambda f: f[::-1])
    assert all(colex_rank(f) == i for i, f in enumerate(fs))
    assert face_index(n, k) == {f: i for i, f in enumerate(fs)}


def test_colex_prefix_property():
    # faces on [n] are exactly the first C(n,k) ranks for every larger ground set
    assert faces(7, 3)[: comb(5, 3)] == faces(5, 3)


def test_boundary_ranks_match_subfaces():
    b = boundary_ranks(6, 3)
    for f, row in zip(faces(6, 3), b.tolist()):
        assert sorted(row) == sorted(colex_rank(s) for s in combinations(f, 2))


def test_mask_enumeration_matches_combinations():
    masks = list(colex_masks(7, 3))
    assert len(masks) == comb(7, 3)
    assert all(bin(m).count("1") == 3 for m in masks)
    assert masks == sorted(masks)
    assert masks[3:9] == list(colex_masks(7, 3, 3, 9))
    assert next_colex_mask(0b0111) == 0b1011
