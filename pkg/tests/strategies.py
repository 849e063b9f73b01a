"""Hypothesis strategies shared by the test modules."""

from __future__ import annotations

from itertools import combinations

from hypothesis import strategies as st

from hypertrees import Complex


@st.composite
def complexes(draw, max_n: int = 6, dims=(1, 2), nonempty: bool = True) -> Complex:
    d = draw(st.sampled_from(dims))
    n = draw(st.integers(d + 1, max_n))
    ground = list(combinations(range(1, n + 1), d + 1))
    tops = draw(st.lists(st.sampled_from(ground), unique=True, min_size=1 if nonempty else 0,
                         max_size=len(ground)))
    return Complex(n, d, tuple(sorted(tops)))
