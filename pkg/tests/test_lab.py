from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import example, given, settings

from hypertrees import CapacityError, Caps, Complex, InvalidInput, Report, skeleton_alpha
from hypertrees.complex import edge_norm, norm
from hypertrees.complex import Cochain
from hypertrees.lab import (
    SUITES,
    SuiteConfig,
    chi_square_gof,
    chi_square_two_sample,
    hypertree_draws,
    overall_verdict,
    resolve_backend,
    run_suite,
    theorem_trend,
    union_draws,
    verify_bernstein,
    verify_count_law,
    verify_exact_law,
    verify_hadamard,
    verify_links,
    verify_marginals,
    verify_measure,
    verify_meshulam_wallach,
    verify_purity,
    verify_union_bound,
)
from oracles import brute_skeleton_alpha
from strategies import complexes


def test_report_serialization_is_deterministic():
    r = Report("x", {"b": 1, "a": Fraction(1, 3)}, 7, [{"name": "s", "value": np.int64(3), "q": Fraction(2, 5)}],
               p_value=0.5, verdict="pass")
    a, b = r.to_json(), r.to_json()
    assert a == b
    data = json.loads(a)
    assert data["params"]["a"] == "1/3" or data["params"]["a"] == pytest.approx(1 / 3)
    rows = list(csv.reader(io.StringIO(r.to_csv())))
    assert rows[0] == ["experiment", "row", "stat", "field", "value"]
    assert ["x", "0", "s", "value", "3"] in rows
    assert r.passed and r.stat("s")["value"] == 3
    with pytest.raises(KeyError):
        r.stat("missing")
    with pytest.raises(InvalidInput):
        Report("x", {}, None, verdict="maybe")


def test_overall_verdict():
    mk = lambda v: Report("x", {}, None, verdict=v)  # noqa: E731
    assert overall_verdict([mk("pass"), mk("pass")]) == "pass"
    assert overall_verdict([mk("pass"), mk("inconclusive")]) == "inconclusive"
    assert overall_verdict([mk("fail"), mk("inconclusive")]) == "fail"


def test_chi_square_helpers():
    stat, df, p = chi_square_gof([50, 50], [0.5, 0.5])
    assert stat == 0 and df == 1 and p == 1
    # impossible outcome observed -> p = 0
    assert chi_square_gof([10, 1], [1.0, 0.0])[2] == 0
    # small expected bins are pooled rather than dropped
    _, df, _ = chi_square_gof([90, 5, 3, 2], [0.9, 0.04, 0.03, 0.03])
    assert df == 1
    assert chi_square_two_sample({1: 100, 2: 100}, {1: 100, 2: 100})[2] == pytest.approx(1)
    assert chi_square_two_sample({1: 200}, {2: 200})[2] < 1e-10


def test_resolve_backend():
    assert resolve_backend(5, 2, 0) == "kernel"
    assert resolve_backend(20, 2, 0) == "percolation"
    with pytest.raises(InvalidInput):
        resolve_backend(5, 2, 0, "magic")


def test_draws_independent_of_thread_count():
    a = hypertree_draws(7, 2, 1, 5000, seed=3, threads=1)
    b = hypertree_draws(7, 2, 1, 5000, seed=3, threads=2)
    assert np.array_equal(a, b)
    u = union_draws(6, 1, 0, 3, 10, seed=2)
    assert u.shape == (10, 3, 15)


def test_skeleton_alpha_k4(k4_graph):
    assert skeleton_alpha(k4_graph) == brute_skeleton_alpha(4, 1, k4_graph.top_faces) == 0


@given(complexes(max_n=6, dims=(1, 2, 3)))
@example(Complex(5, 1, ((1, 2), (1, 4), (1, 5))))
def test_skeleton_alpha_matches_brute_force(K):
    a = skeleton_alpha(K)
    ref = brute_skeleton_alpha(K.n, K.d, K.top_faces)
    assert ref - Fraction(1, 2 ** 70) <= a <= ref
    # the defining inequality holds at alpha for every vertex set
    for r in range(1, K.n + 1):
        for A in combinations(range(1, K.n + 1), r):
            w = norm(K, Cochain(0, {(v,) for v in A}))
            assert edge_norm(K, A) <= 4 * (w * w + a * w)


@settings(max_examples=400)
@given(complexes(max_n=7, dims=(1,)))
def test_skeleton_alpha_graphs(K):
    ref = brute_skeleton_alpha(K.n, K.d, K.top_faces)
    assert ref - Fraction(1, 2 ** 70) <= skeleton_alpha(K) <= ref


def test_skeleton_alpha_capacity():
    with pytest.raises(CapacityError):
        skeleton_alpha(Complex.complete(8, 1), Caps(skeleton=6))


def test_verify_measure_small():
    r = verify_measure(4, 1)
    assert r.passed and r.stat("hypertrees")["value"] == 16
    r = verify_measure(5, 2)
    assert r.passed
    assert r.stat("sum_torsion_squared")["value"] == 125
    assert r.stat("candidates")["value"] == 210
    assert verify_measure(5, 2, all_candidates=False).passed
    assert verify_measure(7, 2, Caps(enumeration=10)).verdict == "inconclusive"


def test_verify_marginals_degenerate():
    r = verify_marginals(3, 2, 0, 100, seed=1)
    assert r.passed and r.stat("marginal")["empirical"] == 1.0


def test_marginal_targets():
    r = verify_marginals(10, 2, 0, 2000, seed=3, faces_checked=3)
    assert r.stat("marginal")["target"] == pytest.approx(3 / 10)
    r = verify_marginals(12, 2, 3, 2000, seed=3, faces_checked=3)
    # (d + 1 + l) / (n + l) = 6/15
    assert r.stat("marginal")["target"] == pytest.approx(6 / 15)
    assert r.bound == "2/5"


def test_count_law_single_face_and_star():
    r = verify_count_law(6, 2, 1, [(1, 2, 3)], 5000, seed=2)
    assert r.stat("pmf")["value"] == pytest.approx([1 - 4 / 7, 4 / 7])
    assert r.passed
    # all faces containing the edge {1,2}: purity puts no mass at 0
    star = [(1, 2, v) for v in range(3, 7)]
    r = verify_count_law(6, 2, 0, star, 5000, seed=2)
    assert r.stat("pmf")["value"][0] == pytest.approx(0, abs=1e-12)
    assert r.stat("histogram")["value"][0] == 0
    with pytest.raises(InvalidInput):
        verify_count_law(6, 2, 0, [(1, 2)], 10, seed=0)


def test_links_small():
    assert verify_links(5, 2, 0, (5,), 20_000, seed=4).passed
    r = verify_links(5, 2, 0, (4, 5), 20_000, seed=4)
    assert r.stat("comparison") == {"name": "comparison", "n": 3, "d": 0, "l": 2}
    assert r.passed
    with pytest.raises(InvalidInput):
        verify_links(5, 2, 0, (1, 2, 3), 10, seed=0)


def test_union_bound_small():
    r = verify_union_bound(6, 1, 0, 2, 5000, seed=1, sets=10)
    assert r.passed
    singles = [s for s in r.statistics if s.get("name") == "set" and len(s["A"]) == 1]
    assert all(s["bound"] == pytest.approx(2 * 2 / 6) for s in singles)


def test_hadamard_and_bernstein_small():
    assert verify_hadamard(7, 2, 1, 200, seed=0).passed
    r = verify_bernstein(10, 2, 0, 60, 3000, seed=1)
    assert r.passed and len([s for s in r.statistics if s.get("name") == "tail"]) == 3


def test_exact_law_and_purity_small():
    assert verify_exact_law(5, 1, 20_000, seed=2).passed
    r = verify_purity(12, 2, 300, seed=0)
    assert r.passed and r.stat("draws")["value"] == 300


def test_meshulam_wallach_report():
    r = verify_meshulam_wallach([3, 4, 5])
    assert r.passed and len([s for s in r.statistics if s["name"] == "scan"]) == 6


def test_trend_trees():
    r = theorem_trend(1, 4, [8, 16, 32], 30, seed=0)
    fr = [s["value"] for s in r.statistics if s["name"] == "vanishing_fraction"]
    assert fr == [1.0, 1.0, 1.0] and r.passed


def test_trend_single_tree_expands():
    r = theorem_trend(1, 1, [6], 20, seed=5)
    e = r.stat("expansion", n=6)
    assert e["positive_fraction"] == 1.0 and e["min"] > 0


@pytest.mark.parametrize("suite", sorted(set(SUITES) - {"trend", "links", "backends", "exact-law"}))
def test_quick_suites_pass(suite):
    reports = run_suite(suite, SuiteConfig(quick=True, seed=1, samples=2000))
    assert overall_verdict(reports) == "pass", [r.to_dict() for r in reports]


def test_run_suite_rejects_unknown():
    with pytest.raises(InvalidInput):
        run_suite("nope", SuiteConfig())
