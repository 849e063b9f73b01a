from __future__ import annotations

import json
import subprocess
import sys
import time
from math import comb

import pytest

from hypertrees import Complex, read_complex, write_complex
from hypertrees.cli import EXIT_CAPACITY, EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def test_sample_union(tmp_path, capsys):
    code, out = run(["sample", "-n", 20, "-d", 2, "-k", 5, "--seed", 7, "--out", tmp_path], capsys)
    assert code == EXIT_PASS
    info = json.loads(out)
    (f,) = info["files"]
    K = read_complex(f["file"])
    assert f["top_faces"] == len(K) and K.n == 20 and K.d == 2
    assert comb(19, 2) < len(K) <= 5 * comb(19, 2)


def test_sample_tree(tmp_path, capsys):
    code, out = run(["sample", "-n", 6, "-d", 1, "--seed", 1, "--out", tmp_path], capsys)
    assert code == EXIT_PASS
    K = read_complex(json.loads(out)["files"][0]["file"])
    assert len(K) == 5 and K.is_pure()


def test_sample_both_backends(tmp_path, capsys):
    code, out = run(["sample", "-n", 7, "-d", 2, "-l", 2, "--backend", "both", "--out", tmp_path], capsys)
    info = json.loads(out)
    assert code == EXIT_PASS and len(info["files"]) == 2 and "note" in info
    assert {f["backend"] for f in info["files"]} == {"kernel", "percolation"}


def test_sample_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["sample", "-n", 9, "-d", 2, "-k", 2, "--seed", 3, "--out", a], capsys)
    run(["sample", "-n", 9, "-d", 2, "-k", 2, "--seed", 3, "--out", b, "--threads", 2], capsys)
    name = "hypertree_n9_d2_l0_k2_s3.txt"
    assert (a / name).read_text() == (b / name).read_text()


def test_expansion_k4(tmp_path, capsys):
    p = tmp_path / "k4.txt"
    write_complex(Complex.complete(4, 1), p)
    code, out = run(["expansion", p, "--exact"], capsys)
    rep = json.loads(out)
    rows = {(s["name"], s.get("convention")): s for s in rep["statistics"]}
    assert code == EXIT_PASS
    assert rows[("expansion", "augmented")]["value"] == "4/3"
    assert rows[("expansion", "plain")]["value"] == "0"
    assert rows[("skeleton_alpha", None)]["value"] == "0"


def test_expansion_rp2(tmp_path, capsys, rp2):
    p = tmp_path / "rp2.txt"
    write_complex(rp2, p)
    code, out = run(["expansion", p, "--exact", "--csv", tmp_path / "e.csv"], capsys)
    rep = json.loads(out)
    h1 = [s for s in rep["statistics"] if s["name"] == "expansion" and s["i"] == 1]
    assert code == EXIT_PASS and h1[0]["value"] == "0"
    assert next(s for s in rep["statistics"] if s["name"] == "f2_cohomology_dims")["value"] == [0, 1]
    assert (tmp_path / "e.csv").read_text().startswith("experiment,row,stat,field,value")


def test_expansion_empty_is_usage_error(tmp_path, capsys):
    p = tmp_path / "e.txt"
    p.write_text("5 2\n")
    assert run(["expansion", p], capsys)[0] == EXIT_USAGE


def test_expansion_capacity(tmp_path, capsys):
    p = tmp_path / "big.txt"
    write_complex(Complex.complete(9, 2), p)
    code, out = run(["expansion", p, "--caps", "ambient=20"], capsys)
    assert code == EXIT_CAPACITY
    assert any(s["name"] == "capacity" for s in json.loads(out)["statistics"])


@pytest.mark.parametrize("argv", [
    ["sample", "-n", "5"],
    ["sample", "-n", "5", "-d", "7"],
    ["sample", "-n", "5", "-d", "2", "--caps", "bogus=1"],
    ["expansion", "/nonexistent/file.txt"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE


def test_argparse_errors_exit_64():
    for argv in (["verify", "nosuchsuite"], ["sample", "--seed", "-1"], []):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == EXIT_USAGE


def test_verify_measure(capsys, tmp_path):
    code, out = run(["verify", "measure", "-n", 5, "-d", 2, "--exact", "--out", tmp_path], capsys)
    rep = json.loads(out)
    assert code == EXIT_PASS and rep["verdict"] == "pass"
    stats = {s["name"]: s for s in rep["statistics"]}
    assert stats["sum_torsion_squared"]["value"] == 125
    assert stats["sum_weights"]["value"] in (1, "1")
    assert (tmp_path / "measure.json").exists() and (tmp_path / "measure.csv").exists()


def test_verify_marginals_writes_figure(capsys, tmp_path):
    code, out = run(["verify", "marginals", "-n", 10, "-d", 2, "--samples", 100000, "--seed", 3,
                     "--out", tmp_path], capsys)
    assert code == EXIT_PASS
    assert (tmp_path / "marginals.png").stat().st_size > 0


def test_verify_capacity_exit(capsys):
    code, _ = run(["verify", "measure", "-n", 7, "-d", 2, "--caps", "enumeration=100"], capsys)
    assert code == EXIT_CAPACITY


def test_verify_failure_exit(capsys, monkeypatch):
    from hypertrees import cli
    from hypertrees.lab import Report

    monkeypatch.setattr(cli, "run_suite", lambda name, cfg: [Report("x", {}, 0, verdict="fail")])
    assert run(["verify", "measure"], capsys)[0] == EXIT_FAIL


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hypertrees", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "sample" in res.stdout


@pytest.mark.slow
def test_verify_all_quick_under_five_minutes(capsys):
    t0 = time.perf_counter()
    code, out = run(["verify", "all", "--quick", "--seed", 1], capsys)
    elapsed = time.perf_counter() - t0
    rep = json.loads(out)
    assert code == EXIT_PASS, rep["verdict"]
    assert elapsed < 300, elapsed
