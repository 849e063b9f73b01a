"""Command line entry point: ``hypertrees {sample,expansion,verify}``.

Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 capacity exceeded, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb
from pathlib import Path

from .cohomology import expansion_constant, f2_cohomology_dim
from .complex import format_complex, read_complex
from .config import Caps, default_caps, parse_caps
from .errors import CapacityError, HypertreeError, InvalidInput
from .hypertree import BACKENDS, sample_union_complex
from .lab import SUITES, Report, SuiteConfig, _Timer, available_threads, overall_verdict, run_suite, skeleton_alpha

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_CAPACITY, EXIT_USAGE = 0, 1, 2, 3, 64
VERDICT_EXIT = {"pass": EXIT_PASS, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    subcommand: str
    n: int | None = None
    d: int | None = None
    ell: int | None = None
    k: int | None = None
    seed: int = 0
    samples: int | None = None
    backend: str = "auto"
    exact: bool = False
    caps: Caps = field(default_factory=Caps)
    threads: int = 1
    out: str | None = None
    csv: str | None = None
    quick: bool = False
    suite: str | None = None
    complex_file: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["caps"] = self.caps.as_dict()
        # output locations and worker count do not change results
        for key in ("out", "csv", "threads"):
            d.pop(key)
        return d


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _common(p: argparse.ArgumentParser, backends: tuple[str, ...]) -> None:
    p.add_argument("-n", type=_positive, help="number of vertices")
    p.add_argument("-d", type=_nonneg, help="dimension")
    p.add_argument("-l", dest="ell", type=_nonneg, help="percolation parameter l")
    p.add_argument("-k", type=_positive, help="number of independent copies")
    p.add_argument("--seed", type=_seed, default=0, help="64-bit seed (default 0)")
    p.add_argument("--samples", type=_positive, help="Monte Carlo draws")
    p.add_argument("--backend", choices=backends, default="auto" if "auto" in backends else "percolation")
    p.add_argument("--exact", action="store_true", help="print exact rationals instead of floats")
    p.add_argument("--caps", default="", help="capacity overrides, e.g. ambient=20,coset=24")
    p.add_argument("--threads", type=_positive, default=None, help="worker processes (default: all cores)")
    p.add_argument("--csv", help="also write a long-format CSV table to this file")
    p.add_argument("--out", help="output directory (complex files, reports, figures)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypertrees", description="Determinantal hypertrees: sampling, expansion, verification.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    ps = sub.add_parser("sample", help="draw a (union of) random hypertree(s) and write complex files")
    _common(ps, BACKENDS + ("both",))
    pe = sub.add_parser("expansion", help="expansion constants, skeleton alpha and F2 cohomology of a complex file")
    pe.add_argument("complex_file", help="complex in the 'n d' + faces text format")
    _common(pe, ("auto",))
    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite", choices=SUITES + ("all",))
    pv.add_argument("--quick", action="store_true", help="reduced sample sizes")
    _common(pv, ("auto",) + BACKENDS)
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    try:
        caps = parse_caps(args.caps, default_caps())
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(
        subcommand=args.subcommand, n=args.n, d=args.d, ell=args.ell, k=args.k, seed=args.seed,
        samples=args.samples, backend=args.backend, exact=args.exact, caps=caps,
        threads=args.threads or available_threads(), out=args.out, csv=args.csv,
        quick=getattr(args, "quick", False), suite=getattr(args, "suite", None),
        complex_file=getattr(args, "complex_file", None),
    )


def _num(x, exact: bool):
    if isinstance(x, Fraction):
        return str(x) if exact else float(x)
    return x


# -- subcommands ---------------------------------------------------------------

def cmd_sample(cfg: RunConfig) -> int:
    if cfg.n is None or cfg.d is None:
        raise UsageError("sample needs -n and -d")
    n, d, ell, k = cfg.n, cfg.d, cfg.ell or 0, cfg.k or 1
    if not 1 <= d < n:
        raise UsageError("need 1 <= d < n")
    backends = BACKENDS if cfg.backend == "both" else (cfg.backend,)
    if cfg.backend == "auto":
        backends = ("percolation",)
    out = Path(cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for be in backends:
        if be == "kernel" and comb(n, d + 1) > cfg.caps.dense:
            raise CapacityError("dense hypertree kernel", comb(n, d + 1), cfg.caps.dense)
        K = sample_union_complex(n, d, ell, k, cfg.seed, backend=be).complex
        name = f"hypertree_n{n}_d{d}_l{ell}_k{k}_s{cfg.seed}"
        if len(backends) > 1:
            name += f"_{be}"
        path = out / f"{name}.txt"
        comment = f"n={n} d={d} l={ell} k={k} seed={cfg.seed} backend={be}"
        path.write_text(format_complex(K, comment))
        written.append({"file": str(path), "backend": be, "top_faces": len(K),
                        "hypertree_size": comb(n - 1, d)})
    summary = {"config": cfg.to_dict(), "files": written}
    if len(backends) > 1:
        summary["note"] = ("both backends sample the same law T_{n,d,l}; the two files are independent "
                           "draws, see 'verify backends' for the distributional check")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_PASS


def cmd_expansion(cfg: RunConfig) -> int:
    try:
        K = read_complex(cfg.complex_file)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    if not len(K):
        raise UsageError("complex has no top faces; weights and expansion are undefined")
    rep = Report("expansion", {"config": cfg.to_dict(), "n": K.n, "d": K.d, "top_faces": len(K)}, cfg.seed)
    code = EXIT_PASS
    with _Timer() as t:
        dims = [f2_cohomology_dim(K, i) for i in range(K.d)]
        rep.statistics.append({"name": "f2_cohomology_dims", "value": dims})
        hs = []
        for i in range(K.d):
            try:
                h = expansion_constant(K, i, cfg.caps)
                hs.append(h)
                rep.statistics.append({"name": "expansion", "i": i, "convention": "augmented",
                                       "value": _num(h, cfg.exact)})
                if i == 0:
                    # B^0 = {0} instead of {0, all-ones}; reported alongside, not used for the minimum
                    h0 = expansion_constant(K, 0, cfg.caps, augmented=False)
                    rep.statistics.append({"name": "expansion", "i": 0, "convention": "plain",
                                           "value": _num(h0, cfg.exact)})
            except CapacityError as exc:
                code = EXIT_CAPACITY
                rep.statistics.append({"name": "capacity", "i": i, "detail": str(exc)})
        if code == EXIT_PASS and hs:
            rep.statistics.append({"name": "expansion_min", "value": _num(min(hs), cfg.exact)})
        if K.d >= 1:
            try:
                rep.statistics.append({"name": "skeleton_alpha", "value": _num(skeleton_alpha(K, cfg.caps), cfg.exact)})
            except CapacityError as exc:
                code = EXIT_CAPACITY
                rep.statistics.append({"name": "capacity", "detail": str(exc)})
        rep.verdict = "pass" if code == EXIT_PASS else "inconclusive"
    rep.wall_time_ms = round(t.ms, 3)
    _emit([rep], cfg)
    return code


def cmd_verify(cfg: RunConfig) -> int:
    scfg = SuiteConfig(n=cfg.n, d=cfg.d, ell=cfg.ell, k=cfg.k, samples=cfg.samples, seed=cfg.seed,
                       backend=cfg.backend, threads=cfg.threads, quick=cfg.quick, caps=cfg.caps)
    reports = run_suite(cfg.suite, scfg)
    for r in reports:
        r.params["config"] = cfg.to_dict()
    _emit(reports, cfg)
    verdict = overall_verdict(reports)
    if verdict == "inconclusive":
        # inconclusive purely because of capacity caps -> the capacity code
        stuck = [r for r in reports if r.verdict == "inconclusive"]
        if all(any(s.get("name") == "capacity" for s in r.statistics) for r in stuck):
            return EXIT_CAPACITY
    return VERDICT_EXIT[verdict]


def _emit(reports: list[Report], cfg: RunConfig) -> None:
    if len(reports) == 1:
        text = reports[0].to_json()
    else:
        text = json.dumps({"verdict": overall_verdict(reports), "reports": [r.to_dict() for r in reports]},
                          indent=2, sort_keys=True)
    print(text)
    table = "".join(r.to_csv() if i == 0 else r.to_csv().split("\n", 1)[1] for i, r in enumerate(reports))
    if cfg.csv:
        Path(cfg.csv).write_text(table)
    if cfg.out:
        from .plotting import plot_report
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = cfg.suite or cfg.subcommand
        (out / f"{stem}.json").write_text(text + "\n")
        (out / f"{stem}.csv").write_text(table)
        for r in reports:
            plot_report(r, out)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        if cfg.subcommand == "sample":
            return cmd_sample(cfg)
        if cfg.subcommand == "expansion":
            return cmd_expansion(cfg)
        return cmd_verify(cfg)
    except UsageError as exc:
        print(f"hypertrees: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"hypertrees: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InvalidInput as exc:
        print(f"hypertrees: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypertreeError as exc:  # pragma: no cover - unexpected numerical trouble
        print(f"hypertrees: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
