"""Figures for experiment reports (rendered off-screen to files)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .lab import Report  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
}


def _rows(report: Report, name: str) -> list[dict]:
    return [r for r in report.statistics if r.get("name") == name]


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def _marginals(report: Report, path: Path) -> Path:
    rows = _rows(report, "marginal")
    fig, ax = plt.subplots()
    x = range(len(rows))
    ax.errorbar(x, [r["empirical"] for r in rows], yerr=[4 * r["se"] for r in rows], fmt="o", ms=3,
                capsize=2, label="empirical, 4 SE")
    ax.axhline(rows[0]["target"], color="C3", lw=1, label="kernel diagonal")
    ax.set_xlabel("face")
    ax.set_ylabel("P(face in T)")
    ax.legend(frameon=False)
    return _save(fig, path)


def _count_law(report: Report, path: Path) -> Path:
    hist = report.stat("histogram")["value"]
    pmf = report.stat("pmf")["value"]
    total = sum(hist)
    fig, ax = plt.subplots()
    ax.bar(range(len(hist)), [h / total for h in hist], color="C0", alpha=0.6, label="empirical")
    ax.plot(range(len(pmf)), pmf, "o-", color="C3", ms=3, label="Poisson-binomial")
    ax.set_xlabel("|T & A|")
    ax.set_ylabel("probability")
    ax.legend(frameon=False)
    return _save(fig, path)


def _bernstein(report: Report, path: Path) -> Path:
    rows = _rows(report, "tail")
    fig, ax = plt.subplots()
    eps = [r["eps"] for r in rows]
    ax.semilogy(eps, [max(r["bound"], 1e-300) for r in rows], "s--", color="C3", label="bound")
    freq = [r["frequency"] for r in rows]
    ax.semilogy([e for e, f in zip(eps, freq) if f > 0], [f for f in freq if f > 0], "o", label="empirical")
    ax.set_xlabel("eps")
    ax.set_ylabel("tail frequency")
    ax.legend(frameon=False)
    return _save(fig, path)


def _union_bound(report: Report, path: Path) -> Path:
    rows = _rows(report, "set")
    fig, ax = plt.subplots()
    b = [min(r["bound"], 1.0) for r in rows]
    ax.scatter(b, [r["empirical"] for r in rows], s=10)
    ax.plot([0, 1], [0, 1], color="C3", lw=1)
    ax.set_xlabel("bound (clipped at 1)")
    ax.set_ylabel("empirical P(A in union)")
    return _save(fig, path)


def _trend(report: Report, path: Path) -> Path:
    rows = _rows(report, "vanishing_fraction")
    fig, ax = plt.subplots()
    ax.errorbar([r["n"] for r in rows], [r["value"] for r in rows], yerr=[2 * r["se"] for r in rows],
                fmt="o-", capsize=3, label="F2 cohomology vanishes")
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("n")
    ax.set_ylabel("fraction of draws")
    ax.legend(frameon=False, loc="lower right")
    return _save(fig, path)


PLOTTERS = {
    "marginals": _marginals,
    "count-law": _count_law,
    "bernstein": _bernstein,
    "union-bound": _union_bound,
    "trend": _trend,
}


def plot_report(report: Report, out_dir, stem: str | None = None) -> list[Path]:
    """Render the figure for ``report`` into ``out_dir``; returns written paths."""
    fn = PLOTTERS.get(report.name)
    if fn is None:
        return []
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        return [fn(report, out / f"{stem or report.name}.png")]
