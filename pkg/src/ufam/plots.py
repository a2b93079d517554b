"""Figure rendering for campaign reports.

Figures are written to files next to the delimited output; there is no
interactive display.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .catalog import ParamQuad, prefix_family_size  # noqa: E402

GOLDEN = (math.sqrt(5) - 1.0) / 2.0
FIG_WIDTH = 7.0

plt.rcParams["figure.figsize"] = [FIG_WIDTH, FIG_WIDTH * GOLDEN]
plt.rcParams["font.size"] = 10
plt.rcParams["axes.grid"] = True
plt.rcParams["grid.alpha"] = 0.3


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots()
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def save_bounds_figure(rows: list[dict], path) -> None:
    """Candidate construction sizes and computed values across a sweep in n.

    Rows are campaign result dicts sharing (k, s, q); one curve per candidate
    index i, plus markers for exact values (search or formula).
    """
    ns = sorted({row["n"] for row in rows if row.get("value") is not None})
    if not ns:
        raise ValueError("no plottable rows")
    k = rows[0]["k"]
    s = rows[0]["s"]
    q = rows[0]["q"]
    quad0 = ParamQuad(max(ns), k, s, q)
    fig, ax = _new_axes(f"k={k}, s={s}, q={q}", "ground size n", "family size")
    for i in range(0, k - quad0.r + 1):
        p_i, r_i = quad0.p + i * s, quad0.r + i
        sizes = [prefix_family_size(p_i, r_i, n, k) for n in ns]
        ax.plot(ns, sizes, marker=".", label=f"candidate A({p_i},{r_i})")
    exact_pts = [(row["n"], row["value"]) for row in rows
                 if row.get("kind") == "exact" and row.get("value") is not None]
    if exact_pts:
        xs, ys = zip(*sorted(set(exact_pts)))
        ax.plot(xs, ys, "ko", fillstyle="none", markersize=9, label="exact value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_crossover_figure(reports: list, path) -> None:
    """The three k=3 candidate sizes against n, one figure per (s, t)."""
    if not reports:
        raise ValueError("no crossover reports to plot")
    s, t = reports[0].s, reports[0].t
    pts = sorted((r.n, r.sizes) for r in reports if (r.s, r.t) == (s, t))
    ns = [n for n, _ in pts]
    fig, ax = _new_axes(f"k=3 candidates, s={s}, t={t}", "ground size n", "family size")
    for idx, label in enumerate(["A(t,1)", "A(s+t,2)", "A(2s+t,3)"]):
        ax.plot(ns, [sz[idx] for _, sz in pts], marker=".", label=label)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
