"""Markdown report from a run directory's summary.csv."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .experiments import read_summary


def _get(summary, s, series, q):
    return summary.get((s, series, q))


def _row(cells) -> str:
    return "| " + " | ".join(str(c) for c in cells) + " |"


def _table(header, rows) -> list:
    return [_row(header), _row(["---"] * len(header)), *(_row(r) for r in rows), ""]


def build_report(run_dir) -> str:
    summary = read_summary(Path(run_dir) / "summary.csv")
    svals = sorted({k[0] for k in summary})
    lines = [f"# Run report: {Path(run_dir).name}", ""]

    lines += ["## Sharpness ordering (homodyne vs heterodyne, t >= 1)", ""]
    rows = []
    for s in svals:
        for quad in ("x", "y"):
            hom, het = _get(summary, s, f"hom_{quad}", "S"), _get(summary, s, f"het_{quad}", "S")
            if hom is None or het is None:
                continue
            late = hom["t"] >= 1
            frac = np.mean(hom["mean"][late] >= het["mean"][late])
            rows.append((f"{s:g}", quad.upper(), f"{frac:.2f}",
                         f"{hom['mean'][-1]:.4f}", f"{het['mean'][-1]:.4f}"))
    lines += _table(("s", "quadrature", "fraction S_hom >= S_het", "S_hom(t_end)", "S_het(t_end)"), rows)

    lines += ["## Compatibility", ""]
    rows = []
    for s in svals:
        for pair in ("het", "hom", "adiabatic"):
            c = _get(summary, s, pair, "C")
            if c is None:
                continue
            v = _get(summary, s, pair, "C_valid")
            rows.append((f"{s:g}", pair, f"{np.nanmin(c['mean']):.4g}", f"{c['mean'][-1]:.4g}",
                         "yes" if np.nanmin(c["mean"]) >= -1e-6 else "no", f"{v['mean'][-1]:.2f}"))
    lines += _table(("s", "pair", "min mean C", "mean C(t_end)", "mean C >= 0", "in-window fraction"), rows)

    lines += ["## Bias saturation gap (mu - |a|)/mu", ""]
    rows = []
    for s in svals:
        for name in sorted({k[1] for k in summary if k[0] == s and k[2] == "gap"}):
            g = summary[(s, name, "gap")]
            k5 = int(np.argmin(np.abs(g["t"] - 5.0)))
            rows.append((f"{s:g}", name, f"{g['mean'][k5]:.4f}", f"{g['mean'][-1]:.4f}"))
    lines += _table(("s", "scheme", "gap(t=5)", "gap(t_end)"), rows)

    lines += ["## Adiabatic vs heterodyne sharpness", ""]
    rows = []
    for s in svals:
        for quad in ("x", "y"):
            ad, het = _get(summary, s, f"adiabatic_{quad}", "S"), _get(summary, s, f"het_{quad}", "S")
            if ad is None or het is None:
                continue
            d = np.abs(ad["mean"] - het["mean"])
            k = int(np.nanargmax(d))
            rows.append((f"{s:g}", quad.upper(), f"{d[k]:.4f} at t={ad['t'][k]:.2f}", f"{d[-1]:.4f}",
                         "yes" if ad["mean"][1] > het["mean"][1] else "no"))
    lines += _table(("s", "quadrature", "max dS", "dS(t_end)", "adiabatic sharper early"), rows)

    lines += ["## Squeezing sensitivity (t_end)", ""]
    rows = []
    for name in sorted({k[1] for k in summary if k[2] == "S"}):
        vals = [_get(summary, s, name, "S") for s in svals]
        rows.append((name, *(f"{v['mean'][-1]:.4f}" if v is not None else "-" for v in vals)))
    lines += _table(("scheme", *(f"S at s={s:g}" for s in svals)), rows)
    return "\n".join(lines)
