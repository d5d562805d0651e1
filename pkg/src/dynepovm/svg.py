"""Minimal native SVG line plots and heatmaps."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=64, right=150, top=36, bottom=48)


def _fmt(x: float) -> str:
    return f"{x:.4g}"


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, n)


def _frame(title, xlabel, ylabel, x0, x1, y0, y1, px, py) -> list:
    left, top = MARGIN["left"], MARGIN["top"]
    w = WIDTH - left - MARGIN["right"]
    h = HEIGHT - top - MARGIN["bottom"]
    out = [f'<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="#333"/>',
           f'<text x="{left + w / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
           f'<text x="{left + w / 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
           f'<text x="16" y="{top + h / 2}" text-anchor="middle" font-size="13" '
           f'transform="rotate(-90 16 {top + h / 2})">{escape(ylabel)}</text>']
    for t in _ticks(x0, x1):
        out.append(f'<text x="{px(t):.1f}" y="{top + h + 16}" text-anchor="middle" font-size="11">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{left - 6}" y="{py(t) + 4:.1f}" text-anchor="end" font-size="11">{_fmt(t)}</text>')
    return out


def _wrap(body: list) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>", ""])


def line_plot(series: dict, title: str = "", xlabel: str = "t", ylabel: str = "",
              bands: dict | None = None) -> str:
    """``series`` maps label -> (x, y); ``bands`` maps label -> (x, lo, hi) shaded."""
    bands = bands or {}
    xs = [np.asarray(x, float) for x, _ in series.values()]
    ys = [np.asarray(y, float) for _, y in series.values()]
    ys += [np.asarray(b[1], float) for b in bands.values()] + [np.asarray(b[2], float) for b in bands.values()]
    finite = np.concatenate([y[np.isfinite(y)] for y in ys] or [np.zeros(1)])
    x0, x1 = float(min(x.min() for x in xs)), float(max(x.max() for x in xs))
    y0, y1 = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    if x1 - x0 < 1e-12:
        x1 = x0 + 1.0
    left, top = MARGIN["left"], MARGIN["top"]
    w = WIDTH - left - MARGIN["right"]
    h = HEIGHT - top - MARGIN["bottom"]

    def px(x):
        return left + (x - x0) / (x1 - x0) * w

    def py(y):
        return top + h - (y - y0) / (y1 - y0) * h

    body = _frame(title, xlabel, ylabel, x0, x1, y0, y1, px, py)
    labels = list(series)
    for label, (x, lo, hi) in bands.items():
        color = PALETTE[labels.index(label) % len(PALETTE)] if label in labels else "#999"
        x, lo, hi = (np.asarray(a, float) for a in (x, lo, hi))
        ok = np.isfinite(lo) & np.isfinite(hi)
        pts = [f"{px(a):.1f},{py(b):.1f}" for a, b in zip(x[ok], hi[ok])]
        pts += [f"{px(a):.1f},{py(b):.1f}" for a, b in zip(x[ok][::-1], lo[ok][::-1])]
        if pts:
            body.append(f'<polygon points="{" ".join(pts)}" fill="{color}" fill-opacity="0.15" stroke="none"/>')
    for k, (label, (x, y)) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        x, y = np.asarray(x, float), np.asarray(y, float)
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in zip(x[ok], y[ok]))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        ly = top + 14 + 18 * k
        body.append(f'<line x1="{left + w + 10}" y1="{ly}" x2="{left + w + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{left + w + 34}" y="{ly + 4}" font-size="12">{escape(str(label))}</text>')
    return _wrap(body)


def _color(t: float) -> str:
    """Diverging blue-white-red for t in [-1, 1]."""
    t = float(np.clip(t, -1, 1))
    if t >= 0:
        r, g, b = 255, int(255 * (1 - t)), int(255 * (1 - t))
    else:
        r, g, b = int(255 * (1 + t)), int(255 * (1 + t)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(x, y, values, title: str = "", xlabel: str = "q", ylabel: str = "p",
            max_cells: int = 101) -> str:
    """Heatmap of values[i, j] at (x[i], y[j]); symmetric color scale about zero."""
    x, y, values = np.asarray(x, float), np.asarray(y, float), np.asarray(values, float)
    sx = max(1, int(np.ceil(len(x) / max_cells)))
    sy = max(1, int(np.ceil(len(y) / max_cells)))
    x, y, values = x[::sx], y[::sy], values[::sx, ::sy]
    scale = float(np.abs(values).max()) or 1.0
    left, top = MARGIN["left"], MARGIN["top"]
    w = WIDTH - left - MARGIN["right"]
    h = HEIGHT - top - MARGIN["bottom"]

    def px(a):
        return left + (a - x[0]) / (x[-1] - x[0]) * w

    def py(b):
        return top + h - (b - y[0]) / (y[-1] - y[0]) * h

    body = _frame(title, xlabel, ylabel, x[0], x[-1], y[0], y[-1], px, py)
    cw, ch = w / len(x), h / len(y)
    for i, a in enumerate(x):
        for j, b in enumerate(y):
            body.append(f'<rect x="{px(a) - cw / 2:.1f}" y="{py(b) - ch / 2:.1f}" width="{cw + 0.3:.1f}" '
                        f'height="{ch + 0.3:.1f}" fill="{_color(values[i, j] / scale)}"/>')
    body.append(f'<text x="{left + w + 10}" y="{top + 14}" font-size="12">max {_fmt(values.max())}</text>')
    body.append(f'<text x="{left + w + 10}" y="{top + 32}" font-size="12">min {_fmt(values.min())}</text>')
    return _wrap(body)


def write(path, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)
