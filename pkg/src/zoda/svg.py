"""Self-contained SVG line plots (no plotting dependency).

Per-trial curves are drawn faint, the per-estimator mean bold, over a
log-scaled step axis. Output depends only on the input series.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 720, 460
MARGIN = dict(left=78, right=150, top=40, bottom=56)
COLORS = {"l1": "#1f77b4", "l2": "#d62728"}
FALLBACK_COLORS = ("#2ca02c", "#9467bd", "#8c564b", "#e377c2")
LABELS = {"l1": "l1-sphere randomization", "l2": "l2-sphere randomization"}


def sample_steps(T: int, n_points: int = 240) -> np.ndarray:
    """Log-spaced, unique step indices in ``[1, T]`` (always includes 1 and T)."""
    if T <= n_points:
        return np.arange(1, T + 1)
    s = np.unique(np.round(np.logspace(0.0, math.log10(T), n_points)).astype(np.int64))
    return np.unique(np.concatenate(([1], s, [T])))


def _ticks_log(lo, hi):
    return [10.0**k for k in range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)]


class _Axes:
    def __init__(self, xmax, ylo, yhi, ylog):
        self.xmax, self.ylo, self.yhi, self.ylog = xmax, ylo, yhi, ylog
        self.x0, self.x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        self.y0, self.y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def px(self, step):
        span = math.log10(self.xmax) if self.xmax > 1 else 1.0
        return self.x0 + (self.x1 - self.x0) * math.log10(step) / span

    def py(self, v):
        if self.ylog:
            a, b, v = math.log10(self.ylo), math.log10(self.yhi), math.log10(v)
        else:
            a, b = self.ylo, self.yhi
        frac = 0.5 if b == a else (v - a) / (b - a)
        return self.y0 + (self.y1 - self.y0) * frac


def _polyline(ax, steps, values, **attrs):
    pts = " ".join(f"{ax.px(s):.2f},{ax.py(v):.2f}" for s, v in zip(steps, values))
    extra = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items())
    return f'<polyline fill="none" {extra} points="{pts}"/>'


def render(series: dict, title: str, ylabel: str, meta: str = "") -> str:
    """Render ``{estimator: (steps, values[trials, steps])}`` to SVG markup."""
    all_vals = np.concatenate([np.ravel(v) for _, v in series.values()]) if series else np.array([1.0])
    finite = all_vals[np.isfinite(all_vals)]
    xmax = max((int(s[-1]) for s, _ in series.values()), default=10)
    ylog = finite.size > 0 and bool(np.all(finite > 0))
    if finite.size == 0:
        ylo, yhi = 0.0, 1.0
    elif ylog:
        ylo, yhi = float(finite.min()), float(finite.max())
        if ylo == yhi:
            ylo, yhi = ylo / 10.0, yhi * 10.0
    else:
        ylo, yhi = float(finite.min()), float(finite.max())
        if ylo == yhi:
            ylo, yhi = ylo - 1.0, yhi + 1.0
    ax = _Axes(max(xmax, 10), ylo, yhi, ylog)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f"<title>{escape(title)}</title>",
        f"<desc>{escape(meta)}</desc>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{ax.x0}" y="{ax.y1}" width="{ax.x1 - ax.x0}" height="{ax.y0 - ax.y1}" '
        'fill="none" stroke="#444" stroke-width="1"/>',
    ]
    for t in _ticks_log(1, ax.xmax):
        if t > ax.xmax:
            continue
        x = ax.px(t)
        out.append(f'<line x1="{x:.2f}" y1="{ax.y0}" x2="{x:.2f}" y2="{ax.y0 + 5}" stroke="#444"/>')
        out.append(f'<text x="{x:.2f}" y="{ax.y0 + 19}" text-anchor="middle">{t:g}</text>')
    if ylog:
        yticks = [v for v in _ticks_log(ylo, yhi) if ylo <= v <= yhi]
    else:
        yticks = list(np.linspace(ylo, yhi, 5))
    for v in yticks:
        y = ax.py(v)
        out.append(f'<line x1="{ax.x0 - 5}" y1="{y:.2f}" x2="{ax.x0}" y2="{y:.2f}" stroke="#444"/>')
        out.append(f'<text x="{ax.x0 - 8}" y="{y + 4:.2f}" text-anchor="end">{v:.3g}</text>')
    out.append(
        f'<text x="{(ax.x0 + ax.x1) / 2:.1f}" y="{HEIGHT - 14}" text-anchor="middle">iteration (log scale)</text>'
    )
    out.append(
        f'<text x="18" y="{(ax.y0 + ax.y1) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(ax.y0 + ax.y1) / 2:.1f})">{escape(ylabel)}</text>'
    )
    out.append(f'<text x="{(ax.x0 + ax.x1) / 2:.1f}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>')

    def clip(v):
        v = np.where(np.isfinite(v), v, yhi)
        return np.clip(v, ylo, yhi)

    extra = iter(FALLBACK_COLORS)
    for k, (name, (steps, vals)) in enumerate(series.items()):
        color = COLORS.get(name) or next(extra)
        vals = np.atleast_2d(vals)
        out.append(f'<g data-estimator="{escape(name)}">')
        for row in vals:
            out.append(
                _polyline(ax, steps, clip(row), stroke=color, stroke_width="0.7",
                          stroke_opacity="0.18", **{"class": "trial"})
            )
        out.append(
            _polyline(ax, steps, clip(vals.mean(axis=0)), stroke=color, stroke_width="2.6", **{"class": "mean"})
        )
        out.append("</g>")
        ly = ax.y1 + 16 + 20 * k
        out.append(f'<line x1="{ax.x1 + 12}" y1="{ly}" x2="{ax.x1 + 36}" y2="{ly}" stroke="{color}" stroke-width="2.6"/>')
        out.append(f'<text x="{ax.x1 + 40}" y="{ly + 4}">{escape(LABELS.get(name, name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
