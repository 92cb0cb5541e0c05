"""Minimal deterministic SVG emission for report plots.

Pure string building with fixed-precision coordinates: the same inputs always
produce byte-identical files (no timestamps, ids or library styling).
"""

from __future__ import annotations

import math

WIDTH = 720
HEIGHT = 420
MARGIN = 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    def __init__(self, x_range, y_range, title, x_label, y_label):
        self.x_lo, self.x_hi = x_range
        self.y_lo, self.y_hi = y_range
        if self.x_hi <= self.x_lo:
            self.x_hi = self.x_lo + 1.0
        if self.y_hi <= self.y_lo:
            self.y_hi = self.y_lo + 1.0
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>',
            f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{x_label}</text>',
            f'<text x="14" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 14 {HEIGHT / 2:.0f})">{y_label}</text>',
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
            f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="#333"/>',
        ]
        self._axis_ticks()

    def px(self, x: float) -> float:
        frac = (x - self.x_lo) / (self.x_hi - self.x_lo)
        return MARGIN + frac * (WIDTH - 2 * MARGIN)

    def py(self, y: float) -> float:
        frac = (y - self.y_lo) / (self.y_hi - self.y_lo)
        return HEIGHT - MARGIN - frac * (HEIGHT - 2 * MARGIN)

    def _axis_ticks(self, n: int = 5):
        for i in range(n + 1):
            xv = self.x_lo + (self.x_hi - self.x_lo) * i / n
            yv = self.y_lo + (self.y_hi - self.y_lo) * i / n
            xp, yp = self.px(xv), self.py(yv)
            self.parts.append(
                f'<line x1="{_fmt(xp)}" y1="{HEIGHT - MARGIN}" x2="{_fmt(xp)}" '
                f'y2="{HEIGHT - MARGIN + 5}" stroke="#333"/>'
                f'<text x="{_fmt(xp)}" y="{HEIGHT - MARGIN + 18}" '
                f'text-anchor="middle" font-family="sans-serif" font-size="10">'
                f"{xv:.4g}</text>"
            )
            self.parts.append(
                f'<line x1="{MARGIN - 5}" y1="{_fmt(yp)}" x2="{MARGIN}" '
                f'y2="{_fmt(yp)}" stroke="#333"/>'
                f'<text x="{MARGIN - 8}" y="{_fmt(yp + 3)}" text-anchor="end" '
                f'font-family="sans-serif" font-size="10">{yv:.4g}</text>'
            )

    def hline(self, y: float, color: str, dash: str = "6,4", label: str = ""):
        yp = self.py(y)
        self.parts.append(
            f'<line x1="{MARGIN}" y1="{_fmt(yp)}" x2="{WIDTH - MARGIN}" '
            f'y2="{_fmt(yp)}" stroke="{color}" stroke-dasharray="{dash}"/>'
        )
        if label:
            self.parts.append(
                f'<text x="{WIDTH - MARGIN - 4}" y="{_fmt(yp - 4)}" '
                f'text-anchor="end" font-family="sans-serif" font-size="10" '
                f'fill="{color}">{label}</text>'
            )

    def finish(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def line_plot(
    series,
    title: str,
    x_label: str,
    y_label: str,
    y_range=None,
    reference_lines=(),
) -> str:
    """series: list of (label, xs, ys).  reference_lines: (label, y) pairs."""
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x_range = (min(xs_all, default=0.0), max(xs_all, default=1.0))
    if y_range is None:
        lo = min(ys_all, default=0.0)
        hi = max(ys_all, default=1.0)
        pad = 0.05 * (hi - lo or 1.0)
        y_range = (lo - pad, hi + pad)
    canvas = _Canvas(x_range, y_range, title, x_label, y_label)
    for label, y in reference_lines:
        canvas.hline(y, "#777", label=label)
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(
            f"{_fmt(canvas.px(x))},{_fmt(canvas.py(y))}" for x, y in zip(xs, ys)
        )
        canvas.parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        if label:
            canvas.parts.append(
                f'<text x="{WIDTH - MARGIN + 2}" y="{MARGIN + 14 + 14 * i}" '
                f'font-family="sans-serif" font-size="10" fill="{color}">'
                f"{label}</text>"
            )
    return canvas.finish()


def _quartiles(values):
    v = sorted(values)
    n = len(v)

    def q(p):
        if n == 1:
            return v[0]
        pos = p * (n - 1)
        lo = int(math.floor(pos))
        hi = min(lo + 1, n - 1)
        frac = pos - lo
        return v[lo] * (1 - frac) + v[hi] * frac

    return q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)


def box_plot(
    groups,
    title: str,
    x_label: str,
    y_label: str,
    y_range=(0.0, 1.0),
    reference_lines=(),
) -> str:
    """groups: list of (label, values).  One box per group."""
    canvas = _Canvas((0.0, float(len(groups)) + 1.0), y_range, title, x_label, y_label)
    for label, y in reference_lines:
        canvas.hline(y, "#777", label=label)
    width = 0.3
    for i, (label, values) in enumerate(groups, start=1):
        if not values:
            continue
        lo, q1, med, q3, hi = _quartiles(values)
        x0, x1 = canvas.px(i - width), canvas.px(i + width)
        xm = canvas.px(i)
        color = PALETTE[0]
        canvas.parts.append(
            f'<line x1="{_fmt(xm)}" y1="{_fmt(canvas.py(lo))}" x2="{_fmt(xm)}" '
            f'y2="{_fmt(canvas.py(hi))}" stroke="{color}"/>'
        )
        canvas.parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(canvas.py(q3))}" '
            f'width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(canvas.py(q1) - canvas.py(q3))}" '
            f'fill="#cfe3f3" stroke="{color}"/>'
        )
        canvas.parts.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(canvas.py(med))}" x2="{_fmt(x1)}" '
            f'y2="{_fmt(canvas.py(med))}" stroke="{color}" stroke-width="2"/>'
        )
        canvas.parts.append(
            f'<text x="{_fmt(xm)}" y="{HEIGHT - MARGIN + 30}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{label}</text>'
        )
    return canvas.finish()
