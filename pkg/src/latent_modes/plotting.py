"""Static SVG rendering of state-space clusters and 2-D embeddings."""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .colors import to_hex

WIDTH, HEIGHT = 720, 480
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 130, 20, 50
UNASSIGNED_COLOR = "#7f7f7f"


@dataclass(frozen=True)
class AxesSpec:
    x_range: tuple[float, float] = (-1.3, 0.65)
    y_range: tuple[float, float] = (-0.075, 0.075)
    x_label: str = "Position"
    y_label: str = "Velocity"
    x_ticks: tuple[float, ...] = (-1.2, -0.9, -0.6, -0.3, 0.0, 0.3, 0.6)
    y_ticks: tuple[float, ...] = (-0.07, -0.035, 0.0, 0.035, 0.07)
    goal_position: float | None = 0.45
    title: str = ""


class _Canvas:
    def __init__(self, axes: AxesSpec):
        self.axes = axes
        self.plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        self.plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
        self.parts: list[str] = []

    def x(self, value: float) -> float:
        lo, hi = self.axes.x_range
        return MARGIN_LEFT + (value - lo) / (hi - lo) * self.plot_w

    def y(self, value: float) -> float:
        lo, hi = self.axes.y_range
        return MARGIN_TOP + (hi - value) / (hi - lo) * self.plot_h

    def polyline(self, pts, color: str, width: float = 1.2, extra: str = "") -> None:
        coords = " ".join(f"{self.x(p):.2f},{self.y(v):.2f}" for p, v in pts)
        self.parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                          f'stroke-width="{width}"{extra}/>')

    def frame(self) -> None:
        a = self.axes
        x0, x1 = MARGIN_LEFT, MARGIN_LEFT + self.plot_w
        y0, y1 = MARGIN_TOP, MARGIN_TOP + self.plot_h
        self.parts.append(f'<rect x="{x0}" y="{y0}" width="{self.plot_w}" height="{self.plot_h}" '
                          f'fill="none" stroke="black"/>')
        for t in a.x_ticks:
            px = self.x(t)
            self.parts.append(f'<line x1="{px:.2f}" y1="{y1}" x2="{px:.2f}" y2="{y1 + 5}" stroke="black"/>')
            self.parts.append(f'<text x="{px:.2f}" y="{y1 + 18}" font-size="11" '
                              f'text-anchor="middle">{t:g}</text>')
        for t in a.y_ticks:
            py = self.y(t)
            self.parts.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="black"/>')
            self.parts.append(f'<text x="{x0 - 8}" y="{py + 4:.2f}" font-size="11" '
                              f'text-anchor="end">{t:g}</text>')
        self.parts.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 10}" font-size="13" '
                          f'text-anchor="middle">{escape(a.x_label)}</text>')
        self.parts.append(f'<text x="15" y="{(y0 + y1) / 2:.2f}" font-size="13" text-anchor="middle" '
                          f'transform="rotate(-90 15 {(y0 + y1) / 2:.2f})">{escape(a.y_label)}</text>')
        if a.title:
            self.parts.append(f'<text x="{(x0 + x1) / 2:.2f}" y="14" font-size="13" '
                              f'text-anchor="middle">{escape(a.title)}</text>')
        if a.goal_position is not None:
            gx = self.x(a.goal_position)
            self.parts.append(f'<line x1="{gx:.2f}" y1="{y0}" x2="{gx:.2f}" y2="{y1}" stroke="black" '
                              f'stroke-dasharray="4,3"/>')

    def legend(self, entries: list[tuple[str, str]]) -> None:
        x = WIDTH - MARGIN_RIGHT + 12
        for k, (label, color) in enumerate(entries):
            y = MARGIN_TOP + 6 + 14 * k
            self.parts.append(f'<rect x="{x}" y="{y}" width="10" height="10" fill="{color}" stroke="black" '
                              f'stroke-width="0.5"/>')
            self.parts.append(f'<text x="{x + 15}" y="{y + 9}" font-size="10">{escape(label)}</text>')

    def document(self) -> str:
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
                f'viewBox="0 0 {WIDTH} {HEIGHT}">\n<rect width="100%" height="100%" fill="white"/>\n'
                f'{body}\n</svg>\n')


def _cluster_color(colors, cluster_id):
    if cluster_id is None:
        return UNASSIGNED_COLOR
    return to_hex(colors[cluster_id % len(colors)])


def render_plot(backmapped, kept_episodes, colors, axes_spec: AxesSpec = AxesSpec(),
                split_threshold: int = 21) -> list[str]:
    """One polyline per segment of a kept episode, colored by cluster.

    With more than ``split_threshold`` clusters the result is two documents:
    even cluster ids, then odd ones.
    """
    kept = None if kept_episodes is None else set(kept_episodes)
    visible = [b for b in backmapped if kept is None or b.episode_id in kept]
    cluster_ids = sorted({b.cluster_id for b in backmapped if b.cluster_id is not None})
    if len(cluster_ids) > split_threshold:
        groups = [[c for c in cluster_ids if c % 2 == 0], [c for c in cluster_ids if c % 2 == 1]]
        titles = ["even cluster ids", "odd cluster ids"]
    else:
        groups, titles = [cluster_ids], [""]

    docs = []
    for group, subtitle in zip(groups, titles):
        members = set(group)
        title = " - ".join(t for t in (axes_spec.title, subtitle) if t)
        canvas = _Canvas(AxesSpec(**{**axes_spec.__dict__, "title": title}))
        canvas.frame()
        for b in visible:
            if b.cluster_id in members or (b.cluster_id is None and len(groups) == 1):
                canvas.polyline(b.state_points, _cluster_color(colors, b.cluster_id))
        canvas.legend([(f"cluster {c}", _cluster_color(colors, c)) for c in group])
        docs.append(canvas.document())
    return docs


def render_embedding(points, episode_ids, colors, title: str = "") -> str:
    """2-D embedding with each episode drawn as a polyline in time order."""
    pts = np.asarray(points, dtype=float)
    ids = np.asarray(episode_ids)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = np.where(hi > lo, 0.05 * (hi - lo), 1.0)
    lo, hi = lo - pad, hi + pad
    axes = AxesSpec((float(lo[0]), float(hi[0])), (float(lo[1]), float(hi[1])), "e_0", "e_1",
                    tuple(np.round(np.linspace(lo[0], hi[0], 5), 2)),
                    tuple(np.round(np.linspace(lo[1], hi[1], 5), 2)), None, title)
    canvas = _Canvas(axes)
    canvas.frame()
    for k, ep in enumerate(dict.fromkeys(ids.tolist())):
        rows = pts[ids == ep]
        canvas.polyline(rows, to_hex(colors[k % len(colors)]), width=0.8)
    return canvas.document()
