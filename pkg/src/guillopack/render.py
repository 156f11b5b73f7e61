"""SVG rendering: a geometric model first, then deterministic serialization."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

from .compartments import CompartmentSet, LCompartment
from .core import Packing, Rect
from .guillotine import GuillotineTree, V

DEFAULT_PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                   "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")


@dataclass(frozen=True)
class RenderSpec:
    cell: int = 10
    palette: tuple[str, ...] = DEFAULT_PALETTE
    items: bool = True
    cuts: bool = True
    compartments: bool = True
    stages: bool = True  # style cuts by stage index


@dataclass(frozen=True)
class Segment:
    x0: int
    y0: int
    x1: int
    y1: int
    stage: int


@dataclass(frozen=True)
class SvgModel:
    N: int
    items: tuple[tuple[int, Rect], ...]
    cuts: tuple[Segment, ...]
    outlines: tuple[tuple[tuple[int, int], ...], ...]


def _cut_segments(t: GuillotineTree) -> list[Segment]:
    out: list[Segment] = []

    def walk(node: GuillotineTree, stage: int, last: str | None) -> None:
        if node.is_leaf:
            return
        s = stage if node.orientation == last else stage + 1
        r, c = node.region, node.position
        if node.orientation == V:
            out.append(Segment(c, r.y0, c, r.y1, s))
        else:
            out.append(Segment(r.x0, c, r.x1, c, s))
        walk(node.low, s, node.orientation)
        walk(node.high, s, node.orientation)

    walk(t, 0, None)
    return out


def segment_hits(seg: Segment, r: Rect) -> bool:
    """True if the segment passes through the open interior of r."""
    if seg.x0 == seg.x1:
        return r.x0 < seg.x0 < r.x1 and r.y0 < seg.y1 and seg.y0 < r.y1
    return r.y0 < seg.y0 < r.y1 and r.x0 < seg.x1 and seg.x0 < r.x1


def build_model(p: Packing, t: GuillotineTree | None = None, cset: CompartmentSet | None = None,
                spec: RenderSpec = RenderSpec()) -> SvgModel:
    items = tuple(sorted(p.rects().items())) if spec.items else ()
    cuts = tuple(_cut_segments(t)) if (t is not None and spec.cuts) else ()
    outlines = []
    if cset is not None and spec.compartments:
        for c in cset.compartments:
            if isinstance(c, LCompartment):
                outlines.append(tuple(c.vertices()))
            else:
                r = c.rect
                outlines.append(((r.x0, r.y0), (r.x1, r.y0), (r.x1, r.y1), (r.x0, r.y1)))
    return SvgModel(p.instance.N, items, cuts, tuple(outlines))


def model_problems(m: SvgModel) -> list[str]:
    """Cut segments that cross an item interior."""
    return [f"cut {s} crosses item {i}" for s in m.cuts for i, r in m.items if segment_hits(s, r)]


def to_svg(m: SvgModel, spec: RenderSpec = RenderSpec()) -> str:
    c, N = spec.cell, m.N
    size = N * c

    def X(x: int) -> int:
        return x * c

    def Y(y: int) -> int:
        return (N - y) * c  # origin at the bottom left

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2}" height="{size + 2}" '
           f'viewBox="-1 -1 {size + 2} {size + 2}">',
           f'<rect class="knapsack" x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black"/>']
    for ol in m.outlines:
        pts = " ".join(f"{X(x)},{Y(y)}" for x, y in ol)
        out.append(f'<polygon class="compartment" points="{pts}" fill="none" stroke="#888" stroke-dasharray="4 2"/>')
    for iid, r in m.items:
        color = spec.palette[(iid - 1) % len(spec.palette)] if spec.palette else "#999"
        out.append(f'<rect class="item" data-id="{iid}" x="{X(r.x0)}" y="{Y(r.y1)}" width="{r.w * c}" '
                   f'height="{r.h * c}" fill="{escape(color)}" fill-opacity="0.7" stroke="black"/>')
        out.append(f'<text x="{X(r.x0) + 2}" y="{Y(r.y0) - 2}" font-size="{max(6, c)}">{iid}</text>')
    for s in m.cuts:
        width = max(1, 4 - s.stage) if spec.stages else 1
        out.append(f'<line class="cut stage-{s.stage}" x1="{X(s.x0)}" y1="{Y(s.y0)}" x2="{X(s.x1)}" '
                   f'y2="{Y(s.y1)}" stroke="red" stroke-width="{width}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(p: Packing, t: GuillotineTree | None = None, spec: RenderSpec = RenderSpec(),
               cset: CompartmentSet | None = None) -> str:
    return to_svg(build_model(p, t, cset, spec), spec)
