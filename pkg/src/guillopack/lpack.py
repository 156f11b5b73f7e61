"""Boundary L regions: canonical placement, exact L solvers, and the repacking
of a separable packing of long items into an L."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .classify import is_tall, is_wide
from .core import Item, Packing, Rect, place
from .guillotine import GuillotineTree, H, mirror_rects, mirror_tree, split


@dataclass(frozen=True)
class LRegion:
    """([0,N] x [0,h_wide]) union ([0,w_tall] x [0,N])."""

    N: int
    h_wide: int
    w_tall: int

    def __post_init__(self) -> None:
        if not (0 <= self.h_wide <= self.N and 0 <= self.w_tall <= self.N):
            raise ValueError("arm sizes must lie in [0, N]")

    def contains(self, r: Rect) -> bool:
        # a rect inside an L lies inside one of its two arms
        in_bottom = r.x0 >= 0 and r.x1 <= self.N and r.y0 >= 0 and r.y1 <= self.h_wide
        in_left = r.x0 >= 0 and r.x1 <= self.w_tall and r.y0 >= 0 and r.y1 <= self.N
        return in_bottom or in_left


@dataclass(frozen=True)
class LPlacement:
    wide_order: tuple[int, ...]
    tall_order: tuple[int, ...]
    rects: dict[int, Rect]


def split_long(items: Sequence[Item], N: int) -> tuple[list[Item], list[Item]]:
    wide, tall = [], []
    for it in items:
        w, t = is_wide(it, N), is_tall(it, N)
        if w and t:
            raise ValueError(f"item {it.id} has both sides above N/2 (large)")
        if not (w or t):
            raise ValueError(f"item {it.id} is not long")
        (wide if w else tall).append(it)
    return wide, tall


def stack_in_l(hor: Sequence[Item], ver: Sequence[Item], frame: Rect,
               arm_h: int, arm_w: int) -> dict[int, Rect] | None:
    """Canonical L placement inside frame, or None if it does not fit.

    hor items stack bottom-up in non-increasing width, pushed right; ver items
    go left to right in non-increasing height, pushed up. The stacks must stay
    within arm_h and arm_w.
    """
    hor = sorted(hor, key=lambda it: (-it.w, it.id))
    ver = sorted(ver, key=lambda it: (-it.h, it.id))
    if sum(it.h for it in hor) > arm_h or sum(it.w for it in ver) > arm_w:
        return None
    rects: dict[int, Rect] = {}
    y = frame.y0
    hr = []
    for it in hor:
        if it.w > frame.w:
            return None
        r = Rect(frame.x1 - it.w, y, frame.x1, y + it.h)
        rects[it.id] = r
        hr.append(r)
        y += it.h
    x = frame.x0
    for it in ver:
        if it.h > frame.h:
            return None
        r = Rect(x, frame.y1 - it.h, x + it.w, frame.y1)
        for q in hr:
            if r.x0 < q.x1 and q.x0 < r.x1 and r.y0 < q.y1 and q.y0 < r.y1:
                return None
        rects[it.id] = r
        x += it.w
    return rects


def canonical_l_place(S: Sequence[Item], N: int) -> LPlacement | None:
    wide, tall = split_long(S, N)
    rects = stack_in_l(wide, tall, Rect(0, 0, N, N), N, N)
    if rects is None:
        return None
    return LPlacement(tuple(it.id for it in sorted(wide, key=lambda it: (-it.w, it.id))),
                      tuple(it.id for it in sorted(tall, key=lambda it: (-it.h, it.id))),
                      rects)


@dataclass(frozen=True)
class LSolution:
    items: tuple[Item, ...]
    rects: dict[int, Rect]
    value: int


def best_in_l(hor: Sequence[Item], ver: Sequence[Item], frame: Rect, arm_h: int, arm_w: int,
              weight=lambda it: 1) -> LSolution:
    """Best-weight subset with a feasible canonical placement (exact).

    Items are scanned in non-increasing relative reach (width over frame width
    for hor, height over frame height for ver), so each stack is built in its
    canonical order. Every pair is checked against actual coordinates. The
    memo keeps only placed items that can still clash with a later item.
    """
    hor = [it for it in hor if it.w <= frame.w and it.h <= arm_h]
    ver = [it for it in ver if it.h <= frame.h and it.w <= arm_w]
    seq = [(Fraction(-it.w, frame.w), 0, -it.w, it.id, "h", it) for it in hor]
    seq += [(Fraction(-it.h, frame.h), 1, -it.h, it.id, "v", it) for it in ver]
    seq.sort(key=lambda t: t[:4])
    order = [(kind, it) for *_, kind, it in seq]
    n = len(order)
    max_w = [0] * (n + 1)
    max_h = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        kind, it = order[i]
        max_w[i] = max(max_w[i + 1], it.w if kind == "h" else 0)
        max_h[i] = max(max_h[i + 1], it.h if kind == "v" else 0)
    rest_weight = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        rest_weight[i] = rest_weight[i + 1] + weight(order[i][1])
    memo: dict[tuple, int] = {}
    fx0, fy0, fx1, fy1 = frame.x0, frame.y0, frame.x1, frame.y1
    # placed rects are plain (x0, y0, x1, y1) tuples here, for speed

    def key(i: int, hu: int, wu: int, hs: tuple, vs: tuple) -> tuple:
        lim_h, lim_v = fy1 - max_h[i], fx1 - max_w[i]
        hs = tuple(r for r in hs if r[3] > lim_h)
        vs = tuple(r for r in vs if r[2] > lim_v)
        return (i, hu, wu, hs, vs)

    def hor_rect(it: Item, hu: int) -> tuple:
        return (fx1 - it.w, fy0 + hu, fx1, fy0 + hu + it.h)

    def ver_rect(it: Item, wu: int) -> tuple:
        return (fx0 + wu, fy1 - it.h, fx0 + wu + it.w, fy1)

    def clash(r: tuple, others: tuple) -> bool:
        x0, y0, x1, y1 = r
        for q in others:
            if x0 < q[2] and q[0] < x1 and y0 < q[3] and q[1] < y1:
                return True
        return False

    def go(i: int, hu: int, wu: int, hs: tuple, vs: tuple) -> int:
        if i == n:
            return 0
        k = key(i, hu, wu, hs, vs)
        got = memo.get(k)
        if got is not None:
            return got
        hs, vs = k[3], k[4]
        best = go(i + 1, hu, wu, hs, vs)
        kind, it = order[i]
        if best < rest_weight[i]:
            if kind == "h" and hu + it.h <= arm_h:
                r = hor_rect(it, hu)
                if not clash(r, vs):
                    best = max(best, weight(it) + go(i + 1, hu + it.h, wu, hs + (r,), vs))
            elif kind == "v" and wu + it.w <= arm_w:
                r = ver_rect(it, wu)
                if not clash(r, hs):
                    best = max(best, weight(it) + go(i + 1, hu, wu + it.w, hs, vs + (r,)))
        memo[k] = best
        return best

    value = go(0, 0, 0, (), ())
    # walk the memo again to recover one optimal subset
    chosen: list[Item] = []
    i, hu, wu, hs, vs = 0, 0, 0, (), ()
    while i < n:
        target = go(i, hu, wu, hs, vs)
        kind, it = order[i]
        if go(i + 1, hu, wu, hs, vs) == target:
            i += 1
            continue
        if kind == "h":
            hs, hu = hs + (hor_rect(it, hu),), hu + it.h
        else:
            vs, wu = vs + (ver_rect(it, wu),), wu + it.w
        chosen.append(it)
        i += 1
    hor_c = [it for it in chosen if any(it is h for h in hor)]
    ver_c = [it for it in chosen if not any(it is h for h in hor)]
    rects = stack_in_l(hor_c, ver_c, frame, arm_h, arm_w)
    assert rects is not None
    return LSolution(tuple(chosen), rects, value)


def solve_l_cardinality(items: Sequence[Item], region: LRegion) -> LSolution:
    """Maximum number of items with a canonical placement inside region.

    Items with both sides above N/2 are skipped; they are large, not long.
    """
    N = region.N
    usable = [it for it in items if not (is_wide(it, N) and is_tall(it, N))]
    wide, tall = split_long(usable, N)
    return best_in_l(wide, tall, Rect(0, 0, N, N), region.h_wide, region.w_tall)


def solve_l_profit_smalln(items: Sequence[Item], region: LRegion, max_n: int = 16) -> LSolution:
    """Maximum profit by enumerating subsets; refuses more than max_n items."""
    if len(items) > max_n:
        raise ValueError(f"{len(items)} items exceed the enumeration limit {max_n}")
    N = region.N
    usable = [it for it in items if not (is_wide(it, N) and is_tall(it, N))]
    split_long(usable, N)
    frame = Rect(0, 0, N, N)
    best = LSolution((), {}, 0)
    for size in range(len(usable), 0, -1):
        for combo in combinations(usable, size):
            val = sum(it.p for it in combo)
            if val <= best.value:
                continue
            wide, tall = split_long(combo, N)
            rects = stack_in_l(wide, tall, frame, region.h_wide, region.w_tall)
            if rects is not None:
                best = LSolution(tuple(combo), rects, val)
    return best


# --- repacking a separable packing of long items into an L -------------------

@dataclass(frozen=True)
class LPackResult:
    packing: Packing
    region: LRegion


def _kind(r: Rect, N: int) -> str:
    if 2 * r.w > N:
        return "wide"
    if 2 * r.h > N:
        return "tall"
    raise ValueError("non-long item")


def _repack(region: Rect, node: GuillotineTree, rects: dict[int, Rect], N: int) -> dict[int, Rect]:
    if node.is_leaf:
        out = {}
        for iid, r in rects.items():
            if _kind(r, N) == "wide":
                out[iid] = r.translate(0, region.y0 - r.y0)
            else:
                out[iid] = r.translate(region.x0 - r.x0, 0)
        return out
    horizontal = node.orientation == H
    axis = "x" if horizontal else "y"
    blocker = "tall" if horizontal else "wide"
    c = node.position

    def side(r: Rect) -> bool:  # True for the high side
        return (r.y0 >= c) if horizontal else (r.x0 >= c)

    if any(side(r) and _kind(r, N) == blocker for r in rects.values()):
        # the high side blocks, so flip first and work on the mirror image
        rects = mirror_rects(rects, axis, region)
        node = mirror_tree(node, axis, region)
        c = node.position
    lo_reg, hi_reg = split(region, node.orientation, c)
    lo = _repack(lo_reg, node.low, {i: r for i, r in rects.items() if not side(r)}, N)
    hi = _repack(hi_reg, node.high, {i: r for i, r in rects.items() if side(r)}, N)
    if horizontal:
        stack = sum(r.h for r in hi.values())
        p1 = Rect(region.x0, region.y0, region.x1, region.y1 - stack)
    else:
        stack = sum(r.w for r in hi.values())
        p1 = Rect(region.x0, region.y0, region.x1 - stack, region.y1)
    hi = mirror_rects(hi, axis, hi_reg)
    lo = mirror_rects(lo, axis, p1)
    return mirror_rects({**lo, **hi}, axis, region)


def build_l_from_guillotine(p: Packing, t: GuillotineTree) -> LPackResult:
    """Repack the long items of a separable packing into a boundary L.

    Recursive on the cut tree. At a horizontal cut the side without tall
    items is stacked below the other side; vertical cuts are symmetric. The
    moves are the mirror steps Mirror(P2), Mirror(P1') and Mirror(P) along
    the cut's normal axis.
    """
    N = p.instance.N
    rects = p.rects()
    for iid, r in rects.items():
        try:
            _kind(r, N)
        except ValueError:
            raise ValueError(f"item {iid} is not long") from None
    out = _repack(p.instance.knapsack, t, rects, N)
    h_wide = sum(r.h for r in out.values() if _kind(r, N) == "wide")
    w_tall = sum(r.w for r in out.values() if _kind(r, N) == "tall")
    return LPackResult(place(p.instance, out), LRegion(N, h_wide, w_tall))
