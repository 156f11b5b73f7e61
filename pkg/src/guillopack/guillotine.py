"""Guillotine cut trees: separability checking, stage counting, mirroring and
a stage-bounded exhaustive packer."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator

from .core import Instance, Packing, Placement, Rect

H = "h"  # horizontal cut: the line y = position
V = "v"  # vertical cut: the line x = position


@dataclass(frozen=True)
class GuillotineTree:
    """A node of a cut tree.

    Leaves carry at most one item (item_id plus its rect). Cut nodes carry an
    orientation, a position and two children: low is the bottom or left part.
    """

    region: Rect
    item_id: int | None = None
    item_rect: Rect | None = None
    orientation: str | None = None
    position: int | None = None
    low: GuillotineTree | None = None
    high: GuillotineTree | None = None

    @property
    def is_leaf(self) -> bool:
        return self.orientation is None

    @staticmethod
    def leaf(region: Rect, item: tuple[int, Rect] | None = None) -> GuillotineTree:
        if item is None:
            return GuillotineTree(region)
        return GuillotineTree(region, item_id=item[0], item_rect=item[1])

    @staticmethod
    def cut(region: Rect, orientation: str, position: int,
            low: GuillotineTree, high: GuillotineTree) -> GuillotineTree:
        return GuillotineTree(region, orientation=orientation, position=position, low=low, high=high)

    def items(self) -> dict[int, Rect]:
        out: dict[int, Rect] = {}
        for node in self.nodes():
            if node.is_leaf and node.item_id is not None:
                out[node.item_id] = node.item_rect
        return out

    def nodes(self) -> Iterator[GuillotineTree]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.high)
                stack.append(node.low)

    def to_dict(self) -> dict:
        d: dict = {"region": list(self.region.as_tuple())}
        if self.is_leaf:
            d["item"] = self.item_id
            if self.item_rect is not None:
                d["item_rect"] = list(self.item_rect.as_tuple())
            return d
        d["cut"] = {"orientation": self.orientation, "position": self.position}
        d["children"] = [self.low.to_dict(), self.high.to_dict()]
        return d

    @staticmethod
    def from_dict(d: dict) -> GuillotineTree:
        region = Rect(*d["region"])
        if "cut" not in d:
            if d.get("item") is None:
                return GuillotineTree(region)
            return GuillotineTree(region, item_id=d["item"], item_rect=Rect(*d["item_rect"]))
        lo, hi = d["children"]
        return GuillotineTree.cut(region, d["cut"]["orientation"], d["cut"]["position"],
                                  GuillotineTree.from_dict(lo), GuillotineTree.from_dict(hi))


@dataclass(frozen=True)
class NotSeparable:
    """Failure verdict: a piece holding >= 2 items with no end-to-end cut."""

    witness: Rect
    item_ids: tuple[int, ...]


@dataclass(frozen=True)
class Cut:
    """A cut segment: the line orientation=position spanning [lo, hi]."""

    orientation: str
    position: int
    lo: int
    hi: int


def split(region: Rect, orientation: str, position: int) -> tuple[Rect, Rect]:
    if orientation == H:
        return (Rect(region.x0, region.y0, region.x1, position),
                Rect(region.x0, position, region.x1, region.y1))
    return (Rect(region.x0, region.y0, position, region.y1),
            Rect(position, region.y0, region.x1, region.y1))


def crosses(r: Rect, orientation: str, position: int) -> bool:
    if orientation == H:
        return r.y0 < position < r.y1
    return r.x0 < position < r.x1


def _first_gap(spans: list[tuple[int, int]]) -> int | None:
    """Smallest coordinate c separating the spans, taken at an item edge."""
    spans = sorted(spans)
    reach = spans[0][1]
    for lo, hi in spans[1:]:
        if lo >= reach:
            return reach
        reach = max(reach, hi)
    return None


class _Stuck(Exception):
    def __init__(self, verdict: NotSeparable):
        self.verdict = verdict


def _build(region: Rect, items: list[tuple[int, Rect]]) -> GuillotineTree:
    if len(items) <= 1:
        return GuillotineTree.leaf(region, items[0] if items else None)
    best = None
    for rank, orient in enumerate((H, V)):
        if orient == H:
            c = _first_gap([(r.y0, r.y1) for _, r in items])
        else:
            c = _first_gap([(r.x0, r.x1) for _, r in items])
        if c is not None and (best is None or (c, rank) < best[0]):
            best = ((c, rank), orient, c)
    if best is None:
        raise _Stuck(NotSeparable(region, tuple(sorted(i for i, _ in items))))
    _, orient, c = best
    lo_reg, hi_reg = split(region, orient, c)
    if orient == H:
        lo = [t for t in items if t[1].y1 <= c]
        hi = [t for t in items if t[1].y0 >= c]
    else:
        lo = [t for t in items if t[1].x1 <= c]
        hi = [t for t in items if t[1].x0 >= c]
    return GuillotineTree.cut(region, orient, c, _build(lo_reg, lo), _build(hi_reg, hi))


def guillotine_tree(region: Rect, rects: dict[int, Rect]) -> GuillotineTree | NotSeparable:
    """Separate the given rects inside region by end-to-end cuts.

    Candidate cuts sit on item edges; the smallest coordinate wins and a
    horizontal cut wins a tie. Runs in O(n^2 log n) for n rects.
    """
    items = sorted(rects.items())
    for iid, r in items:
        if not region.contains(r):
            raise ValueError(f"item {iid} {r.as_tuple()} outside {region.as_tuple()}")
    try:
        return _build(region, items)
    except _Stuck as stuck:
        return stuck.verdict


def check_guillotine(p: Packing) -> GuillotineTree | NotSeparable:
    return guillotine_tree(p.instance.knapsack, p.rects())


def is_separable(p: Packing) -> bool:
    return isinstance(check_guillotine(p), GuillotineTree)


def tree_cuts(t: GuillotineTree) -> list[Cut]:
    """Cut segments in pre-order."""
    out = []
    for node in t.nodes():
        if node.is_leaf:
            continue
        r = node.region
        if node.orientation == H:
            out.append(Cut(H, node.position, r.x0, r.x1))
        else:
            out.append(Cut(V, node.position, r.y0, r.y1))
    return out


def verify_tree(t: GuillotineTree, rects: dict[int, Rect]) -> list[str]:
    """Replay t against rects; returns the list of broken tree invariants."""
    problems: list[str] = []
    seen: dict[int, int] = {}
    for node in t.nodes():
        r = node.region
        if node.is_leaf:
            if node.item_id is None:
                continue
            seen[node.item_id] = seen.get(node.item_id, 0) + 1
            actual = rects.get(node.item_id)
            if actual is None:
                problems.append(f"leaf holds unknown item {node.item_id}")
            elif actual != node.item_rect:
                problems.append(f"leaf rect of item {node.item_id} differs from the packing")
            elif not r.contains(actual):
                problems.append(f"item {node.item_id} sticks out of its leaf {r.as_tuple()}")
            continue
        lo_end, hi_end = (r.y0, r.y1) if node.orientation == H else (r.x0, r.x1)
        if not lo_end < node.position < hi_end:
            problems.append(f"cut {node.orientation}={node.position} not inside {r.as_tuple()}")
            continue
        lo_reg, hi_reg = split(r, node.orientation, node.position)
        if node.low.region != lo_reg or node.high.region != hi_reg:
            problems.append(f"children of {r.as_tuple()} do not partition it")
        for iid, ir in rects.items():
            if r.contains(ir) and crosses(ir, node.orientation, node.position):
                problems.append(f"cut {node.orientation}={node.position} crosses item {iid}")
    for iid in rects:
        if seen.get(iid, 0) != 1:
            problems.append(f"item {iid} appears in {seen.get(iid, 0)} leaves")
    return problems


# --- stages -----------------------------------------------------------------

@dataclass(frozen=True)
class LeafDepth:
    region: Rect
    item_id: int | None
    depth: int


@dataclass(frozen=True)
class StageProfile:
    stages: int
    leaves: tuple[LeafDepth, ...] = field(default_factory=tuple)


def _is_trim(node: GuillotineTree, item_sets: dict[int, list[Rect]]) -> GuillotineTree | None:
    """If node is a trim cut, return its item-bearing child."""
    lo_items = item_sets[id(node.low)]
    hi_items = item_sets[id(node.high)]
    c = node.position
    if not hi_items and lo_items:
        edge = [r.y1 for r in lo_items] if node.orientation == H else [r.x1 for r in lo_items]
        return node.low if c in edge else None
    if not lo_items and hi_items:
        edge = [r.y0 for r in hi_items] if node.orientation == H else [r.x0 for r in hi_items]
        return node.high if c in edge else None
    return None


def stage_count(t: GuillotineTree) -> StageProfile:
    """Orientation runs along root-to-leaf paths, trims excluded.

    Only leaves that hold an item decide the stage number.
    """
    item_sets: dict[int, list[Rect]] = {}

    def collect(node: GuillotineTree) -> list[Rect]:
        if node.is_leaf:
            rs = [node.item_rect] if node.item_id is not None else []
        else:
            rs = collect(node.low) + collect(node.high)
        item_sets[id(node)] = rs
        return rs

    collect(t)
    leaves: list[LeafDepth] = []

    def walk(node: GuillotineTree, runs: int, last: str | None) -> None:
        if node.is_leaf:
            leaves.append(LeafDepth(node.region, node.item_id, runs))
            return
        keep = _is_trim(node, item_sets)
        if keep is not None:
            walk(keep, runs, last)
            other = node.high if keep is node.low else node.low
            walk(other, runs, last)
            return
        nxt = runs if node.orientation == last else runs + 1
        walk(node.low, nxt, node.orientation)
        walk(node.high, nxt, node.orientation)

    walk(t, 0, None)
    stages = max((lf.depth for lf in leaves if lf.item_id is not None), default=0)
    return StageProfile(stages, tuple(leaves))


# --- mirroring --------------------------------------------------------------

def mirror_rect(r: Rect, axis: str, within: Rect) -> Rect:
    """Reflect r inside within; axis 'y' flips x coordinates, axis 'x' flips y."""
    if axis == "y":
        s = within.x0 + within.x1
        return Rect(s - r.x1, r.y0, s - r.x0, r.y1)
    if axis == "x":
        s = within.y0 + within.y1
        return Rect(r.x0, s - r.y1, r.x1, s - r.y0)
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def mirror_rects(rects: dict[int, Rect], axis: str, within: Rect) -> dict[int, Rect]:
    out = {}
    for iid, r in rects.items():
        if not within.contains(r):
            raise ValueError(f"item {iid} {r.as_tuple()} outside {within.as_tuple()}")
        out[iid] = mirror_rect(r, axis, within)
    return out


def mirror(p: Packing, axis: str, within: Rect) -> Packing:
    rects = mirror_rects(p.rects(), axis, within)
    pls = tuple(Placement(pl.item_id, rects[pl.item_id].x0, rects[pl.item_id].y0, pl.rotated)
                for pl in p.placements)
    return Packing(p.instance, pls)


def mirror_tree(t: GuillotineTree, axis: str, within: Rect) -> GuillotineTree:
    region = mirror_rect(t.region, axis, within)
    if t.is_leaf:
        if t.item_id is None:
            return GuillotineTree(region)
        return GuillotineTree(region, item_id=t.item_id, item_rect=mirror_rect(t.item_rect, axis, within))
    flips = (axis == "y" and t.orientation == V) or (axis == "x" and t.orientation == H)
    lo = mirror_tree(t.low, axis, within)
    hi = mirror_tree(t.high, axis, within)
    if not flips:
        return GuillotineTree.cut(region, t.orientation, t.position, lo, hi)
    s = within.x0 + within.x1 if axis == "y" else within.y0 + within.y1
    return GuillotineTree.cut(region, t.orientation, s - t.position, hi, lo)


# --- stage-bounded exhaustive packer ----------------------------------------

def env_budget(default: int | None) -> int | None:
    """Global cap on search expansions from GUILLOPACK_BUDGET, if set."""
    raw = os.environ.get("GUILLOPACK_BUDGET")
    if not raw:
        return default
    cap = int(raw)
    return cap if default is None else min(cap, default)


@dataclass(frozen=True)
class StageBoundedResult:
    packing: Packing
    value: int
    complete: bool
    expansions: int


def stage_bounded_best(inst: Instance, k: int, cap: int | None = 2_000_000) -> StageBoundedResult:
    """Maximum-profit packing among guillotine packings with at most k stages.

    Exhaustive recursion over cuts. A leaf holds one item anywhere inside it,
    so trims are never needed. Cut positions range over subset sums of the
    dimensions of the items still available to the piece (normal patterns).
    When the expansion cap is hit, unexplored states fall back to a single
    item and the result is flagged incomplete.
    """
    cap = env_budget(cap)
    items = list(inst.items)
    n = len(items)
    dims = [[it.dims(False)] + ([it.dims(True)] if inst.allow_rotation and it.w != it.h else [])
            for it in items]
    profits = [it.p for it in items]

    sums_cache: dict[tuple[int, int], frozenset[int]] = {}

    def sums(mask: int, axis: int) -> frozenset[int]:
        key = (mask, axis)
        got = sums_cache.get(key)
        if got is not None:
            return got
        if mask == 0:
            res = frozenset({0})
        else:
            low = (mask & -mask).bit_length() - 1
            rest = sums(mask & (mask - 1), axis)
            res = set(rest)
            for d in dims[low]:
                res.update(s + d[axis] for s in rest)
            res = frozenset(res)
        sums_cache[key] = res
        return res

    fit_cache: dict[tuple[int, int], int] = {}

    def fits(w: int, h: int) -> int:
        got = fit_cache.get((w, h))
        if got is None:
            got = 0
            for i in range(n):
                if any(a <= w and b <= h for a, b in dims[i]):
                    got |= 1 << i
            fit_cache[(w, h)] = got
        return got

    def mask_profit(mask: int) -> int:
        return sum(profits[i] for i in range(n) if mask >> i & 1)

    memo: dict[tuple, tuple[int, tuple | None]] = {}
    state = {"exp": 0, "complete": True}

    def leaf(w: int, h: int, mask: int) -> tuple[int, tuple | None]:
        best = (0, None)
        for i in range(n):
            if mask >> i & 1:
                for r, (a, b) in enumerate(dims[i]):
                    if a <= w and b <= h and profits[i] > best[0]:
                        best = (profits[i], ("leaf", i, r == 1))
        return best

    def solve(w: int, h: int, mask: int, runs: int, last: str | None) -> int:
        mask &= fits(w, h)
        key = (w, h, mask, runs, last)
        got = memo.get(key)
        if got is not None:
            return got[0]
        best = leaf(w, h, mask)
        if cap is not None and state["exp"] >= cap:
            state["complete"] = False
            memo[key] = best
            return best[0]
        state["exp"] += 1
        if mask & (mask - 1):
            ceiling = mask_profit(mask)
            for orient in (H, V):
                nr = runs if orient == last else runs + 1
                if nr > k or best[0] >= ceiling:
                    continue
                span = h if orient == H else w
                axis = 1 if orient == H else 0
                for c in sorted(sums(mask, axis)):
                    if c <= 0 or c >= span:
                        continue
                    if orient == H:
                        lo_fit, hi_fit = fits(w, c), fits(w, h - c)
                    else:
                        lo_fit, hi_fit = fits(c, h), fits(w - c, h)
                    if not (mask & lo_fit) or not (mask & hi_fit):
                        continue
                    must_lo = mask & ~hi_fit
                    free = mask & lo_fit & hi_fit
                    if must_lo & ~lo_fit:
                        must_lo &= lo_fit  # items fitting neither side are simply unused
                    sub = free
                    while True:
                        a = must_lo | sub
                        b = mask & ~a
                        if a and b:
                            if orient == H:
                                v = solve(w, c, a, nr, H) + solve(w, h - c, b, nr, H)
                            else:
                                v = solve(c, h, a, nr, V) + solve(w - c, h, b, nr, V)
                            if v > best[0]:
                                best = (v, ("cut", orient, c, a, b, nr))
                                if v >= ceiling:
                                    break
                        if sub == 0:
                            break
                        sub = (sub - 1) & free
                    if best[0] >= ceiling:
                        break
        memo[key] = best
        return best[0]

    value = solve(inst.N, inst.N, (1 << n) - 1, 0, None)
    pls: list[Placement] = []

    def emit(x: int, y: int, w: int, h: int, mask: int, runs: int, last: str | None) -> None:
        mask &= fits(w, h)
        _, choice = memo[(w, h, mask, runs, last)]
        if choice is None:
            return
        if choice[0] == "leaf":
            _, i, rot = choice
            pls.append(Placement(items[i].id, x, y, rot))
            return
        _, orient, c, a, b, nr = choice
        if orient == H:
            emit(x, y, w, c, a, nr, H)
            emit(x, y + c, w, h - c, b, nr, H)
        else:
            emit(x, y, c, h, a, nr, V)
            emit(x + c, y, w - c, h, b, nr, V)

    emit(0, 0, inst.N, inst.N, (1 << n) - 1, 0, None)
    pls.sort(key=lambda pl: pl.item_id)
    return StageBoundedResult(Packing(inst, tuple(pls)), value, state["complete"], state["exp"])
