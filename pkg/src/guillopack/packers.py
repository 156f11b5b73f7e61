"""Assignment subroutines: NFDH shelves, stack knapsack, bipartite matching,
generalized assignment, small-item assignment and the rounding of skewed
items by height groups and linear grouping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .compartments import BoxCompartment, LCompartment
from .core import Item, Rect
from .guillotine import GuillotineTree, H, V
from .lpack import stack_in_l


# --- NFDH ----------------------------------------------------------------------

@dataclass(frozen=True)
class NfdhResult:
    rects: dict[int, Rect]
    tree: GuillotineTree
    unpacked: tuple[int, ...]

    @property
    def area(self) -> int:
        return sum(r.area for r in self.rects.values())


def nfdh_pack(items: Sequence[Item], box: Rect) -> NfdhResult:
    """Next-fit decreasing height into box; stops at the first item that fails.

    The tree cuts shelves off with horizontal cuts and then items off each
    shelf with vertical cuts, so it has at most two stages.
    """
    for it in items:
        if it.w > box.w or it.h > box.h:
            raise ValueError(f"item {it.id} ({it.w}x{it.h}) exceeds box {box.w}x{box.h}")
    order = sorted(items, key=lambda it: (-it.h, it.id))
    shelves: list[tuple[int, int, list[tuple[int, Rect]]]] = []  # (y0, height, items)
    rects: dict[int, Rect] = {}
    x = box.x1  # forces a first shelf
    unpacked: list[int] = []
    for k, it in enumerate(order):
        if x + it.w > box.x1:
            y = shelves[-1][0] + shelves[-1][1] if shelves else box.y0
            if y + it.h > box.y1:
                unpacked = [o.id for o in order[k:]]
                break
            shelves.append((y, it.h, []))
            x = box.x0
        y0 = shelves[-1][0]
        r = Rect(x, y0, x + it.w, y0 + it.h)
        shelves[-1][2].append((it.id, r))
        rects[it.id] = r
        x += it.w
    return NfdhResult(rects, _shelf_tree(box, shelves), tuple(sorted(unpacked)))


def _shelf_tree(box: Rect, shelves) -> GuillotineTree:
    def row(region: Rect, placed: list[tuple[int, Rect]]) -> GuillotineTree:
        if not placed:
            return GuillotineTree.leaf(region)
        iid, r = placed[0]
        if r.x1 >= region.x1:
            return GuillotineTree.leaf(region, (iid, r))
        lo = Rect(region.x0, region.y0, r.x1, region.y1)
        hi = Rect(r.x1, region.y0, region.x1, region.y1)
        return GuillotineTree.cut(region, V, r.x1, GuillotineTree.leaf(lo, (iid, r)), row(hi, placed[1:]))

    def col(region: Rect, k: int) -> GuillotineTree:
        if k == len(shelves):
            return GuillotineTree.leaf(region)
        y0, h, placed = shelves[k]
        top = y0 + h
        if top >= region.y1:
            return row(region, placed)
        lo = Rect(region.x0, region.y0, region.x1, top)
        hi = Rect(region.x0, top, region.x1, region.y1)
        return GuillotineTree.cut(region, H, top, row(lo, placed), col(hi, k + 1))

    return col(box, 0)


# --- stack knapsack ----------------------------------------------------------------

def stack_knapsack(items: Sequence[Item], capacity: int, objective: str = "cardinality",
                   size: Callable[[Item], int] = lambda it: it.h) -> list[Item]:
    """Items whose sizes fit within capacity.

    Cardinality takes the smallest sizes greedily, which is optimal. Profit
    runs the exact 0/1 knapsack recursion over capacities.
    """
    if capacity < 0:
        raise ValueError("capacity must be non-negative")
    if objective == "cardinality":
        out, used = [], 0
        for it in sorted(items, key=lambda it: (size(it), it.id)):
            if used + size(it) > capacity:
                break
            out.append(it)
            used += size(it)
        return out
    if objective != "profit":
        raise ValueError(f"unknown objective {objective!r}")
    order = sorted(items, key=lambda it: it.id)
    best = [0] * (capacity + 1)
    take = [[False] * (capacity + 1) for _ in order]
    for k, it in enumerate(order):
        s = size(it)
        for c in range(capacity, s - 1, -1):
            if best[c - s] + it.p > best[c]:
                best[c] = best[c - s] + it.p
                take[k][c] = True
    out, c = [], capacity
    for k in range(len(order) - 1, -1, -1):
        if take[k][c]:
            out.append(order[k])
            c -= size(order[k])
    return sorted(out, key=lambda it: it.id)


# --- bipartite matching ------------------------------------------------------------

def _fits(it: Item, r: Rect, rotation: bool) -> bool:
    return (it.w <= r.w and it.h <= r.h) or (rotation and it.h <= r.w and it.w <= r.h)


def match_large(items: Sequence[Item], boxes: Sequence[BoxCompartment | Rect],
                rotation: bool = False) -> dict[int, int]:
    """Maximum matching of items to boxes they fit in, by augmenting paths.

    Returns item id -> box index.
    """
    rects = [b.rect if isinstance(b, BoxCompartment) else b for b in boxes]
    adj = {it.id: [j for j, r in enumerate(rects) if _fits(it, r, rotation)] for it in items}
    owner: dict[int, int] = {}  # box -> item id

    def augment(iid: int, seen: set[int]) -> bool:
        for j in adj[iid]:
            if j in seen:
                continue
            seen.add(j)
            if j not in owner or augment(owner[j], seen):
                owner[j] = iid
                return True
        return False

    for it in sorted(items, key=lambda it: it.id):
        augment(it.id, set())
    return {iid: j for j, iid in owner.items()}


# --- generalized assignment ----------------------------------------------------------

class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class GapInstance:
    """sizes[i][j] > capacities[j] marks item i as not assignable to bin j."""

    capacities: tuple[int, ...]
    sizes: tuple[tuple[int, ...], ...]
    profits: tuple[tuple[int, ...], ...]

    @staticmethod
    def build(capacities: Sequence[int], sizes: Sequence[Sequence[int | None]],
              profits: Sequence[Sequence[int]]) -> GapInstance:
        """None in sizes is the infinity marker, stored as capacity + 1."""
        caps = tuple(int(c) for c in capacities)
        sz = tuple(tuple(caps[j] + 1 if s is None else int(s) for j, s in enumerate(row)) for row in sizes)
        return GapInstance(caps, sz, tuple(tuple(int(p) for p in row) for row in profits))

    def __post_init__(self) -> None:
        m = len(self.capacities)
        if any(len(r) != m for r in self.sizes) or any(len(r) != m for r in self.profits):
            raise ValueError("sizes and profits need one entry per bin")
        if len(self.sizes) != len(self.profits):
            raise ValueError("sizes and profits disagree on the item count")

    @property
    def n(self) -> int:
        return len(self.sizes)

    def allowed(self, i: int, j: int) -> bool:
        return self.sizes[i][j] <= self.capacities[j]

    def value(self, assignment: Mapping[int, int]) -> int:
        return sum(self.profits[i][j] for i, j in assignment.items())

    def feasible(self, assignment: Mapping[int, int]) -> bool:
        load = [0] * len(self.capacities)
        for i, j in assignment.items():
            if not self.allowed(i, j):
                return False
            load[j] += self.sizes[i][j]
        return all(l <= c for l, c in zip(load, self.capacities))


def _gap_exact(g: GapInstance, budget: int) -> dict[int, int]:
    layers: list[dict[tuple, tuple[int, tuple | None, int]]] = []
    states = {tuple(g.capacities): (0, None, -1)}
    for i in range(g.n):
        layers.append(states)
        nxt: dict[tuple, tuple[int, tuple | None, int]] = {}
        for res, (val, _, _) in states.items():
            cand = [(res, val, -1)]
            for j in range(len(res)):
                s = g.sizes[i][j]
                if g.allowed(i, j) and s <= res[j]:
                    r2 = res[:j] + (res[j] - s,) + res[j + 1:]
                    cand.append((r2, val + g.profits[i][j], j))
            for r2, v2, j in cand:
                got = nxt.get(r2)
                if got is None or v2 > got[0]:
                    nxt[r2] = (v2, res, j)
        if len(nxt) > budget:
            raise BudgetExceeded(f"{len(nxt)} states exceed the budget {budget}")
        states = nxt
    res = max(states, key=lambda r: (states[r][0], r))
    out: dict[int, int] = {}
    for i in range(g.n - 1, -1, -1):
        _, prev, j = (layers[i + 1] if i + 1 < g.n else states)[res]
        if j >= 0:
            out[i] = j
        res = prev
    return out


def _gap_greedy(g: GapInstance, seed: dict[int, int]) -> dict[int, int]:
    load = [0] * len(g.capacities)
    out = dict(seed)
    for i, j in seed.items():
        load[j] += g.sizes[i][j]
    opts = []
    for i in range(g.n):
        if i in out:
            continue
        for j in range(len(g.capacities)):
            if g.allowed(i, j) and g.profits[i][j] > 0:
                opts.append((-Fraction(g.profits[i][j], max(g.sizes[i][j], 1)), -g.profits[i][j], i, j))
    for _, _, i, j in sorted(opts):
        if i not in out and load[j] + g.sizes[i][j] <= g.capacities[j]:
            out[i] = j
            load[j] += g.sizes[i][j]
    return out


def gap_solve(g: GapInstance, mode: str = "exact", budget: int = 1_000_000) -> dict[int, int]:
    """Assignment item index -> bin index.

    exact: dynamic program over residual capacity vectors, guarded by a
    state budget. greedy_eps: a heuristic. Density greedy is seeded with each
    single (item, bin) choice and the best outcome is kept.
    """
    if mode == "exact":
        return _gap_exact(g, budget)
    if mode != "greedy_eps":
        raise ValueError(f"unknown mode {mode!r}")
    best = _gap_greedy(g, {})
    for i in range(g.n):
        for j in range(len(g.capacities)):
            if g.allowed(i, j):
                cand = _gap_greedy(g, {i: j})
                if g.value(cand) > g.value(best):
                    best = cand
    return best


# --- small items ---------------------------------------------------------------------

@dataclass(frozen=True)
class SmallAssignment:
    per_box: tuple[tuple[int, ...], ...]
    rects: dict[int, Rect]
    trees: tuple[GuillotineTree, ...]
    gap_value: int
    mode: str


def _eps_small(it: Item, box: Rect, eps: Fraction) -> bool:
    return it.w <= eps * box.w and it.h <= eps * box.h


def assign_small(boxes: Sequence[BoxCompartment | Rect], items: Sequence[Item], eps,
                 objective: str = "cardinality", mode: str = "auto", budget: int = 200_000) -> SmallAssignment:
    """Distribute small items over boxes and pack each box with NFDH.

    The assignment is a GAP with bin capacity area(B) and item size area(i),
    allowed only when the item is eps-small for the box. Each box then keeps
    its densest items while their area stays within (1 - 2 eps - eps^2) area(B),
    which NFDH is guaranteed to pack.
    """
    eps = Fraction(eps)
    rects_b = [b.rect if isinstance(b, BoxCompartment) else b for b in boxes]
    items = sorted(items, key=lambda it: it.id)
    prof = (lambda it: 1) if objective == "cardinality" else (lambda it: it.p)
    g = GapInstance.build([r.area for r in rects_b],
                          [[it.area if _eps_small(it, r, eps) else None for r in rects_b] for it in items],
                          [[prof(it) for _ in rects_b] for it in items])
    used = mode
    if mode == "auto":
        try:
            asg, used = gap_solve(g, "exact", budget), "exact"
        except BudgetExceeded:
            asg, used = gap_solve(g, "greedy_eps"), "greedy_eps"
    else:
        asg = gap_solve(g, mode, budget)
    per_box, rects, trees = [], {}, []
    fill = 1 - 2 * eps - eps * eps
    for j, box in enumerate(rects_b):
        mine = [items[i] for i, b in asg.items() if b == j]
        mine.sort(key=lambda it: (-Fraction(prof(it), it.area), it.id))
        keep, area = [], 0
        for it in mine:
            if area + it.area > fill * box.area:
                break
            keep.append(it)
            area += it.area
        res = nfdh_pack(keep, box)
        per_box.append(tuple(sorted(res.rects)))
        rects.update(res.rects)
        trees.append(res.tree)
    return SmallAssignment(tuple(per_box), rects, tuple(trees), g.value(asg), used)


# --- rounding of skewed items ------------------------------------------------------------

def _orient(it: Item, orientation: Callable[[Item], str | None] | None) -> str | None:
    if orientation is not None:
        return orientation(it)
    return "h" if it.w > it.h else "v" if it.h > it.w else None


@dataclass(frozen=True)
class HeightGroups:
    """Skewed items grouped by thickness: height for horizontal items, width
    for vertical ones. Group l holds thickness in [(1+eps)^l, (1+eps)^(l+1))."""

    eps: Fraction
    hor: dict[int, tuple[Item, ...]]
    ver: dict[int, tuple[Item, ...]]

    def rounded(self, level: int) -> Fraction:
        return (1 + self.eps) ** (level + 1)

    def slot(self, level: int) -> int:
        """Largest integer thickness in the group; integer sides never exceed it."""
        return math.ceil(self.rounded(level)) - 1

    def cells(self) -> list[tuple[str, int, tuple[Item, ...]]]:
        return [("h", l, g) for l, g in sorted(self.hor.items())] + \
               [("v", l, g) for l, g in sorted(self.ver.items())]


def _level(d: int, base: Fraction) -> int:
    l, hi = 0, base
    while hi <= d:
        hi *= base
        l += 1
    return l


def build_height_groups(items: Sequence[Item], eps, N: int | None = None,
                        orientation: Callable[[Item], str | None] | None = None) -> HeightGroups:
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    base = 1 + eps
    hor: dict[int, list[Item]] = {}
    ver: dict[int, list[Item]] = {}
    for it in items:
        o = _orient(it, orientation)
        if o == "h":
            hor.setdefault(_level(it.h, base), []).append(it)
        elif o == "v":
            ver.setdefault(_level(it.w, base), []).append(it)
        else:
            raise ValueError(f"item {it.id} is not skewed")
    key = lambda it: it.id
    return HeightGroups(eps, {l: tuple(sorted(g, key=key)) for l, g in hor.items()},
                        {l: tuple(sorted(g, key=key)) for l, g in ver.items()})


@dataclass(frozen=True)
class LinearGroups:
    dropped: tuple[Item, ...]
    blocks: tuple[tuple[int, tuple[Item, ...]], ...]  # (rounded length, members)


def linear_group(group: Sequence[Item], eps, length: Callable[[Item], int] = lambda it: it.w) -> LinearGroups:
    """Sort by non-increasing length and cut into 1/eps + 1 blocks.

    The first 1/eps blocks hold ceil(n / (1/eps + 1)) items each and the last
    holds the rest. The first block is dropped and each other block is rounded
    up to its longest member.
    """
    eps = Fraction(eps)
    inv = 1 / eps
    if inv.denominator != 1:
        raise ValueError("1/eps must be an integer")
    k = int(inv)
    order = sorted(group, key=lambda it: (-length(it), it.id))
    if not order:
        return LinearGroups((), ())
    q = -(-len(order) // (k + 1))
    chunks = [order[b * q:(b + 1) * q] for b in range(k)] + [order[k * q:]]
    blocks = tuple((length(c[0]), tuple(c)) for c in chunks[1:] if c)
    return LinearGroups(tuple(chunks[0]), blocks)


@dataclass(frozen=True)
class RoundedCell:
    """count identical rounded items: length along the long side, thickness across."""

    orientation: str
    length: int
    thickness: int
    items: tuple[Item, ...]  # originals to substitute, each no larger than the rounded shape

    @property
    def count(self) -> int:
        return len(self.items)


def place_rounded_in_compartment(c: BoxCompartment | LCompartment, cells: Sequence[RoundedCell]) -> dict[int, Rect]:
    """Nice placement of the rounded cells, then originals put into their slots.

    A box stacks horizontal slots bottom-up (or vertical slots left to right)
    by non-increasing length. An L uses the canonical boundary placement in its
    normalized frame: horizontal slots bottom-up pushed against the far edge,
    vertical slots left to right pushed against the top.
    """
    for cell in cells:
        for it in cell.items:
            along, across = (it.w, it.h) if cell.orientation == "h" else (it.h, it.w)
            if along > cell.length or across > cell.thickness:
                raise ValueError(f"item {it.id} exceeds its rounded slot")
    slots: list[tuple[str, int, int, Item]] = []
    for cell in cells:
        for it in cell.items:
            slots.append((cell.orientation, cell.length, cell.thickness, it))
    if not slots:
        return {}
    fake_h = [Item(k, ln, th) for k, (o, ln, th, _) in enumerate(slots) if o == "h"]
    fake_v = [Item(k, th, ln) for k, (o, ln, th, _) in enumerate(slots) if o == "v"]
    if isinstance(c, BoxCompartment):
        box = c.rect
        if fake_h and fake_v:
            raise ValueError("a box holds one orientation only")
        if c.kind == "horizontal-stack" and fake_v or c.kind == "vertical-stack" and fake_h:
            raise ValueError(f"box kind {c.kind} does not take these items")
        if c.kind in ("one-large", "small-area"):
            raise ValueError(f"box kind {c.kind} does not take skewed slots")
        out: dict[int, Rect] = {}
        if fake_h:
            if sum(f.h for f in fake_h) > box.h or max(f.w for f in fake_h) > box.w:
                raise ValueError("horizontal slots exceed the box")
            y = box.y0
            for f in sorted(fake_h, key=lambda f: (-f.w, f.id)):
                it = slots[f.id][3]
                out[it.id] = Rect(box.x0, y, box.x0 + it.w, y + it.h)
                y += f.h
        else:
            if sum(f.w for f in fake_v) > box.w or max(f.h for f in fake_v) > box.h:
                raise ValueError("vertical slots exceed the box")
            x = box.x0
            for f in sorted(fake_v, key=lambda f: (-f.h, f.id)):
                it = slots[f.id][3]
                out[it.id] = Rect(x, box.y0, x + it.w, box.y0 + it.h)
                x += f.w
        return out
    a, b = c.arms
    got = stack_in_l(fake_h, fake_v, c.outer, b, a)
    if got is None:
        raise ValueError("slots do not fit the L-compartment")
    out = {}
    for k, slot in got.items():
        it = slots[k][3]
        out[it.id] = c.from_canonical(Rect(slot.x0, slot.y0, slot.x0 + it.w, slot.y0 + it.h))
    return out
