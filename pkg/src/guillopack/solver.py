"""End-to-end cardinality pipeline over compartments, at desk scale."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .classify import ClassThresholds, ItemClass, choose_thresholds, partition
from .compartments import (BoxCompartment, CompartmentSet, Compartment, LCompartment, PCut, PLSplit, PNode,
                           compose_pseudo)
from .core import Instance, Item, Packing, Placement, Rect
from .guillotine import GuillotineTree, H, V, split
from .lpack import best_in_l
from .packers import (RoundedCell, assign_small, build_height_groups, linear_group, match_large,
                      place_rounded_in_compartment, stack_knapsack)


def default_repetitions(k: int, delta=Fraction(1, 20)) -> int:
    """Rounds so that a rainbow event of probability e^-k is missed with probability <= delta."""
    return math.ceil(math.exp(k) * math.log(1 / Fraction(delta)))


@dataclass(frozen=True)
class SolverConfig:
    eps: Fraction = Fraction(1, 3)
    thresholds: ClassThresholds | None = None  # None: choose_thresholds(eps)
    compartment_source: str = "enumerate"  # used when no compartments are passed
    grid: int | None = None  # cut spacing for enumeration; None means N // 8
    depth: int = 3
    max_sets: int = 64
    kind_combos: int = 64
    regime_threshold_c: int = 2
    regime_log: str = "nN"  # nN or N
    mode: str = "auto"  # auto, few or many
    colors: int = 6
    repetitions: int | None = None  # None: default_repetitions(min(colors, 4))
    seed: int = 0
    budget: int = 200_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", Fraction(self.eps))
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.repetitions is not None and self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.mode not in ("auto", "few", "many"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.regime_log not in ("nN", "N"):
            raise ValueError("regime_log must be 'nN' or 'N'")
        if self.colors < 1:
            raise ValueError("need at least one color")

    def regime_threshold(self, n: int, N: int) -> float:
        base = n * N if self.regime_log == "nN" else N
        return self.regime_threshold_c * math.log2(max(base, 2))


@dataclass
class PathResult:
    """Per compartment index, the placed item rects."""

    rects: dict[int, dict[int, Rect]]
    rounds: int = 0
    complete: bool = True
    path: str = ""

    @property
    def value(self) -> int:
        return sum(len(r) for r in self.rects.values())


# --- per-compartment exact solvers for skewed items ---------------------------------

def _skewed_kind(c: Compartment) -> str | None:
    if isinstance(c, LCompartment):
        return "l"
    return {"horizontal-stack": "h", "vertical-stack": "v"}.get(c.kind)


def solve_compartment(c: Compartment, hor: Sequence[Item], ver: Sequence[Item]) -> dict[int, Rect]:
    """Most items nicely placed into one compartment (exact)."""
    kind = _skewed_kind(c)
    if kind == "h":
        b = c.rect
        chosen = stack_knapsack([it for it in hor if it.w <= b.w], b.h, size=lambda it: it.h)
        out, y = {}, b.y0
        for it in chosen:
            out[it.id] = Rect(b.x0, y, b.x0 + it.w, y + it.h)
            y += it.h
        return out
    if kind == "v":
        b = c.rect
        chosen = stack_knapsack([it for it in ver if it.h <= b.h], b.w, size=lambda it: it.w)
        out, x = {}, b.x0
        for it in chosen:
            out[it.id] = Rect(x, b.y0, x + it.w, b.y0 + it.h)
            x += it.w
        return out
    if kind == "l":
        a, bb = c.arms
        sol = best_in_l(hor, ver, c.outer, bb, a)
        return {i: c.from_canonical(r) for i, r in sol.rects.items()}
    return {}


class _CompCache:
    def __init__(self, comps: Sequence[Compartment], orient: Mapping[int, str]):
        self.comps, self.orient = comps, orient
        self.memo: dict[tuple[int, frozenset], dict[int, Rect]] = {}

    def get(self, ci: int, items: Sequence[Item]) -> dict[int, Rect]:
        key = (ci, frozenset(it.id for it in items))
        got = self.memo.get(key)
        if got is None:
            hor = [it for it in items if self.orient[it.id] == "h"]
            ver = [it for it in items if self.orient[it.id] == "v"]
            got = solve_compartment(self.comps[ci], hor, ver)
            self.memo[key] = got
        return got


def _sequential(items: Sequence[Item], comps: Sequence[Compartment], cache: _CompCache) -> PathResult:
    left = list(items)
    out: dict[int, dict[int, Rect]] = {}
    for ci in range(len(comps)):
        got = cache.get(ci, left)
        out[ci] = got
        left = [it for it in left if it.id not in got]
    return PathResult(out, path="sequential")


# --- few items: color coding ----------------------------------------------------------

def few_items_path(items: Sequence[Item], comps: Sequence[Compartment], cfg: SolverConfig,
                   orient: Mapping[int, str], colorings: Sequence[Mapping[int, int]] | None = None) -> PathResult:
    """Color coding over the skewed items.

    Each round colors the items, then splits the colors among compartments
    by a subset DP, solving each compartment exactly on the items of its
    colors. An optimum whose items got pairwise distinct colors is found.
    With no more items than colors the identity coloring is used once.
    """
    items = sorted(items, key=lambda it: it.id)
    if not items or not comps:
        return PathResult({}, path="few")
    cache = _CompCache(comps, orient)
    k = cfg.colors
    if colorings is None:
        if len(items) <= k:
            colorings = [{it.id: c for c, it in enumerate(items)}]
        else:
            rng = random.Random(cfg.seed)
            reps = cfg.repetitions or default_repetitions(min(k, 4))
            colorings = [{it.id: rng.randrange(k) for it in items} for _ in range(reps)]
    best = PathResult({}, path="few")
    for col in colorings:
        used = sorted({col[it.id] for it in items})
        classes = [[it for it in items if col[it.id] == c] for c in used]
        m = len(used)
        full = (1 << m) - 1
        vals = []
        for ci in range(len(comps)):
            row = [0] * (1 << m)
            for S in range(1, 1 << m):
                row[S] = len(cache.get(ci, [it for b in range(m) if S >> b & 1 for it in classes[b]]))
            vals.append(row)
        # f[i][mask]: best over compartments i.. using colors in mask
        f = [[0] * (1 << m) for _ in range(len(comps) + 1)]
        pick = [[0] * (1 << m) for _ in range(len(comps))]
        for i in range(len(comps) - 1, -1, -1):
            for mask in range(1 << m):
                bv, bs = f[i + 1][mask], 0
                sub = mask
                while sub:
                    v = vals[i][sub] + f[i + 1][mask ^ sub]
                    if v > bv:
                        bv, bs = v, sub
                    sub = (sub - 1) & mask
                f[i][mask], pick[i][mask] = bv, bs
        if f[0][full] > best.value:
            rects, mask = {}, full
            for i in range(len(comps)):
                S = pick[i][mask]
                if S:
                    rects[i] = cache.get(i, [it for b in range(m) if S >> b & 1 for it in classes[b]])
                mask ^= S
            best = PathResult(rects, path="few")
    best.rounds = len(colorings)
    return best


# --- many items: rounding plus count enumeration ------------------------------------------

def _lattice(n: int, eps: Fraction) -> list[int]:
    vals = {0, n}
    x = Fraction(1)
    while x <= n:
        vals.add(math.ceil(x))
        x *= 1 + eps
    return sorted(v for v in vals if v <= n)


def many_items_path(items: Sequence[Item], comps: Sequence[Compartment], cfg: SolverConfig,
                    orient: Mapping[int, str]) -> PathResult:
    """Height groups, prefix guesses, linear grouping and count enumeration.

    For each group a prefix of the narrowest items is guessed from a
    (1+eps)-geometric lattice, linearly grouped, and every block is split
    over compatible compartments in lattice steps. Feasibility is checked by
    actually placing the rounded slots. The search is depth first with a
    budget. Items left out of the best assignment, such as a dropped first
    block, are then re-inserted greedily where their slot still fits.
    """
    eps = cfg.eps
    items = sorted(items, key=lambda it: it.id)
    if not items or not comps:
        return PathResult({}, path="many")
    hg = build_height_groups(items, eps, orientation=lambda it: orient[it.id])
    groups = []
    for o, level, members in hg.cells():
        length = (lambda it: it.w) if o == "h" else (lambda it: it.h)
        groups.append((o, hg.slot(level), sorted(members, key=lambda it: (length(it), it.id)), length))
    compat = {o: [ci for ci, c in enumerate(comps) if _skewed_kind(c) in (o, "l")] for o in ("h", "v")}
    suffix = [0] * (len(groups) + 1)
    for g in range(len(groups) - 1, -1, -1):
        suffix[g] = suffix[g + 1] + len(groups[g][2])
    state = {"exp": 0, "complete": True}
    best: dict = {"value": -1, "cells": None}
    assigned: dict[int, list[RoundedCell]] = {ci: [] for ci in range(len(comps))}

    def fits(ci: int) -> bool:
        try:
            place_rounded_in_compartment(comps[ci], assigned[ci])
            return True
        except ValueError:
            return False

    def over_budget() -> bool:
        state["exp"] += 1
        if state["exp"] > cfg.budget:
            state["complete"] = False
            return True
        return False

    def blocks_dfs(g: int, blocks: list, b: int, placed: int, rest: int) -> None:
        if over_budget() or placed + rest + suffix[g + 1] <= best["value"]:
            return
        if b == len(blocks):
            groups_dfs(g + 1, placed)
            return
        o, length, members = blocks[b]
        spread(g, blocks, b, o, length, list(members), 0, placed, rest - len(members))

    def spread(g, blocks, b, o, length, members, k, placed, rest) -> None:
        if not members or k == len(compat[o]):
            blocks_dfs(g, blocks, b + 1, placed, rest)
            return
        ci = compat[o][k]
        thick = groups[g][1]
        for amount in reversed(_lattice(len(members), eps)):
            if amount:
                assigned[ci].append(RoundedCell(o, length, thick, tuple(members[:amount])))
                if not fits(ci):
                    assigned[ci].pop()
                    continue
            spread(g, blocks, b, o, length, members[amount:], k + 1, placed + amount, rest)
            if amount:
                assigned[ci].pop()
            if over_budget():
                return

    def groups_dfs(g: int, placed: int) -> None:
        if placed + suffix[g] <= best["value"]:
            return
        if g == len(groups):
            best["value"] = placed
            best["cells"] = {ci: list(cs) for ci, cs in assigned.items()}
            return
        o, thick, members, length = groups[g]
        for m in reversed(_lattice(len(members), eps)):
            lg = linear_group(members[:m], eps, length)
            blocks = [(o, ln, mem) for ln, mem in lg.blocks]
            blocks_dfs(g, blocks, 0, placed, sum(len(mem) for *_, mem in blocks))
            if state["exp"] > cfg.budget:
                return

    groups_dfs(0, 0)
    cells_by = best["cells"] or {ci: [] for ci in range(len(comps))}
    # items dropped by grouping or left over go back in wherever their slot still fits
    used = {it.id for cs in cells_by.values() for cell in cs for it in cell.items}
    for o, thick, members, length in groups:
        for it in members:
            if it.id in used:
                continue
            for ci in compat[o]:
                cells_by[ci].append(RoundedCell(o, length(it), thick, (it,)))
                try:
                    place_rounded_in_compartment(comps[ci], cells_by[ci])
                except ValueError:
                    cells_by[ci].pop()
                    continue
                used.add(it.id)
                break
    rects: dict[int, dict[int, Rect]] = {}
    for ci, cells in cells_by.items():
        if cells:
            rects[ci] = place_rounded_in_compartment(comps[ci], cells)
    return PathResult(rects, complete=state["complete"], path="many")


# --- profit threshold ----------------------------------------------------------------------

def split_by_profit_threshold(items: Sequence[Item], c, N: int, eps=Fraction(1, 3)
                              ) -> tuple[list[Item], list[Item], Item | None]:
    """(R_high, R_low, i*) for the weighted entry point.

    Items below (eps / 2n) of the top profit are dropped first. Scanning by
    non-increasing profit, i* is the first item whose prefix profit, itself
    included, reaches c log2(nN) p(i*). R_high holds the items of larger
    profit than i*; without such an i* every survivor is in R_high.
    """
    n = len(items)
    if n == 0:
        return [], [], None
    top = max(it.p for it in items)
    floor = Fraction(eps) / (2 * n) * top
    kept = sorted((it for it in items if it.p >= floor), key=lambda it: (-it.p, it.id))
    bound = Fraction(c) * Fraction(math.log2(n * N)) if n * N > 1 else Fraction(0)
    prefix = 0
    for it in kept:
        prefix += it.p
        if prefix >= bound * it.p:
            high = [x for x in kept if x.p > it.p]
            low = [x for x in kept if x.p <= it.p]
            return high, low, it
    return kept, [], None


# --- compartment enumeration and kinds -------------------------------------------------------

def _positions(lo: int, hi: int, g: int) -> list[int]:
    start = (lo // g + 1) * g
    return list(range(start, hi, g))


def enumerate_compartment_sets(N: int, cfg: SolverConfig, t: ClassThresholds | None = None) -> Iterator[CompartmentSet]:
    """Pseudo trees of bounded depth with cuts and L arms on a grid.

    Trees come in order of leaf count, at most cfg.max_sets of them; boxes
    carry no kind. L arms are kept thin with respect to eps_large when
    thresholds are given.
    """
    g = cfg.grid or max(1, N // 8)
    lim = (t.eps_large * N / 2) if t is not None else None

    def trees(r: Rect, leaves: int, depth: int) -> Iterator[PNode]:
        if leaves == 1:
            yield BoxCompartment(r, None)
            return
        if depth == 0:
            return
        for o in (V, H):
            lo_end, hi_end = (r.x0, r.x1) if o == V else (r.y0, r.y1)
            for c in _positions(lo_end, hi_end, g):
                lo, hi = split(r, o, c)
                for l1 in range(1, leaves):
                    for a in trees(lo, l1, depth - 1):
                        for b in trees(hi, leaves - l1, depth - 1):
                            yield PCut(r, o, c, a, b)
        for fx, fy in ((False, False), (True, False), (False, True), (True, True)):
            for a in _positions(0, r.w, g):
                for b in _positions(0, r.h, g):
                    if lim is not None and not (a < lim and b < lim):
                        continue
                    ix0, ix1 = (r.x0, r.x1 - a) if fx else (r.x0 + a, r.x1)
                    iy0, iy1 = (r.y0, r.y1 - b) if fy else (r.y0 + b, r.y1)
                    inner = Rect(ix0, iy0, ix1, iy1)
                    for rest in trees(inner, leaves - 1, depth - 1):
                        yield PLSplit(r, LCompartment(r, inner), rest)

    count = 0
    for leaves in range(1, 2 ** cfg.depth + 1):
        for tree in trees(Rect(0, 0, N, N), leaves, cfg.depth):
            yield CompartmentSet.from_tree(tree)
            count += 1
            if count >= cfg.max_sets:
                return


def _with_kinds(node: PNode, kinds: Iterator[str]) -> PNode:
    if isinstance(node, BoxCompartment):
        return BoxCompartment(node.rect, next(kinds)) if node.kind is None else node
    if isinstance(node, PCut):
        return PCut(node.region, node.orientation, node.position, _with_kinds(node.low, kinds),
                    _with_kinds(node.high, kinds))
    return PLSplit(node.region, node.l, _with_kinds(node.rest, kinds))


def kind_options(b: Rect, classes: Mapping[ItemClass, Sequence[Item]], eps: Fraction) -> list[str]:
    opts = []
    if any(it.w <= b.w and it.h <= b.h for it in classes[ItemClass.HORIZONTAL]):
        opts.append("horizontal-stack")
    if any(it.w <= b.w and it.h <= b.h for it in classes[ItemClass.VERTICAL]):
        opts.append("vertical-stack")
    if any(it.w <= b.w and it.h <= b.h for it in classes[ItemClass.LARGE]):
        opts.append("one-large")
    if any(it.w <= eps * b.w and it.h <= eps * b.h for it in classes[ItemClass.SMALL]):
        opts.append("small-area")
    return opts or ["one-large"]


def expand_kinds(cset: CompartmentSet, classes, eps: Fraction, cap: int) -> Iterator[CompartmentSet]:
    """Every kind choice for boxes without one, restricted to kinds some item could use."""
    open_boxes = [c for c in cset.compartments if isinstance(c, BoxCompartment) and c.kind is None]
    if not open_boxes:
        yield cset
        return
    opts = [kind_options(b.rect, classes, eps) for b in open_boxes]
    for combo in itertools.islice(itertools.product(*opts), cap):
        yield CompartmentSet.from_tree(_with_kinds(cset.tree, iter(combo)))


# --- pipeline ---------------------------------------------------------------------------

@dataclass
class SolveResult:
    packing: Packing
    tree: GuillotineTree
    compartments: CompartmentSet | None
    stats: dict = field(default_factory=dict)

    @property
    def value(self) -> int:
        return len(self.packing)


def _solve_fixed(inst: Instance, cset: CompartmentSet, classes, t: ClassThresholds, cfg: SolverConfig,
                 running_best: int) -> SolveResult:
    comps = list(cset.compartments)
    fill: dict[int, dict[int, Rect]] = {k: {} for k in range(len(comps))}
    large_idx = [k for k, c in enumerate(comps) if isinstance(c, BoxCompartment) and c.kind == "one-large"]
    matched = match_large(classes[ItemClass.LARGE], [comps[k] for k in large_idx])
    for iid, j in matched.items():
        b = comps[large_idx[j]].rect
        it = inst.item(iid)
        fill[large_idx[j]][iid] = Rect(b.x0, b.y0, b.x0 + it.w, b.y0 + it.h)
    small_idx = [k for k, c in enumerate(comps) if isinstance(c, BoxCompartment) and c.kind == "small-area"]
    if small_idx and classes[ItemClass.SMALL]:
        sa = assign_small([comps[k] for k in small_idx], classes[ItemClass.SMALL], cfg.eps)
        for j, ids in enumerate(sa.per_box):
            fill[small_idx[j]].update({i: sa.rects[i] for i in ids})
    skew_idx = [k for k, c in enumerate(comps) if _skewed_kind(c) is not None]
    skewed = list(classes[ItemClass.HORIZONTAL]) + list(classes[ItemClass.VERTICAL])
    orient = {it.id: "h" for it in classes[ItemClass.HORIZONTAL]}
    orient.update({it.id: "v" for it in classes[ItemClass.VERTICAL]})
    sub = [comps[k] for k in skew_idx]
    stats: dict = {"path": "none"}
    if sub and skewed:
        seq = _sequential(skewed, sub, _CompCache(sub, orient))
        base = running_best - sum(len(f) for f in fill.values())
        mode = cfg.mode
        if mode == "auto":
            proxy = max(seq.value, base)
            mode = "few" if proxy <= cfg.regime_threshold(len(inst.items), inst.N) else "many"
        res = few_items_path(skewed, sub, cfg, orient) if mode == "few" else many_items_path(skewed, sub, cfg, orient)
        if seq.value > res.value:
            res = seq
        stats = {"path": res.path, "rounds": res.rounds, "complete": res.complete, "regime": mode}
        for j, rects in res.rects.items():
            fill[skew_idx[j]].update(rects)
    pls = {k: [Placement(i, r.x0, r.y0, False) for i, r in f.items()] for k, f in fill.items()}
    composed = compose_pseudo(inst, cset.tree, pls, eps=cfg.eps, thresholds=t)
    return SolveResult(composed.packing, composed.tree, cset, stats)


def solve_cardinality(inst: Instance, compartments_: CompartmentSet | None = None,
                      cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Most items placed nicely into compartments, certified separable.

    Large items are matched to one-large boxes, small items go through the
    GAP assignment into small-area boxes and skewed items take the few-items
    or many-items path. Intermediate items are never packed. Without given
    compartments, bounded-depth pseudo trees on a grid are enumerated.
    """
    if inst.allow_rotation:
        raise ValueError("the pipeline does not rotate items")
    t = cfg.thresholds or choose_thresholds(inst, cfg.eps)
    classes = partition(inst.items, t, inst.N)
    if compartments_ is not None and not compartments_.compartments:
        return SolveResult(Packing(inst, ()), GuillotineTree.leaf(inst.knapsack), compartments_, {"tried": 0})
    if compartments_ is not None:
        sets: Iterator[CompartmentSet] = iter([compartments_])
    elif cfg.compartment_source == "enumerate":
        sets = enumerate_compartment_sets(inst.N, cfg, t)
    else:
        raise ValueError("compartments are required when the source is 'given'")
    best: SolveResult | None = None
    tried = 0
    for cset in sets:
        for kinded in expand_kinds(cset, classes, cfg.eps, cfg.kind_combos):
            tried += 1
            res = _solve_fixed(inst, kinded, classes, t, cfg, best.value if best else 0)
            if best is None or res.value > best.value:
                best = res
    if best is None:
        empty = Packing(inst, ())
        return SolveResult(empty, GuillotineTree.leaf(inst.knapsack), compartments_, {"tried": 0})
    best.stats["tried"] = tried
    best.stats["thresholds"] = (str(t.eps_large), str(t.eps_small))
    return best
