"""Instance generators, planted fixtures, the free-vs-guillotine ratio
experiment and the benchmark report."""

from __future__ import annotations

import csv
import io
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .classify import ClassThresholds
from .compartments import (BOX_KINDS, BoxCompartment, CompartmentSet, LCompartment, PCut, PLSplit, PNode,
                           compartments)
from .core import Instance, Item, Packing, Placement, Rect, place
from .guillotine import H, V, split


def hard_family_N(k: int) -> int:
    return 2 ** (k + 1)


def gen_hard_family(k: int) -> tuple[Instance, Packing]:
    """2k nested long items; H_j has id 2j-1 and V_j has id 2j.

    H_j spans (a, a)-(N, b) and V_j spans (a, b)-(b, N) with a = 2^(j-1) - 1
    and b = 2^j - 1.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    N = hard_family_N(k)
    items, rects = [], {}
    for j in range(1, k + 1):
        a, b = 2 ** (j - 1) - 1, 2 ** j - 1
        hr, vr = Rect(a, a, N, b), Rect(a, b, b, N)
        items += [Item(2 * j - 1, hr.w, hr.h), Item(2 * j, vr.w, vr.h)]
        rects[2 * j - 1], rects[2 * j] = hr, vr
    inst = Instance(N, tuple(items))
    return inst, place(inst, rects)


def pinwheel() -> tuple[Instance, Packing]:
    """Four items around a 1x1 hole: packable, but not by guillotine cuts."""
    rects = {1: Rect(0, 0, 15, 8), 2: Rect(0, 9, 8, 24), 3: Rect(9, 16, 24, 24), 4: Rect(16, 0, 24, 15)}
    inst = Instance(24, tuple(Item(i, r.w, r.h) for i, r in rects.items()))
    return inst, place(inst, rects)


def gen_random(n: int, N: int, profile: str = "mixed", seed: int = 0, eps_large=Fraction(1, 4),
               eps_small=Fraction(1, 8), max_profit: int = 1, allow_rotation: bool = False) -> Instance:
    """Reproducible random instance.

    skewed: each item is horizontal or vertical for (eps_large, eps_small);
    small: both sides at most eps_small N; mixed: sides uniform in [1, N].
    """
    if n < 0 or N < 1:
        raise ValueError("need n >= 0 and N >= 1")
    rng = random.Random(seed)
    eps_large, eps_small = Fraction(eps_large), Fraction(eps_small)
    long_lo = int(eps_large * N) + 1
    thin_hi = max(1, int(eps_small * N))
    items = []
    for i in range(1, n + 1):
        if profile == "skewed":
            if long_lo > N:
                raise ValueError("no side can exceed eps_large N")
            ln, th = rng.randint(long_lo, N), rng.randint(1, thin_hi)
            w, h = (ln, th) if rng.random() < 0.5 else (th, ln)
        elif profile == "small":
            w, h = rng.randint(1, thin_hi), rng.randint(1, thin_hi)
        elif profile == "mixed":
            w, h = rng.randint(1, N), rng.randint(1, N)
        else:
            raise ValueError(f"unknown profile {profile!r}")
        items.append(Item(i, w, h, rng.randint(1, max_profit)))
    return Instance(N, tuple(items), allow_rotation)


# --- planted compartment fixtures ----------------------------------------------------

def random_pseudo_tree(N: int, rng: random.Random, depth: int = 3, l_prob: float = 0.3,
                       kinds: Sequence[str] = BOX_KINDS) -> PNode:
    def go(r: Rect, d: int) -> PNode:
        roll = rng.random()
        if d == 0 or roll < 0.25 or (r.w < 2 and r.h < 2):
            return BoxCompartment(r, rng.choice(list(kinds)))
        if roll < 0.25 + l_prob and r.w >= 2 and r.h >= 2:
            a, b = rng.randint(1, r.w - 1), rng.randint(1, r.h - 1)
            fx, fy = rng.random() < 0.5, rng.random() < 0.5
            ix0, ix1 = (r.x0, r.x1 - a) if fx else (r.x0 + a, r.x1)
            iy0, iy1 = (r.y0, r.y1 - b) if fy else (r.y0 + b, r.y1)
            inner = Rect(ix0, iy0, ix1, iy1)
            return PLSplit(r, LCompartment(r, inner), go(inner, d - 1))
        options = ([H] if r.h >= 2 else []) + ([V] if r.w >= 2 else [])
        o = rng.choice(options)
        c = rng.randint(r.y0 + 1, r.y1 - 1) if o == H else rng.randint(r.x0 + 1, r.x1 - 1)
        lo, hi = split(r, o, c)
        return PCut(r, o, c, go(lo, d - 1), go(hi, d - 1))

    return go(Rect(0, 0, N, N), depth)


class _Sizer:
    """Side-length ranges per item class, optionally tied to class thresholds."""

    def __init__(self, thresholds: ClassThresholds | None, N: int):
        self.t, self.N = thresholds, N

    def long_min(self) -> int:
        return int(self.t.eps_large * self.N) + 1 if self.t else 2

    def thin_max(self, ln: int) -> int:
        return int(self.t.eps_small * self.N) if self.t else ln - 1

    def small_max(self) -> int:
        return int(self.t.eps_small * self.N) if self.t else self.N


def _stack(rng: random.Random, extent: int, room: int, sz: _Sizer, tries: int = 6) -> list[tuple[int, int, int]]:
    """(offset across, thickness, length) triples with disjoint offsets."""
    out, pos = [], 0
    lmin = sz.long_min()
    if lmin > extent:
        return out
    for _ in range(tries):
        gap = rng.randint(0, 1)
        ln = rng.randint(lmin, extent)
        tmax = min(sz.thin_max(ln), room - pos - gap)
        if tmax < 1:
            break
        th = rng.randint(1, max(1, min(tmax, 3)))
        out.append((pos + gap, th, ln))
        pos += gap + th
    return out


def fill_nicely(tree: PNode, rng: random.Random, eps=Fraction(1, 2), thresholds: ClassThresholds | None = None,
                N: int | None = None, first_id: int = 1) -> tuple[list[Item], list[list[tuple[int, Rect]]]]:
    """Random nice placements for every compartment of a pseudo tree.

    Returns the generated items and, per compartment in tree order, the
    (item id, rect) pairs. With thresholds the item shapes also match the
    classes the compartment kinds call for.
    """
    N = N if N is not None else tree.region.w
    sz = _Sizer(thresholds, N)
    items: list[Item] = []
    fills: list[list[tuple[int, Rect]]] = []
    nid = [first_id]

    def new(r: Rect) -> tuple[int, Rect]:
        items.append(Item(nid[0], r.w, r.h))
        nid[0] += 1
        return nid[0] - 1, r

    eps = Fraction(eps)
    for comp in compartments(tree):
        got: list[tuple[int, Rect]] = []
        if isinstance(comp, BoxCompartment):
            b = comp.rect
            if comp.kind == "one-large":
                lo = int(thresholds.eps_large * N) + 1 if thresholds else 1
                if lo <= b.w and lo <= b.h:
                    w, h = rng.randint(lo, b.w), rng.randint(lo, b.h)
                    x, y = rng.randint(b.x0, b.x1 - w), rng.randint(b.y0, b.y1 - h)
                    got.append(new(Rect(x, y, x + w, y + h)))
            elif comp.kind == "horizontal-stack":
                for off, th, ln in _stack(rng, b.w, b.h, sz):
                    if ln > th:
                        x = rng.randint(b.x0, b.x1 - ln)
                        got.append(new(Rect(x, b.y0 + off, x + ln, b.y0 + off + th)))
            elif comp.kind == "vertical-stack":
                for off, th, ln in _stack(rng, b.h, b.w, sz):
                    if ln > th:
                        y = rng.randint(b.y0, b.y1 - ln)
                        got.append(new(Rect(b.x0 + off, y, b.x0 + off + th, y + ln)))
            else:
                wmax = min(int(eps * b.w), sz.small_max())
                hmax = min(int(eps * b.h), sz.small_max())
                if wmax >= 1 and hmax >= 1:
                    # a few shelves of small items
                    y = b.y0
                    while y < b.y1 and rng.random() < 0.8:
                        sh = rng.randint(1, hmax)
                        if y + sh > b.y1:
                            break
                        x = b.x0
                        while rng.random() < 0.8:
                            w, h = rng.randint(1, wmax), rng.randint(1, sh)
                            if x + w > b.x1:
                                break
                            got.append(new(Rect(x, y, x + w, y + h)))
                            x += w
                        y += sh
        else:
            o = comp.outer
            a, bb = comp.arms
            hs: list[Rect] = []
            for off, th, ln in _stack(rng, o.w, bb, sz):
                if ln > th:
                    x = rng.randint(o.x0, o.x1 - ln)
                    hs.append(Rect(x, o.y0 + off, x + ln, o.y0 + off + th))
            vs = []
            for off, th, ln in _stack(rng, o.h, a, sz):
                if ln > th:
                    y = rng.randint(o.y0, o.y1 - ln)
                    r = Rect(o.x0 + off, y, o.x0 + off + th, y + ln)
                    if not any(r.x0 < q.x1 and q.x0 < r.x1 and r.y0 < q.y1 and q.y0 < r.y1 for q in hs):
                        vs.append(r)
            for r in hs + vs:
                got.append(new(comp.from_canonical(r)))
        fills.append(got)
    return items, fills


@dataclass(frozen=True)
class Planted:
    instance: Instance
    cset: CompartmentSet
    fillings: list[list[Placement]]
    packing: Packing


def gen_planted(N: int, seed: int, depth: int = 2, thresholds: ClassThresholds | None = None,
                eps=Fraction(1, 2), extra: int = 0, l_prob: float = 0.3,
                kinds: Sequence[str] = BOX_KINDS) -> Planted:
    """Items generated by a nice placement into random compartments.

    extra adds that many random decoy items that are not part of the plant.
    """
    rng = random.Random(seed)
    tree = random_pseudo_tree(N, rng, depth, l_prob, kinds)
    items, fills = fill_nicely(tree, rng, eps, thresholds, N)
    nid = len(items) + 1
    for _ in range(extra):
        items.append(Item(nid, rng.randint(1, N), rng.randint(1, N)))
        nid += 1
    inst = Instance(N, tuple(items))
    fillings = [[Placement(i, r.x0, r.y0, False) for i, r in f] for f in fills]
    pls = tuple(sorted((pl for f in fillings for pl in f), key=lambda pl: pl.item_id))
    return Planted(inst, CompartmentSet.from_tree(tree), fillings, Packing(inst, pls))


# --- experiments ---------------------------------------------------------------------

@dataclass(frozen=True)
class RatioRow:
    name: str
    free: int
    guillotine: int
    ratio: Fraction | None
    complete: bool


@dataclass(frozen=True)
class RatioReport:
    rows: tuple[RatioRow, ...]
    max_ratio: Fraction | None


def ratio_experiment(instances: Iterable[tuple[str, Instance]], budget: int | None = 5_000_000) -> RatioReport:
    """Free and guillotine optima per instance. Incomplete runs are excluded from the max."""
    from .oracle import oracle_exact

    rows = []
    for name, inst in instances:
        f = oracle_exact(inst, "free", budget)
        g = oracle_exact(inst, "guillotine", budget)
        ratio = Fraction(f.value, g.value) if g.value else None
        rows.append(RatioRow(name, f.value, g.value, ratio, f.complete and g.complete))
    ratios = [r.ratio for r in rows if r.complete and r.ratio is not None]
    return RatioReport(tuple(rows), max(ratios) if ratios else None)


BENCH_FIELDS = ("instance", "solver", "value", "oracle_value", "wall_time", "verified")


def bench_rows(instances: Iterable[tuple[str, Instance]], solvers: Sequence[str] = ("solve", "stages:2"),
               budget: int | None = 2_000_000, eps=Fraction(1, 3)) -> list[dict]:
    """One row per (instance, solver), against the guillotine oracle.

    verified means the output is a valid, separable packing whose value does
    not exceed a completed oracle.
    """
    from .core import validate_packing
    from .guillotine import is_separable
    from .oracle import oracle_exact
    from .solver import SolverConfig, solve_cardinality

    rows = []
    for name, inst in instances:
        orc = oracle_exact(inst, "guillotine", budget)
        for s in solvers:
            t0 = time.perf_counter()
            if s == "solve":
                p = solve_cardinality(inst, None, SolverConfig(eps=Fraction(eps))).packing
                value = len(p)
            else:
                res = oracle_exact(inst, s, budget)
                p, value = res.packing, res.value
            dt = time.perf_counter() - t0
            ok = not validate_packing(p) and is_separable(p) and (not orc.complete or value <= orc.value)
            rows.append({"instance": name, "solver": s, "value": value,
                         "oracle_value": orc.value if orc.complete else "",
                         "wall_time": f"{dt:.4f}", "verified": ok})
    return rows


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
