"""Box and L compartments, nice-placement validation, pseudo-guillotine trees
and their composition into one global guillotine tree."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence, Union

from .classify import ClassThresholds, ItemClass, classify
from .core import Instance, Item, Packing, Placement, Rect, overlaps, validate_packing
from .guillotine import (Cut, GuillotineTree, H, NotSeparable, V, guillotine_tree, mirror_rect,
                         split, tree_cuts)
from .lpack import LRegion

BOX_KINDS = ("one-large", "horizontal-stack", "vertical-stack", "small-area")


@dataclass(frozen=True)
class BoxCompartment:
    rect: Rect
    kind: str | None = None  # None lets the solver pick

    def __post_init__(self) -> None:
        if self.kind is not None and self.kind not in BOX_KINDS:
            raise ValueError(f"unknown box kind {self.kind!r}")

    @property
    def region(self) -> Rect:
        return self.rect


@dataclass(frozen=True)
class LCompartment:
    """outer minus inner, where inner shares one corner with outer.

    The canonical orientation has inner at the top-right, so the L bends
    toward +x,+y: a vertical arm of width a on the left and a horizontal arm
    of height b at the bottom. Other corners are handled by mirroring.
    """

    outer: Rect
    inner: Rect

    def __post_init__(self) -> None:
        if not self.outer.contains(self.inner) or self.inner == self.outer:
            raise ValueError("inner must be a proper sub-rectangle of outer")
        if self._corner() is None:
            raise ValueError("inner must share a corner with outer")

    def _corner(self) -> tuple[bool, bool] | None:
        o, i = self.outer, self.inner
        for fx, fy in ((False, False), (True, False), (False, True), (True, True)):
            right = i.x0 == o.x0 if fx else i.x1 == o.x1
            top = i.y0 == o.y0 if fy else i.y1 == o.y1
            if right and top:
                return fx, fy
        return None

    @property
    def flips(self) -> tuple[bool, bool]:
        """Mirror flags (flip x, flip y) taking this L to canonical form."""
        return self._corner()

    @property
    def region(self) -> Rect:
        return self.outer

    def to_canonical(self, r: Rect) -> Rect:
        fx, fy = self.flips
        if fx:
            r = mirror_rect(r, "y", self.outer)
        if fy:
            r = mirror_rect(r, "x", self.outer)
        return r

    from_canonical = to_canonical  # flips are involutions

    @property
    def arms(self) -> tuple[int, int]:
        """(a, b): vertical arm width and horizontal arm height."""
        ci = self.to_canonical(self.inner)
        return ci.x0 - self.outer.x0, ci.y0 - self.outer.y0

    def contains(self, r: Rect) -> bool:
        return self.outer.contains(r) and not overlaps(r, self.inner)

    @property
    def area(self) -> int:
        return self.outer.area - self.inner.area

    def is_thin(self, eps_large: Fraction, N: int) -> bool:
        a, b = self.arms
        lim = Fraction(eps_large) * N / 2
        return a < lim and b < lim

    def vertices(self) -> list[tuple[int, int]]:
        o = self.outer
        a, b = self.arms
        canon = [(o.x0, o.y0), (o.x1, o.y0), (o.x1, o.y0 + b), (o.x0 + a, o.y0 + b),
                 (o.x0 + a, o.y1), (o.x0, o.y1)]
        fx, fy = self.flips
        out = []
        for x, y in canon:
            if fx:
                x = o.x0 + o.x1 - x
            if fy:
                y = o.y0 + o.y1 - y
            out.append((x, y))
        if fx != fy:
            out.reverse()  # keep counter-clockwise order
        return out

    @staticmethod
    def from_vertices(vs: Sequence[tuple[int, int]]) -> LCompartment:
        if len(vs) != 6:
            raise ValueError("an L-compartment has six vertices")
        xs = [x for x, _ in vs]
        ys = [y for _, y in vs]
        outer = Rect(min(xs), min(ys), max(xs), max(ys))
        corners = {(outer.x0, outer.y0), (outer.x1, outer.y0), (outer.x0, outer.y1), (outer.x1, outer.y1)}
        missing = corners - set(vs)
        inside = [v for v in vs if outer.x0 < v[0] < outer.x1 and outer.y0 < v[1] < outer.y1]
        if len(missing) != 1 or len(inside) != 1:
            raise ValueError("vertices do not describe an L")
        (cx, cy), (rx, ry) = missing.pop(), inside[0]
        return LCompartment(outer, Rect(min(cx, rx), min(cy, ry), max(cx, rx), max(cy, ry)))

    def lregion(self) -> LRegion:
        """The equivalent knapsack L when outer is a square anchored at the origin."""
        a, b = self.arms
        return LRegion(self.outer.w, b, a)


# --- pseudo-guillotine trees ------------------------------------------------

@dataclass(frozen=True)
class PCut:
    region: Rect
    orientation: str
    position: int
    low: "PNode"
    high: "PNode"


@dataclass(frozen=True)
class PLSplit:
    """region is split into the L-compartment l and the rectangle rest."""

    region: Rect
    l: LCompartment
    rest: "PNode"


PNode = Union[BoxCompartment, PCut, PLSplit]
Compartment = Union[BoxCompartment, LCompartment]


def compartments(tree: PNode) -> list[Compartment]:
    """Leaves in pre-order; an L comes before the rest of its split."""
    out: list[Compartment] = []

    def walk(node: PNode) -> None:
        if isinstance(node, BoxCompartment):
            out.append(node)
        elif isinstance(node, PCut):
            walk(node.low)
            walk(node.high)
        else:
            out.append(node.l)
            walk(node.rest)

    walk(tree)
    return out


def validate_pseudo_tree(tree: PNode, N: int) -> list[str]:
    problems: list[str] = []
    if tree.region != Rect(0, 0, N, N):
        problems.append("root region is not the knapsack")

    def walk(node: PNode) -> None:
        if isinstance(node, BoxCompartment):
            return
        if isinstance(node, PCut):
            r = node.region
            lo_end, hi_end = (r.y0, r.y1) if node.orientation == H else (r.x0, r.x1)
            if not lo_end < node.position < hi_end:
                problems.append(f"cut {node.orientation}={node.position} outside {r.as_tuple()}")
                return
            lo, hi = split(r, node.orientation, node.position)
            if node.low.region != lo or node.high.region != hi:
                problems.append(f"children of {r.as_tuple()} do not partition it")
            walk(node.low)
            walk(node.high)
        else:
            if node.l.outer != node.region or node.rest.region != node.l.inner:
                problems.append(f"L split of {node.region.as_tuple()} is inconsistent")
            walk(node.rest)

    walk(tree)
    return problems


@dataclass(frozen=True)
class CompartmentSet:
    tree: PNode
    compartments: tuple[Compartment, ...]

    @staticmethod
    def from_tree(tree: PNode) -> CompartmentSet:
        return CompartmentSet(tree, tuple(compartments(tree)))


def pseudo_to_dict(node: PNode) -> dict:
    if isinstance(node, BoxCompartment):
        return {"type": "box", "rect": list(node.rect.as_tuple()), "kind": node.kind}
    if isinstance(node, PCut):
        return {"type": "cut", "region": list(node.region.as_tuple()), "orientation": node.orientation,
                "position": node.position, "children": [pseudo_to_dict(node.low), pseudo_to_dict(node.high)]}
    return {"type": "lsplit", "region": list(node.region.as_tuple()),
            "l": {"vertices": [list(v) for v in node.l.vertices()]}, "rest": pseudo_to_dict(node.rest)}


def pseudo_from_dict(d: dict) -> PNode:
    kind = d.get("type")
    if kind == "box":
        return BoxCompartment(Rect(*d["rect"]), d.get("kind"))
    if kind == "cut":
        lo, hi = d["children"]
        return PCut(Rect(*d["region"]), d["orientation"], int(d["position"]),
                    pseudo_from_dict(lo), pseudo_from_dict(hi))
    if kind == "lsplit":
        l = LCompartment.from_vertices([tuple(v) for v in d["l"]["vertices"]])
        return PLSplit(Rect(*d["region"]), l, pseudo_from_dict(d["rest"]))
    raise ValueError(f"unknown pseudo-tree node type {kind!r}")


# --- nice placements ----------------------------------------------------------

def orientation_of(r: Rect, thresholds: ClassThresholds | None = None, N: int | None = None) -> str | None:
    """'h', 'v' or None for a non-skewed shape.

    With thresholds the item classes decide; without them the aspect ratio does.
    """
    if thresholds is not None:
        c = classify(Item(0, r.w, r.h), thresholds, N)
        return {ItemClass.HORIZONTAL: "h", ItemClass.VERTICAL: "v"}.get(c)
    if r.w > r.h:
        return "h"
    if r.h > r.w:
        return "v"
    return None


def _disjoint(spans: list[tuple[int, int]]) -> bool:
    spans = sorted(spans)
    return all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))


def validate_nice_box(b: BoxCompartment, rects: Mapping[int, Rect], eps=None,
                      thresholds: ClassThresholds | None = None, N: int | None = None) -> list[str]:
    """Empty list iff the items sit nicely in the box.

    Disciplines: a single item; horizontal items stacked; vertical items side
    by side; or small items (w <= eps w(B), h <= eps h(B)) that are guillotine
    separable inside the box. A box with a fixed kind must follow that kind.
    """
    box = b.rect
    out = [f"item {i} outside box {box.as_tuple()}" for i, r in rects.items() if not box.contains(r)]
    if out:
        return out
    rs = list(rects.values())
    orients = [orientation_of(r, thresholds, N) for r in rs]

    def small_ok() -> bool:
        if eps is not None:
            e = Fraction(eps)
            if any(r.w > e * box.w or r.h > e * box.h for r in rs):
                return False
        return isinstance(guillotine_tree(box, dict(rects)), GuillotineTree)

    checks: dict[str, Callable[[], bool]] = {
        "one-large": lambda: len(rs) <= 1,
        "horizontal-stack": lambda: all(o == "h" for o in orients) and _disjoint([(r.y0, r.y1) for r in rs]),
        "vertical-stack": lambda: all(o == "v" for o in orients) and _disjoint([(r.x0, r.x1) for r in rs]),
        "small-area": small_ok,
    }
    kinds = [b.kind] if b.kind is not None else list(BOX_KINDS)
    if any(checks[k]() for k in kinds):
        return []
    return [f"box {box.as_tuple()} ({b.kind or 'any kind'}) is not nicely filled"]


def validate_nice_l(L: LCompartment, rects: Mapping[int, Rect],
                    thresholds: ClassThresholds | None = None, N: int | None = None) -> list[str]:
    """Empty list iff the placement inside L is nice.

    Every item is skewed; horizontal items lie in the horizontal arm with
    pairwise disjoint y-spans; vertical items lie in the vertical arm with
    pairwise disjoint x-spans.
    """
    out: list[str] = []
    a, b = L.arms
    o = L.outer
    hs, vs = [], []
    for iid, r in rects.items():
        if not L.contains(r):
            out.append(f"item {iid} outside the L")
            continue
        kind = orientation_of(r, thresholds, N)
        c = L.to_canonical(r)
        if kind == "h":
            if c.y1 > o.y0 + b:
                out.append(f"horizontal item {iid} leaves the horizontal arm")
            hs.append(c)
        elif kind == "v":
            if c.x1 > o.x0 + a:
                out.append(f"vertical item {iid} leaves the vertical arm")
            vs.append(c)
        else:
            out.append(f"item {iid} is not skewed")
    if not _disjoint([(r.y0, r.y1) for r in hs]):
        out.append("horizontal items are not stacked")
    if not _disjoint([(r.x0, r.x1) for r in vs]):
        out.append("vertical items are not side by side")
    return out


# --- cutting an L ---------------------------------------------------------------

def _peel_steps(L: LCompartment, rects: Mapping[int, Rect], close: bool,
                orient: Callable[[Rect], str | None]) -> list[tuple[str, int, str]]:
    """Peeling cuts for the items of L, as (orientation, position, peeled side).

    Computed in canonical form, then mapped back. The leftmost vertical item
    is cut off on its right edge when that line is clean; otherwise the
    topmost horizontal item crossing that line is cut off on its top edge.
    """
    o = L.outer
    a, b = L.arms
    canon = {i: L.to_canonical(r) for i, r in rects.items()}
    kinds = {i: orient(rects[i]) for i in rects}
    remaining = dict(canon)
    cx, cy = o.x0, o.y0
    steps: list[tuple[str, int]] = []
    stop = 0 if close else 1

    def clean(orientation: str, c: int) -> bool:
        if orientation == V:
            return all(not (r.x0 < c < r.x1) for r in remaining.values())
        return all(not (r.y0 < c < r.y1) for r in remaining.values())

    while len(remaining) > stop:
        vert = [(r.x0, r.y0, i) for i, r in remaining.items() if kinds[i] == "v"]
        hor = [i for i in remaining if kinds[i] == "h"]
        step = None
        if vert:
            iv = min(vert)[2]
            c = remaining[iv].x1
            if c <= o.x0 + a and clean(V, c):
                step = (V, c)
            else:
                crossing = [remaining[i] for i in hor if remaining[i].x0 < c < remaining[i].x1]
                if crossing:
                    top = max(r.y1 for r in crossing)
                    if top <= o.y0 + b and clean(H, top):
                        step = (H, top)
        elif hor:
            low = min(hor, key=lambda i: (remaining[i].y0, i))
            c = remaining[low].y1
            if c <= o.y0 + b and clean(H, c):
                step = (H, c)
        if step is None:
            cands = [(r.y1, 0, H) for r in remaining.values() if r.y1 <= o.y0 + b and clean(H, r.y1)]
            cands += [(r.x1, 1, V) for r in remaining.values() if r.x1 <= o.x0 + a and clean(V, r.x1)]
            if not cands:
                raise ValueError("L placement admits no peeling cut")
            c, _, orientation = min(cands)
            step = (orientation, c)
        orientation, c = step
        if orientation == V:
            remaining = {i: r for i, r in remaining.items() if r.x1 > c}
            cx = c
        else:
            remaining = {i: r for i, r in remaining.items() if r.y1 > c}
            cy = c
        steps.append(step)
    if close:
        if cx < o.x0 + a:
            steps.append((V, o.x0 + a))
        if cy < o.y0 + b:
            steps.append((H, o.y0 + b))
    fx, fy = L.flips
    out = []
    for orientation, c in steps:
        side = "low"
        if orientation == V and fx:
            c, side = o.x0 + o.x1 - c, "high"
        elif orientation == H and fy:
            c, side = o.y0 + o.y1 - c, "high"
        out.append((orientation, c, side))
    return out


def _separate(region: Rect, rects: Mapping[int, Rect]) -> GuillotineTree:
    t = guillotine_tree(region, {i: r for i, r in rects.items() if region.contains(r)})
    if isinstance(t, NotSeparable):
        raise ValueError(f"items {t.item_ids} inside {region.as_tuple()} are not separable")
    return t


def nice_l_tree(L: LCompartment, rects: Mapping[int, Rect], rest: Callable[[Rect], GuillotineTree] | None = None,
                thresholds: ClassThresholds | None = None, N: int | None = None) -> GuillotineTree:
    """Cut tree of L's outer rectangle that peels every item of L.

    With rest given, the arms are cut away completely and rest builds the
    subtree of the inner rectangle. Otherwise peeling stops once at most one
    item is left.
    """
    orient = lambda r: orientation_of(r, thresholds, N)
    steps = _peel_steps(L, rects, close=rest is not None, orient=orient)

    def build(i: int, piece: Rect) -> GuillotineTree:
        if i == len(steps):
            if rest is not None:
                return rest(piece)
            return _separate(piece, rects)
        orientation, c, side = steps[i]
        lo, hi = split(piece, orientation, c)
        if side == "low":
            return GuillotineTree.cut(piece, orientation, c, _separate(lo, rects), build(i + 1, hi))
        return GuillotineTree.cut(piece, orientation, c, build(i + 1, lo), _separate(hi, rects))

    return build(0, L.outer)


def nice_l_cut_sequence(L: LCompartment, rects: Mapping[int, Rect],
                        thresholds: ClassThresholds | None = None, N: int | None = None) -> list[Cut]:
    """Cuts isolating every item of a nice L placement, in replay order."""
    return tree_cuts(nice_l_tree(L, rects, thresholds=thresholds, N=N))


# --- composition ------------------------------------------------------------------

@dataclass(frozen=True)
class Composed:
    packing: Packing
    tree: GuillotineTree


def compose_pseudo(inst: Instance, tree: PNode, fillings: Mapping[int, Sequence[Placement]] | Sequence[Sequence[Placement]],
                   eps=None, thresholds: ClassThresholds | None = None) -> Composed:
    """Union of per-compartment nice placements plus a global cut tree.

    fillings is indexed like compartments(tree). Tree cuts become global cuts
    in pre-order; each L is expanded into its peeling cuts and each box into
    the cuts separating its items.
    """
    comps = compartments(tree)
    if not isinstance(fillings, Mapping):
        fillings = dict(enumerate(fillings))
    stray = [k for k in fillings if not 0 <= k < len(comps)]
    if stray:
        raise ValueError(f"fillings for unknown compartments {stray}")
    pls: list[Placement] = []
    per_comp: dict[int, dict[int, Rect]] = {}
    probe = Packing(inst, ())
    for k, comp in enumerate(comps):
        rects = {pl.item_id: probe.rect_of(pl) for pl in fillings.get(k, ())}
        if isinstance(comp, BoxCompartment):
            bad = validate_nice_box(comp, rects, eps, thresholds, inst.N)
        else:
            bad = validate_nice_l(comp, rects, thresholds, inst.N)
        if bad:
            raise ValueError(f"compartment {k}: {'; '.join(bad)}")
        per_comp[id(comp)] = rects
        pls.extend(fillings.get(k, ()))
    packing = Packing(inst, tuple(sorted(pls, key=lambda pl: pl.item_id)))
    problems = validate_packing(packing)
    if problems:
        raise ValueError(f"composed packing is invalid: {problems[0]}")

    def build(node: PNode) -> GuillotineTree:
        if isinstance(node, BoxCompartment):
            return _separate(node.rect, per_comp[id(node)])
        if isinstance(node, PCut):
            return GuillotineTree.cut(node.region, node.orientation, node.position,
                                      build(node.low), build(node.high))
        inner = node.rest

        def rest(piece: Rect) -> GuillotineTree:
            assert piece == inner.region
            return build(inner)

        return nice_l_tree(node.l, per_comp[id(node.l)], rest=rest, thresholds=thresholds, N=inst.N)

    return Composed(packing, build(tree))


# --- boundary slabs into an L -------------------------------------------------------

@dataclass(frozen=True)
class BoundaryL:
    packing: Packing
    region: LRegion
    core: Rect  # where the interior block B_k ends up
    slab_ids: tuple[int, ...]
    core_ids: tuple[int, ...]
    slabs: int


def extract_boundary_l(p: Packing, t: GuillotineTree, eps_large) -> BoundaryL:
    """Move boundary-hugging slabs into an L at the bottom-left corner.

    The tree is followed from the root while the cut lies closer than
    eps_large*N/4 to the nearer knapsack edge; the slab between cut and edge
    is peeled. Vertical slabs are then laid left to right and horizontal
    slabs bottom-up, each translated with its items, and the remaining
    rectangle goes to the top-right.
    """
    N = p.instance.N
    lim = Fraction(eps_large) * N / 4
    rects = p.rects()
    node = t
    slabs: list[tuple[str, Rect]] = []
    while not node.is_leaf:
        c = node.position
        if min(c, N - c) >= lim:
            break
        orientation = node.orientation
        peeled, node = (node.low, node.high) if c < N - c else (node.high, node.low)
        slabs.append((orientation, peeled.region))
    core = node.region
    moved: dict[int, Rect] = {}
    x, y = 0, 0
    slab_ids: list[int] = []
    for orientation, reg in slabs:
        # the slab goes to the low corner of the current core
        dx, dy = x - reg.x0, y - reg.y0
        if orientation == V:
            x += reg.w
        else:
            y += reg.h
        for iid, r in rects.items():
            if reg.contains(r):
                moved[iid] = r.translate(dx, dy)
                slab_ids.append(iid)
    core_ids = []
    for iid, r in rects.items():
        if core.contains(r):
            moved[iid] = r.translate(x - core.x0, y - core.y0)
            core_ids.append(iid)
    pls = tuple(Placement(pl.item_id, moved[pl.item_id].x0, moved[pl.item_id].y0, pl.rotated)
                for pl in p.placements)
    return BoundaryL(Packing(p.instance, pls), LRegion(N, y, x), Rect(x, y, N, N),
                     tuple(sorted(slab_ids)), tuple(sorted(core_ids)), len(slabs))

