"""Instance and packing data model, geometric predicates and JSON interchange.

All coordinates are integers. Items are open rectangles, so shared edges
never count as overlap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


@dataclass(frozen=True, order=True)
class Rect:
    """Axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self) -> None:
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate rect {self.as_tuple()}")

    @property
    def w(self) -> int:
        return self.x1 - self.x0

    @property
    def h(self) -> int:
        return self.y1 - self.y0

    @property
    def area(self) -> int:
        return self.w * self.h

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x0, self.y0, self.x1, self.y1)

    def contains(self, other: Rect) -> bool:
        return (self.x0 <= other.x0 and other.x1 <= self.x1
                and self.y0 <= other.y0 and other.y1 <= self.y1)

    def translate(self, dx: int, dy: int) -> Rect:
        return Rect(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)


def overlaps(a: Rect, b: Rect) -> bool:
    """True iff the open interiors of a and b intersect."""
    return a.x0 < b.x1 and b.x0 < a.x1 and a.y0 < b.y1 and b.y0 < a.y1


@dataclass(frozen=True)
class Item:
    id: int
    w: int
    h: int
    p: int = 1

    def dims(self, rotated: bool = False) -> tuple[int, int]:
        return (self.h, self.w) if rotated else (self.w, self.h)

    @property
    def area(self) -> int:
        return self.w * self.h


@dataclass(frozen=True)
class Instance:
    N: int
    items: tuple[Item, ...] = ()
    allow_rotation: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        if self.N < 1:
            raise ValueError("knapsack side must be >= 1")
        seen = set()
        for it in self.items:
            if it.id in seen:
                raise ValueError(f"duplicate item id {it.id}")
            seen.add(it.id)
            if not (1 <= it.w <= self.N and 1 <= it.h <= self.N):
                raise ValueError(f"item {it.id} does not fit a {self.N}x{self.N} knapsack")
            if it.p < 0:
                raise ValueError(f"item {it.id} has negative profit")

    def item(self, item_id: int) -> Item:
        return self.by_id[item_id]

    @property
    def by_id(self) -> dict[int, Item]:
        # cached lazily; the dataclass is frozen so bypass __setattr__
        cache = self.__dict__.get("_by_id")
        if cache is None:
            cache = {it.id: it for it in self.items}
            object.__setattr__(self, "_by_id", cache)
        return cache

    @property
    def knapsack(self) -> Rect:
        return Rect(0, 0, self.N, self.N)

    def subset(self, ids: Iterable[int]) -> Instance:
        keep = set(ids)
        return Instance(self.N, tuple(it for it in self.items if it.id in keep), self.allow_rotation)


@dataclass(frozen=True)
class Placement:
    item_id: int
    x: int
    y: int
    rotated: bool = False


@dataclass(frozen=True)
class Violation:
    kind: str  # unknown-item | duplicate | bounds | rotation | overlap
    ids: tuple[int, ...]
    detail: str = ""


@dataclass(frozen=True)
class Packing:
    instance: Instance
    placements: tuple[Placement, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "placements", tuple(self.placements))

    def rect_of(self, pl: Placement) -> Rect:
        w, h = self.instance.item(pl.item_id).dims(pl.rotated)
        return Rect(pl.x, pl.y, pl.x + w, pl.y + h)

    def rects(self) -> dict[int, Rect]:
        return {pl.item_id: self.rect_of(pl) for pl in self.placements}

    @property
    def ids(self) -> list[int]:
        return [pl.item_id for pl in self.placements]

    def __len__(self) -> int:
        return len(self.placements)


def place(instance: Instance, rects: dict[int, Rect]) -> Packing:
    """Packing from final item rectangles; rotation inferred from the shape."""
    out = []
    for iid in sorted(rects):
        r = rects[iid]
        it = instance.item(iid)
        if (r.w, r.h) == (it.w, it.h):
            rot = False
        elif (r.w, r.h) == (it.h, it.w):
            rot = True
        else:
            raise ValueError(f"rect {r.as_tuple()} does not match item {iid} ({it.w}x{it.h})")
        out.append(Placement(iid, r.x0, r.y0, rot))
    return Packing(instance, tuple(out))


def validate_packing(p: Packing) -> list[Violation]:
    """All invariant breaches of p; an empty list means the packing is valid."""
    inst = p.instance
    out: list[Violation] = []
    rects: list[tuple[int, Rect]] = []
    seen: set[int] = set()
    for pl in p.placements:
        if pl.item_id not in inst.by_id:
            out.append(Violation("unknown-item", (pl.item_id,)))
            continue
        if pl.item_id in seen:
            out.append(Violation("duplicate", (pl.item_id,)))
            continue
        seen.add(pl.item_id)
        if pl.rotated and not inst.allow_rotation:
            out.append(Violation("rotation", (pl.item_id,), "rotation not allowed"))
        r = p.rect_of(pl)
        if r.x0 < 0 or r.y0 < 0 or r.x1 > inst.N or r.y1 > inst.N:
            out.append(Violation("bounds", (pl.item_id,), f"{r.as_tuple()} outside [0,{inst.N}]^2"))
        rects.append((pl.item_id, r))
    rects.sort(key=lambda t: (t[1].x0, t[0]))
    # sweep on x keeps the pair scan near-linear for shelf-like packings
    for a in range(len(rects)):
        ia, ra = rects[a]
        for b in range(a + 1, len(rects)):
            ib, rb = rects[b]
            if rb.x0 >= ra.x1:
                break
            if overlaps(ra, rb):
                out.append(Violation("overlap", tuple(sorted((ia, ib)))))
    return out


def profit(p: Packing) -> int:
    return sum(p.instance.item(pl.item_id).p for pl in p.placements)


# --- JSON interchange -------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    return {
        "N": inst.N,
        "allow_rotation": inst.allow_rotation,
        "items": [{"id": it.id, "w": it.w, "h": it.h, "p": it.p} for it in inst.items],
    }


def instance_from_dict(d: dict) -> Instance:
    try:
        items = tuple(Item(int(o["id"]), int(o["w"]), int(o["h"]), int(o.get("p", 1))) for o in d["items"])
        return Instance(int(d["N"]), items, bool(d.get("allow_rotation", False)))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed instance: {exc}") from exc


def packing_to_dict(p: Packing, instance_ref: str | None = None) -> dict:
    return {
        "instance": instance_ref if instance_ref is not None else instance_to_dict(p.instance),
        "placements": [{"id": pl.item_id, "x": pl.x, "y": pl.y, "rot": pl.rotated} for pl in p.placements],
    }


def packing_from_dict(d: dict, base: Path | None = None) -> Packing:
    ref = d.get("instance")
    if isinstance(ref, str):
        path = Path(ref)
        if base is not None and not path.is_absolute():
            path = base / path
        inst = load_instance(path)
    elif isinstance(ref, dict):
        inst = instance_from_dict(ref)
    else:
        raise ValueError("packing needs an inline instance or a path to one")
    try:
        pls = tuple(Placement(int(o["id"]), int(o["x"]), int(o["y"]), bool(o.get("rot", False)))
                    for o in d["placements"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed packing: {exc}") from exc
    return Packing(inst, pls)


def load_instance(path: str | Path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def load_packing(path: str | Path) -> Packing:
    path = Path(path)
    with open(path) as fh:
        return packing_from_dict(json.load(fh), base=path.parent)


def dump_json(obj: dict, path: str | Path | None = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def placements_sorted(pls: Sequence[Placement]) -> tuple[Placement, ...]:
    return tuple(sorted(pls, key=lambda pl: pl.item_id))
