"""Item classes by size thresholds, and the search for a threshold pair whose
intermediate band carries little profit."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .core import Instance, Item


class ItemClass(enum.Enum):
    LARGE = "large"
    SMALL = "small"
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    INTERMEDIATE = "intermediate"

    @property
    def skewed(self) -> bool:
        return self in (ItemClass.HORIZONTAL, ItemClass.VERTICAL)


@dataclass(frozen=True)
class ClassThresholds:
    eps: Fraction
    eps_large: Fraction
    eps_small: Fraction

    def __post_init__(self) -> None:
        for name in ("eps", "eps_large", "eps_small"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not (0 < self.eps < 1):
            raise ValueError("eps must lie in (0, 1)")
        if not (self.eps >= self.eps_large > self.eps_small > 0):
            raise ValueError("need eps >= eps_large > eps_small > 0")


def _gt(side: int, frac: Fraction, N: int) -> bool:
    # side > frac * N, by cross-multiplication
    return side * frac.denominator > frac.numerator * N


def classify(item: Item, t: ClassThresholds, N: int) -> ItemClass:
    big_w, big_h = _gt(item.w, t.eps_large, N), _gt(item.h, t.eps_large, N)
    small_w, small_h = not _gt(item.w, t.eps_small, N), not _gt(item.h, t.eps_small, N)
    if big_w and big_h:
        return ItemClass.LARGE
    if small_w and small_h:
        return ItemClass.SMALL
    if big_w and small_h:
        return ItemClass.HORIZONTAL
    if big_h and small_w:
        return ItemClass.VERTICAL
    return ItemClass.INTERMEDIATE


def is_wide(item: Item, N: int) -> bool:
    return 2 * item.w > N


def is_tall(item: Item, N: int) -> bool:
    return 2 * item.h > N


def is_long(item: Item, N: int) -> bool:
    return is_wide(item, N) or is_tall(item, N)


def partition(items: Iterable[Item], t: ClassThresholds, N: int) -> dict[ItemClass, list[Item]]:
    out: dict[ItemClass, list[Item]] = {c: [] for c in ItemClass}
    for it in items:
        out[classify(it, t, N)].append(it)
    return out


def default_shrink(x: Fraction) -> Fraction:
    return x * x / 8


def intermediate_profit(inst: Instance, t: ClassThresholds) -> int:
    return sum(it.p for it in inst.items if classify(it, t, inst.N) is ItemClass.INTERMEDIATE)


def candidate_pairs(eps: Fraction, N: int, f: Callable[[Fraction], Fraction] = default_shrink,
                    count: int | None = None) -> list[tuple[Fraction, Fraction]]:
    """The chain (x, f(x)) starting at x = eps, ceil(2/eps) pairs by default.

    An item is intermediate for a pair iff one of its sides falls in the band
    (f(x)N, xN]. Bands are disjoint and an item has two sides, so with
    ceil(2/eps) pairs some pair carries at most eps of the profit.
    The chain stops early once the next x drops below 1/N; the first pair is
    always kept.
    """
    eps = Fraction(eps)
    if count is None:
        count = -(-2 * eps.denominator // eps.numerator)
    out: list[tuple[Fraction, Fraction]] = []
    x = eps
    for _ in range(count):
        fx = Fraction(f(x))
        if not (0 < fx < x):
            raise ValueError("shrinking map must satisfy 0 < f(x) < x")
        out.append((x, fx))
        if fx * N < 1:
            break
        x = fx
    return out


def choose_thresholds(inst: Instance, eps, f: Callable[[Fraction], Fraction] = default_shrink) -> ClassThresholds:
    """Pair from the chain with the least intermediate profit; ties go to the earliest pair.

    Each item is intermediate for at most two pairs, so the winner carries at
    most 2 p(I) / (number of pairs) of intermediate profit.
    """
    eps = Fraction(eps)
    best = None
    for x, fx in candidate_pairs(eps, inst.N, f):
        t = ClassThresholds(eps, x, fx)
        val = intermediate_profit(inst, t)
        if best is None or val < best[0]:
            best = (val, t)
    return best[1]
