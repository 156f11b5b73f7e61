"""Seeded fixture builders shared by unit and acceptance tests."""

import random

from guillopack.compartments import BoxCompartment
from guillopack.core import Instance, Item, Rect


def random_long_instance(seed: int, max_n: int = 8, max_N: int = 32) -> Instance:
    """Only long items: one side above N/2, the other at most N/4."""
    rng = random.Random(seed)
    N = rng.randint(4, max_N)
    n = rng.randint(1, max_n)
    items = []
    for i in range(n):
        long_side = rng.randint(N // 2 + 1, N)
        short_side = rng.randint(1, max(1, N // 4))
        w, h = (long_side, short_side) if rng.random() < 0.5 else (short_side, long_side)
        items.append(Item(i + 1, w, h, rng.randint(1, 4)))
    return Instance(N, tuple(items))


TWO_BOXES = (BoxCompartment(Rect(0, 0, 16, 4), "horizontal-stack"),
             BoxCompartment(Rect(0, 4, 16, 8), "horizontal-stack"))


def planted_four(seed: int):
    """4 thin items fit TWO_BOXES exactly; six thicker decoys compete for the room."""
    rng = random.Random(seed)
    heights = [2, 2, 2, 2] + [rng.choice([3, 4]) for _ in range(6)]
    rng.shuffle(heights)
    items = [Item(i + 1, rng.randint(9, 16), h) for i, h in enumerate(heights)]
    return items, {it.id: "h" for it in items}
