"""Exhaustive placement search used as ground truth at desk scale."""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .core import Instance, Packing, Placement, Rect
from .guillotine import GuillotineTree, env_budget, guillotine_tree, stage_bounded_best


@dataclass(frozen=True)
class OracleResult:
    packing: Packing
    value: int
    complete: bool
    nodes: int
    flavor: str  # free | guillotine | stages:k


def oracle_exact(inst: Instance, flavor: str = "free", budget: int | None = 5_000_000) -> OracleResult:
    """Optimum profit by exhaustive search.

    flavor is 'free', 'guillotine' or 'stages:k'.

    Free and guillotine: item subsets are tried in non-increasing profit order
    and the first one that admits a packing is optimal. Feasibility of a fixed
    subset is decided by a cell scan: cells are visited bottom-up, left to
    right, and the first empty cell either receives the bottom-left corner of
    an unplaced item or becomes waste. Every packing is reached this way, so
    the scan is complete. Waste is capped by the subset's slack area. For the
    guillotine flavor each partial packing must already be separable, a valid
    prune since removing items never breaks separability.

    The stages flavor delegates to the stage-bounded cut recursion.
    """
    budget = env_budget(budget)
    if flavor.startswith("stages:"):
        k = int(flavor.split(":", 1)[1])
        res = stage_bounded_best(inst, k, cap=budget)
        return OracleResult(res.packing, res.value, res.complete, res.expansions, flavor)
    if flavor not in ("free", "guillotine"):
        raise ValueError(f"unknown oracle flavor {flavor!r}")
    guill = flavor == "guillotine"
    N = inst.N
    knap = inst.knapsack
    full = (1 << N) - 1
    items = sorted(inst.items, key=lambda it: it.id)
    n = len(items)
    shapes = []
    for it in items:
        opts = [(it.w, it.h, False)]
        if inst.allow_rotation and it.w != it.h:
            opts.append((it.h, it.w, True))
        shapes.append(opts)
    # pairs that can be neither side by side nor stacked in any orientation
    clash = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if all(a + c > N and b + d > N for a, b, _ in shapes[i] for c, d, _ in shapes[j]):
                clash[i] |= 1 << j
                clash[j] |= 1 << i
    stats = {"nodes": 0, "complete": True}

    def feasible(mask: int) -> tuple[tuple[int, Rect], ...] | None:
        idx = [i for i in range(n) if mask >> i & 1]
        # identical items share one branch
        groups: dict[tuple, list[int]] = {}
        for i in idx:
            it = items[i]
            groups.setdefault((it.w, it.h), []).append(it.id)
        gkeys = sorted(groups, key=lambda k: (-k[0] * k[1], k))
        gshapes = []
        for w, h in gkeys:
            gshapes.append([(w, h, False)] + ([(h, w, True)] if inst.allow_rotation and w != h else []))
        left = [len(groups[k]) for k in gkeys]
        min_h = [min(b for _, b, _ in sh) for sh in gshapes]
        rows = [0] * N
        placed: list[tuple[int, Rect]] = []

        def dfs(y: int, waste: int, todo: int) -> bool:
            if todo == 0:
                return True
            if budget is not None and stats["nodes"] >= budget:
                stats["complete"] = False
                return False
            stats["nodes"] += 1
            while y < N and rows[y] == full:
                y += 1
            if y == N:
                return False
            for g in range(len(gkeys)):
                if left[g] and min_h[g] > N - y:
                    return False
            free_bits = ~rows[y] & full
            x = (free_bits & -free_bits).bit_length() - 1
            for g in range(len(gkeys)):
                if not left[g]:
                    continue
                for w, h, rot in gshapes[g]:
                    if x + w > N or y + h > N:
                        continue
                    m = ((1 << w) - 1) << x
                    if any(rows[r] & m for r in range(y, y + h)):
                        continue
                    ids = groups[gkeys[g]]
                    r = Rect(x, y, x + w, y + h)
                    placed.append((ids[len(ids) - left[g]], r))
                    if not guill or isinstance(guillotine_tree(knap, dict(placed)), GuillotineTree):
                        for rr in range(y, y + h):
                            rows[rr] |= m
                        left[g] -= 1
                        ok = dfs(y, waste, todo - 1)
                        left[g] += 1
                        for rr in range(y, y + h):
                            rows[rr] &= ~m
                        if ok:
                            return True
                    placed.pop()
            if waste == 0:
                return False
            rows[y] |= 1 << x
            ok = dfs(y, waste - 1, todo)
            rows[y] &= ~(1 << x)
            return ok

        slack = N * N - sum(items[i].area for i in idx)
        if dfs(0, slack, len(idx)):
            return tuple(placed)
        return None

    subsets = []
    for mask in range(1 << n):
        area = 0
        ok = True
        for i in range(n):
            if mask >> i & 1:
                area += items[i].area
                if clash[i] & mask:
                    ok = False
                    break
        if ok and area <= N * N:
            subsets.append((-sum(items[i].p for i in range(n) if mask >> i & 1), bin(mask).count("1"), mask))
    subsets.sort()
    best_value, best_pls = 0, ()
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, N * N + n + 500))
    try:
        for neg, _, mask in subsets:
            if -neg <= best_value:
                break
            got = feasible(mask)
            if got is not None:
                best_value, best_pls = -neg, got
                break
            if not stats["complete"]:
                break
    finally:
        sys.setrecursionlimit(limit)
    pls = []
    for iid, r in best_pls:
        it = inst.item(iid)
        pls.append(Placement(iid, r.x0, r.y0, (r.w, r.h) != (it.w, it.h)))
    pls.sort(key=lambda pl: pl.item_id)
    return OracleResult(Packing(inst, tuple(pls)), best_value, stats["complete"], stats["nodes"], flavor)
