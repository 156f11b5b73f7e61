import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from guillopack.compartments import BoxCompartment, LCompartment, validate_nice_box, validate_nice_l
from guillopack.core import Item, Rect
from guillopack.guillotine import stage_count, verify_tree
from guillopack.packers import (BudgetExceeded, GapInstance, RoundedCell, assign_small, build_height_groups,
                                gap_solve, linear_group, match_large, nfdh_pack, place_rounded_in_compartment,
                                stack_knapsack)
import oracles


def _no_overlap(rects):
    rs = [r.as_tuple() for r in rects]
    return not any(oracles.overlap(a, b) for i, a in enumerate(rs) for b in rs[i + 1:])


# ---- NFDH ----

@st.composite
def small_sets(draw):
    N = draw(st.integers(10, 60))
    eps = draw(st.sampled_from([F(1, 20), F(1, 10), F(1, 5)]))
    side = max(1, int(eps * N))
    n = draw(st.integers(0, 120))
    items = [Item(i + 1, draw(st.integers(1, side)), draw(st.integers(1, side))) for i in range(n)]
    return N, eps, items


@settings(max_examples=80)
@given(small_sets())
def test_nfdh_area_bound(arg):
    N, eps, items = arg
    res = nfdh_pack(items, Rect(0, 0, N, N))
    total = sum(it.area for it in items)
    assert res.area >= min(total, (1 - 2 * eps) * N * N)
    assert _no_overlap(res.rects.values())
    assert all(Rect(0, 0, N, N).contains(r) for r in res.rects.values())
    assert verify_tree(res.tree, res.rects) == []
    assert stage_count(res.tree).stages <= 2
    assert sorted(list(res.rects) + list(res.unpacked)) == sorted(it.id for it in items)


def test_nfdh_shelves_example():
    items = [Item(1, 3, 2), Item(2, 3, 3), Item(3, 3, 1), Item(4, 3, 1)]
    res = nfdh_pack(items, Rect(0, 0, 6, 6))
    # shelves: heights 3 (items 2, 1), then 1 (items 3, 4)
    assert res.rects[2] == Rect(0, 0, 3, 3) and res.rects[1] == Rect(3, 0, 6, 2)
    assert res.rects[3] == Rect(0, 3, 3, 4) and res.rects[4] == Rect(3, 3, 6, 4)


def test_nfdh_rejects_oversized():
    with pytest.raises(ValueError):
        nfdh_pack([Item(1, 7, 1)], Rect(0, 0, 6, 6))


# ---- stack knapsack ----

@given(st.lists(st.tuples(st.integers(1, 9), st.integers(1, 9)), max_size=8), st.integers(0, 30))
def test_stack_knapsack_matches_enumeration(pairs, cap):
    items = [Item(i + 1, 20, s, p) for i, (s, p) in enumerate(pairs)]
    card = stack_knapsack(items, cap)
    assert len(card) == oracles.max_stack_count([s for s, _ in pairs], cap)
    prof = stack_knapsack(items, cap, "profit")
    assert sum(it.p for it in prof) == oracles.max_stack_profit(pairs, cap)
    assert sum(it.h for it in prof) <= cap and sum(it.h for it in card) <= cap


def test_stack_knapsack_errors():
    with pytest.raises(ValueError):
        stack_knapsack([], -1)
    with pytest.raises(ValueError):
        stack_knapsack([], 3, "volume")


def test_stack_knapsack_size_key():
    items = [Item(1, 4, 9), Item(2, 2, 9)]
    assert [it.id for it in stack_knapsack(items, 3, size=lambda it: it.w)] == [2]


# ---- matching ----

@given(st.lists(st.tuples(st.integers(1, 6), st.integers(1, 6)), max_size=5),
       st.lists(st.tuples(st.integers(1, 6), st.integers(1, 6)), max_size=5), st.booleans())
def test_matching_is_maximum(items_d, boxes_d, rotation):
    items = [Item(i + 1, w, h) for i, (w, h) in enumerate(items_d)]
    boxes = [Rect(0, 0, w, h) for w, h in boxes_d]
    got = match_large(items, boxes, rotation)
    fits = [[(it.w <= b.w and it.h <= b.h) or (rotation and it.h <= b.w and it.w <= b.h) for b in boxes]
            for it in items]
    assert len(got) == oracles.max_matching(fits)
    assert len(set(got.values())) == len(got)
    by_id = {it.id: k for k, it in enumerate(items)}
    assert all(fits[by_id[i]][j] for i, j in got.items())


# ---- GAP ----

@st.composite
def gaps(draw):
    m = draw(st.integers(1, 3))
    n = draw(st.integers(0, 5))
    caps = [draw(st.integers(0, 10)) for _ in range(m)]
    sizes = [[draw(st.one_of(st.none(), st.integers(1, 8))) for _ in range(m)] for _ in range(n)]
    profits = [[draw(st.integers(0, 9)) for _ in range(m)] for _ in range(n)]
    return caps, sizes, profits


@given(gaps())
def test_gap_exact_matches_enumeration(arg):
    caps, sizes, profits = arg
    g = GapInstance.build(caps, sizes, profits)
    asg = gap_solve(g)
    assert g.feasible(asg)
    assert g.value(asg) == oracles.gap_best(caps, sizes, profits)


@given(gaps())
def test_gap_greedy_is_feasible_and_bounded(arg):
    caps, sizes, profits = arg
    g = GapInstance.build(caps, sizes, profits)
    asg = gap_solve(g, "greedy_eps")
    assert g.feasible(asg)
    assert g.value(asg) <= g.value(gap_solve(g))


def test_gap_budget_and_shape_errors():
    g = GapInstance.build([50, 50], [[k, k + 1] for k in range(1, 12)], [[1, 1]] * 11)
    with pytest.raises(BudgetExceeded):
        gap_solve(g, "exact", budget=10)
    with pytest.raises(ValueError):
        gap_solve(g, "magic")
    with pytest.raises(ValueError):
        GapInstance.build([1, 2], [[1]], [[1]])


# ---- small items ----

@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_assign_small_places_items_nicely(seed):
    import random
    rng = random.Random(seed)
    boxes = [BoxCompartment(Rect(0, 0, 20, 20), "small-area"), BoxCompartment(Rect(20, 0, 40, 10), "small-area")]
    items = [Item(i + 1, rng.randint(1, 4), rng.randint(1, 4)) for i in range(rng.randint(0, 40))]
    eps = F(1, 4)
    sa = assign_small(boxes, items, eps)
    assert sa.mode == "exact" or sa.mode == "greedy_eps"
    for b, ids in zip(boxes, sa.per_box):
        rects = {i: sa.rects[i] for i in ids}
        assert validate_nice_box(b, rects, eps) == []
        assert sum(r.area for r in rects.values()) <= (1 - 2 * eps - eps * eps) * b.rect.area
    assert _no_overlap(sa.rects.values())


def test_assign_small_respects_eps_smallness():
    sa = assign_small([Rect(0, 0, 8, 8)], [Item(1, 3, 1)], F(1, 4))
    assert sa.rects == {}


# ---- rounding ----

def test_height_groups_example():
    items = [Item(i + 1, 20, h) for i, h in enumerate([1, 2, 4, 8])]
    hg = build_height_groups(items, F(1))
    assert sorted(hg.hor) == [0, 1, 2, 3]
    assert [hg.rounded(l) for l in range(4)] == [2, 4, 8, 16]
    assert [hg.slot(l) for l in range(4)] == [1, 3, 7, 15]
    assert all(len(g) == 1 for g in hg.hor.values())


@given(st.lists(st.integers(1, 200), min_size=1, max_size=20), st.sampled_from([F(1, 2), F(1, 3), F(1, 1)]))
def test_height_group_bounds(hs, eps):
    items = [Item(i + 1, 300, h) for i, h in enumerate(hs)]
    hg = build_height_groups(items, eps)
    for l, group in hg.hor.items():
        for it in group:
            assert (1 + eps) ** l <= it.h < (1 + eps) ** (l + 1)
            assert it.h <= hg.slot(l)


def test_height_groups_reject_square():
    with pytest.raises(ValueError):
        build_height_groups([Item(1, 3, 3)], F(1, 2))


def test_linear_group_example():
    items = [Item(i + 1, 20 - i, 1) for i in range(12)]
    lg = linear_group(items, F(1, 3))
    assert [it.id for it in lg.dropped] == [1, 2, 3]
    assert [len(m) for _, m in lg.blocks] == [3, 3, 3]
    assert [ln for ln, _ in lg.blocks] == [17, 14, 11]


@given(st.lists(st.integers(1, 50), max_size=30), st.sampled_from([F(1, 2), F(1, 3), F(1, 4)]))
def test_linear_group_rounds_up_within_blocks(ws, eps):
    items = [Item(i + 1, w, 1) for i, w in enumerate(ws)]
    lg = linear_group(items, eps)
    kept = [it for _, m in lg.blocks for it in m]
    assert sorted(it.id for it in kept + list(lg.dropped)) == sorted(it.id for it in items)
    assert len(lg.dropped) == (math.ceil(len(items) * eps / (1 + eps)) if items else 0)
    for ln, members in lg.blocks:
        assert all(it.w <= ln for it in members)
        assert all(ln <= d.w for d in lg.dropped)


def test_linear_group_needs_integral_inverse():
    with pytest.raises(ValueError):
        linear_group([Item(1, 3, 1)], F(2, 5))


def test_rounded_box_and_l_placement():
    box = BoxCompartment(Rect(0, 0, 10, 10), "horizontal-stack")
    cells = [RoundedCell("h", 8, 3, (Item(1, 7, 2), Item(2, 8, 3))), RoundedCell("h", 10, 2, (Item(3, 9, 1),))]
    rects = place_rounded_in_compartment(box, cells)
    assert validate_nice_box(box, rects) == []
    assert rects[3] == Rect(0, 0, 9, 1)
    L = LCompartment(Rect(0, 0, 10, 10), Rect(3, 0, 10, 6))  # inner at the bottom right
    cells = [RoundedCell("h", 7, 2, (Item(4, 6, 2),)), RoundedCell("v", 9, 1, (Item(5, 1, 8), Item(6, 1, 9)))]
    rects = place_rounded_in_compartment(L, cells)
    assert validate_nice_l(L, rects) == []
    with pytest.raises(ValueError):
        place_rounded_in_compartment(box, [RoundedCell("h", 5, 1, (Item(7, 6, 1),))])
    with pytest.raises(ValueError):
        place_rounded_in_compartment(box, [RoundedCell("v", 5, 1, (Item(7, 1, 5),))])
