import pytest
from hypothesis import given, settings

from guillopack.bench import gen_hard_family, pinwheel
from guillopack.core import Instance, Item, validate_packing
from guillopack.guillotine import is_separable, stage_bounded_best
from guillopack.oracle import oracle_exact
import oracles
from strategies import instances


def test_single_item():
    inst = Instance(5, (Item(1, 3, 2, 7),))
    assert oracle_exact(inst).value == 7


def test_pinwheel_free_and_guillotine():
    # free 4 is exhibited by the pinwheel itself; guillotine 3 is derived by this oracle
    inst, _ = pinwheel()
    free = oracle_exact(inst, "free")
    guill = oracle_exact(inst, "guillotine")
    assert free.complete and free.value == 4
    assert guill.complete and guill.value == 3
    assert is_separable(guill.packing)


def test_unknown_flavor():
    with pytest.raises(ValueError):
        oracle_exact(Instance(2), "fancy")


def test_budget_flags_incomplete():
    inst, _ = gen_hard_family(3)
    res = oracle_exact(inst, "free", budget=5)
    assert not res.complete


@settings(max_examples=40)
@given(instances(max_N=5, max_items=4, max_profit=4))
def test_free_matches_brute_force(inst):
    res = oracle_exact(inst, "free")
    dims = [(it.w, it.h) for it in inst.items]
    assert res.complete
    assert res.value == oracles.pack_best(inst.N, dims, [it.p for it in inst.items])
    assert validate_packing(res.packing) == []


@settings(max_examples=40)
@given(instances(max_N=5, max_items=4, max_profit=4))
def test_guillotine_two_routes_agree(inst):
    # placement search with a separability filter against the cut recursion
    a = oracle_exact(inst, "guillotine")
    b = oracle_exact(inst, f"stages:{2 * max(1, len(inst.items))}")
    assert a.complete and b.complete
    assert a.value == b.value
    assert is_separable(a.packing) and is_separable(b.packing)


@settings(max_examples=25)
@given(instances(max_N=4, max_items=4, max_profit=3))
def test_guillotine_matches_brute_force(inst):
    dims = [(it.w, it.h) for it in inst.items]
    expected = oracles.pack_best(inst.N, dims, [it.p for it in inst.items], guillotine=True)
    assert oracle_exact(inst, "guillotine").value == expected


def test_rotation_is_used_when_allowed():
    inst = Instance(4, (Item(1, 4, 2), Item(2, 2, 4)), allow_rotation=True)
    assert oracle_exact(inst, "free").value == 2
    res = stage_bounded_best(inst, 2)
    assert res.value == 2 and validate_packing(res.packing) == []
