import random
from fractions import Fraction as F

import pytest

from sepax.core import (
    UtilityFn,
    WeakOrder,
    canonical_utility,
    enumerate_weak_orders,
    order_from_utility,
    strictly_consistent,
)
from sepax.axioms import as_separation
from sepax.mechanisms import k_sensitive_boost, rank_score, top_class_uniform
from sepax.paths import (
    SPLIT_CHAIN_STYLES,
    as_multiway_separation,
    as_refinement,
    blend_utilities,
    check_multiway_sp,
    check_refinement_sp,
    check_separation_sp,
    enumerate_multiway_separations,
    enumerate_refinements,
    random_strict_utility,
    refinement_path,
    split_chain,
    utility_segment,
)
from tests.oracles import weak_order_count


def wo(text: str) -> WeakOrder:
    return WeakOrder.parse(text)


def test_as_refinement_basics():
    r = as_refinement(wo("0,1>2"), wo("0>1>2"))
    assert r is not None and not r.is_identity
    assert r.blocks == (((0,), (1,)), ((2,),))
    identity = as_refinement(wo("0,1>2"), wo("0,1>2"))
    assert identity is not None and identity.is_identity
    assert as_refinement(wo("0>1>2"), wo("0,1>2")) is None
    assert as_refinement(wo("0,1>2"), wo("1>2>0")) is None
    # two classes refined at once is a refinement but not a multiway split
    r = as_refinement(wo("0,1>2,3"), wo("0>1>2>3"))
    assert r is not None
    assert as_multiway_separation(wo("0,1>2,3"), wo("0>1>2>3")) is None


def test_as_multiway_separation_pinned():
    multi = as_multiway_separation(wo("0,1,2"), wo("0>1>2"))
    assert multi.to_json() == {
        "coarse": "0,1,2",
        "fine": "0>1>2",
        "kappa": 1,
        "parts": [[0], [1], [2]],
    }
    assert multi.arity == 3
    assert as_multiway_separation(wo("0,1,2"), wo("0,1,2")) is None


def test_two_way_multiway_agrees_with_separation():
    for m in (2, 3, 4):
        for coarse in enumerate_weak_orders(m):
            for multi in enumerate_multiway_separations(coarse):
                if multi.arity == 2:
                    sep = as_separation(multi.coarse, multi.fine)
                    assert sep is not None
                    assert (sep.upper_part, sep.lower_part) == multi.parts


def test_enumerate_refinements_counts():
    # refinements of the full-indifference order are exactly all weak orders
    for m in (1, 2, 3, 4):
        flat = WeakOrder(m, (tuple(range(m)),))
        fines = {r.fine for r in enumerate_refinements(flat)}
        assert len(fines) == weak_order_count(m)
    strict = wo("0>1>2")
    assert [r.fine.text for r in enumerate_refinements(strict)] == ["0>1>2"]
    assert list(enumerate_refinements(strict, include_identity=False)) == []


def test_enumerate_multiway_round_trip():
    for m in (2, 3, 4):
        for coarse in enumerate_weak_orders(m):
            for multi in enumerate_multiway_separations(coarse):
                assert multi.arity >= 2
                assert as_multiway_separation(multi.coarse, multi.fine) == multi


def test_split_chain_pinned_examples():
    multi = as_multiway_separation(wo("0,1,2"), wo("0>1>2"))
    top = split_chain(multi, "top_first")
    assert [multi.coarse.text] + [s.fine.text for s in top] == [
        "0,1,2",
        "0>1,2",
        "0>1>2",
    ]
    bottom = split_chain(multi, "bottom_merge")
    assert [multi.coarse.text] + [s.fine.text for s in bottom] == [
        "0,1,2",
        "0,1>2",
        "0>1>2",
    ]
    with pytest.raises(ValueError):
        split_chain(multi, "sideways")


def test_split_chain_exhaustive_small_m():
    for m in (2, 3, 4):
        for coarse in enumerate_weak_orders(m):
            for multi in enumerate_multiway_separations(coarse):
                for style in SPLIT_CHAIN_STYLES:
                    steps = split_chain(multi, style)
                    assert len(steps) == multi.arity - 1
                    assert steps[0].coarse == multi.coarse
                    assert steps[-1].fine == multi.fine
                    for left, right in zip(steps, steps[1:]):
                        assert left.fine == right.coarse
                    for sep in steps:
                        assert as_separation(sep.coarse, sep.fine) == sep


def test_local_sp_scans_on_zoo():
    for mech in (rank_score(3), top_class_uniform(4)):
        assert check_separation_sp(mech) is None
        assert check_multiway_sp(mech) is None
        assert check_refinement_sp(mech) is None
    bad = k_sensitive_boost(3)
    for check in (check_separation_sp, check_multiway_sp, check_refinement_sp):
        violation = check(bad)
        assert violation is not None
        truth_lot = bad.lottery(violation.truth)
        lie_lot = bad.lottery(violation.misreport)
        upper = violation.truth.upper_contour(violation.witness_alt)
        assert truth_lot.mass(upper) == violation.truth_cumulative
        assert lie_lot.mass(upper) == violation.misreport_cumulative
        assert violation.misreport_cumulative > violation.truth_cumulative


def test_blend_utilities():
    u = UtilityFn(2, (F(1), F(0)))
    v = UtilityFn(2, (F(0), F(1)))
    mid = blend_utilities(u, v, F(1, 2))
    assert mid.values == (F(1, 2), F(1, 2))
    assert blend_utilities(u, v, F(0)).values == u.values
    assert blend_utilities(u, v, F(1)).values == v.values


def test_utility_segment_pinned():
    seg = utility_segment(
        canonical_utility(wo("0>1>2")), canonical_utility(wo("2>1>0"))
    )
    assert seg.breakpoints == (F(1, 2),)
    seg = utility_segment(
        canonical_utility(wo("0>1")), canonical_utility(wo("0>1"))
    )
    assert seg.breakpoints == ()
    with pytest.raises(ValueError):
        utility_segment(canonical_utility(wo("0>1")), canonical_utility(wo("0>1>2")))


def test_refinement_path_pinned_examples():
    p = refinement_path(wo("0>1"), wo("1>0"))
    assert [o.text for o in p.orders] == ["0>1", "0,1", "1>0"]
    assert p.alphas == [F(0), F(1, 2), F(3, 4)]
    assert [d for d, _ in p.steps()] == ["coarsen", "refine"]

    p = refinement_path(wo("0>1>2"), wo("2>1>0"))
    assert [o.text for o in p.orders] == ["0>1>2", "0,1,2", "2>1>0"]

    p = refinement_path(wo("0,1"), wo("0>1"))
    assert [o.text for o in p.orders] == ["0,1", "0>1"]
    assert [d for d, _ in p.steps()] == ["refine"]

    p = refinement_path(wo("0>1"), wo("0>1"))
    assert [o.text for o in p.orders] == ["0>1"]
    assert p.steps() == []


def test_refinement_path_rejects_inconsistent_utilities():
    with pytest.raises(ValueError):
        refinement_path(wo("0>1"), wo("1>0"), u=canonical_utility(wo("1>0")))
    with pytest.raises(ValueError):
        refinement_path(
            wo("0>1"), wo("1>0"), v=UtilityFn(2, (F(1), F(1)))
        )


def test_refinement_path_random_property():
    rng = random.Random(314)
    orders4 = enumerate_weak_orders(4)
    for _ in range(200):
        start, end = rng.choice(orders4), rng.choice(orders4)
        u = random_strict_utility(start, rng)
        v = random_strict_utility(end, rng)
        assert strictly_consistent(u, start)
        assert strictly_consistent(v, end)
        path = refinement_path(start, end, u=u, v=v)
        assert path.orders[0] == start and path.orders[-1] == end
        assert path.alphas[0] == 0
        assert all(a < b for a, b in zip(path.alphas, path.alphas[1:]))
        for order, alpha in zip(path.orders, path.alphas):
            assert order_from_utility(blend_utilities(u, v, alpha)) == order
        for left, right in zip(path.orders, path.orders[1:]):
            assert left != right
        path.steps()  # raises if some adjacent pair is not a refinement


def test_path_telescopes_for_sp_mechanism():
    # a strategyproof table loses expected utility at every step away from
    # the truth, measured with the blended utility that induces the step's
    # left order
    mech = rank_score(3)
    rng = random.Random(99)
    orders = enumerate_weak_orders(3)
    for _ in range(60):
        start, end = rng.choice(orders), rng.choice(orders)
        u = random_strict_utility(start, rng)
        v = random_strict_utility(end, rng)
        path = refinement_path(start, end, u=u, v=v)
        for i in range(len(path.orders) - 1):
            blend = blend_utilities(u, v, path.alphas[i])
            here = blend.expected(mech.lottery(path.orders[i]))
            there = blend.expected(mech.lottery(path.orders[i + 1]))
            assert here >= there


def test_random_strict_utility_reproducible():
    order = wo("1>0,2>3")
    a = random_strict_utility(order, random.Random(4))
    b = random_strict_utility(order, random.Random(4))
    assert a.values == b.values
    assert strictly_consistent(a, order)
