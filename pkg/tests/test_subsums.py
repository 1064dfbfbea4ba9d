import random

import pytest

from zerosum.group import GroupParams
from zerosum.multiset import GroupMultiset
from zerosum.subsums import (
    SearchBudget,
    StateBudgetError,
    enumerate_subsums,
    find_zero_sum_subset,
    max_zero_sum_free,
    naive_max_zero_sum_free,
    naive_subsums,
    olson_constant,
)


def ms(params, pts):
    return GroupMultiset.from_points(params, pts)


def reachable_set(table):
    return set(map(tuple, table.reachable_values()))


def test_enumerate_examples():
    p5 = GroupParams(5, 1)
    assert reachable_set(enumerate_subsums(ms(p5, [(1,), (2,)]))) == {(1,), (2,), (3,)}

    assert reachable_set(enumerate_subsums(ms(p5, [(0,)]))) == {(0,)}

    p32 = GroupParams(3, 2)
    A = ms(p32, [(1, 0), (0, 1), (2, 2)])
    table = enumerate_subsums(A)
    # brute force over the 7 nonempty subsets
    assert reachable_set(table) == naive_subsums(A)
    assert table.reachable_count() == 7
    assert table.contains((0, 0))


def test_enumerate_rejects_empty():
    with pytest.raises(ValueError):
        enumerate_subsums(GroupMultiset.empty(GroupParams(5, 1)))


def test_find_zero_sum_examples():
    p3 = GroupParams(3, 1)
    cert = find_zero_sum_subset(ms(p3, [(1,), (2,)]))
    assert cert is not None and dict(cert.subset.items()) == {(1,): 1, (2,): 1}

    p5 = GroupParams(5, 1)
    assert find_zero_sum_subset(ms(p5, [(1,), (2,)])) is None

    containing_zero = ms(p5, [(0,), (1,), (3,)])
    cert = find_zero_sum_subset(containing_zero)
    assert cert is not None and cert.verify(containing_zero)
    assert dict(cert.subset.items()) == {(0,): 1}


def test_dp_equals_naive_random():
    rng = random.Random(42)
    for _ in range(60):
        p = rng.choice([3, 5, 7, 11])
        d = rng.choice([1, 2])
        params = GroupParams(p, d)
        n = rng.randrange(1, 12)
        A = ms(params, [tuple(rng.randrange(p) for _ in range(d)) for _ in range(n)])
        assert reachable_set(enumerate_subsums(A)) == naive_subsums(A)


def test_monotonicity_on_nested_pairs():
    rng = random.Random(7)
    params = GroupParams(7, 2)
    for _ in range(25):
        small = [tuple(rng.randrange(7) for _ in range(2)) for _ in range(rng.randrange(1, 6))]
        extra = [tuple(rng.randrange(7) for _ in range(2)) for _ in range(rng.randrange(0, 5))]
        inner = reachable_set(enumerate_subsums(ms(params, small)))
        outer = reachable_set(enumerate_subsums(ms(params, small + extra)))
        assert inner <= outer


def test_witnesses_always_verify():
    rng = random.Random(11)
    params = GroupParams(5, 2)
    for _ in range(50):
        n = rng.randrange(1, 10)
        A = ms(params, [tuple(rng.randrange(5) for _ in range(2)) for _ in range(n)])
        table = enumerate_subsums(A)
        for target in list(reachable_set(table))[:5]:
            w = table.witness(target)
            assert w is not None
            assert A.contains_submultiset(w)
            assert w.total() == target
            assert len(w) >= 1


def test_witness_respects_multiplicities():
    params = GroupParams(7, 1)
    A = GroupMultiset(params, {(3,): 2})
    table = enumerate_subsums(A)
    w = table.witness((6,))
    assert w is not None and w.multiplicity((3,)) == 2


def test_state_budget_error():
    params = GroupParams(13, 3, state_budget=13 ** 3)
    X = ms(params, [(1, 2, 3)])
    # shrink the budget after the fact by rebuilding with a smaller cap
    with pytest.raises(ValueError):
        GroupParams(13, 3, state_budget=100)
    assert enumerate_subsums(X).reachable_count() == 1


def test_max_zero_sum_free_small():
    res3 = max_zero_sum_free(GroupParams(3, 1))
    assert (res3.size, res3.exact) == (1, True) and res3.witness == ((1,),)

    res7 = max_zero_sum_free(GroupParams(7, 1))
    assert res7.size == 3 and res7.exact
    # {1, 2, 3} works: its subsums are 1..6
    assert naive_subsums(ms(GroupParams(7, 1), list(res7.witness))) == {
        (1,), (2,), (3,), (4,), (5,), (6,),
    }


@pytest.mark.parametrize("p,expect", [(3, 2), (5, 3), (7, 4)])
def test_olson_dimension_one(p, expect):
    params = GroupParams(p, 1)
    naive = naive_max_zero_sum_free(params)
    assert naive.size + 1 == expect
    res = olson_constant(params)
    assert res.olson == expect and res.exact


def test_olson_3_2_exact_and_bounded():
    params = GroupParams(3, 2)
    naive = naive_max_zero_sum_free(params)
    res = olson_constant(params)
    assert res.exact and res.olson == naive.size + 1
    assert res.olson <= 5  # the d(p-1)+1 zero-sum bound


def test_olson_budget_interval():
    params = GroupParams(13, 2)
    res = olson_constant(params, SearchBudget(max_nodes=50))
    if not res.exact:
        assert res.olson is None
        assert res.lower <= res.upper
        assert res.upper == 2 * 12 + 1
        # the witness behind the lower bound really is zero-sum-free
        free = ms(params, list(res.witness))
        assert find_zero_sum_subset(free) is None


def test_free_set_witness_maximality_small():
    # exactness means: witness free, and no free set of size+1 (checked naively)
    params = GroupParams(5, 1)
    res = max_zero_sum_free(params)
    assert res.exact
    naive = naive_max_zero_sum_free(params)
    assert res.size == naive.size


def test_bitset_export_roundtrip():
    import numpy as np

    params = GroupParams(5, 2)
    A = ms(params, [(1, 2), (3, 4), (2, 0)])
    table = enumerate_subsums(A)
    raw = table.to_bitset_bytes()
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    flat = table.table.reshape(-1)
    assert (bits[: flat.size] == flat).all()


def test_olson_sqrt_bound_sanity():
    # consistent with the optimal OL(F_p) <= sqrt(2p) regime; the +2 absorbs
    # small-prime slack
    import math

    for p in (3, 5, 7, 11, 13):
        res = olson_constant(GroupParams(p, 1))
        assert res.exact
        assert res.olson <= math.sqrt(2 * p) + 2, (p, res.olson)
