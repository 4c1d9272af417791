import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effdim import weights as w
from effdim.errors import CapExceeded, MissingWeight
from effdim.subsets import Subset, all_subsets, mask_cardinality, mask_ceiling


def brute_condition(scheme, d, key):
    """Literal double loop over s and u; the oracle for both condition checks."""
    for s in range(1, d + 1):
        ref = scheme.weight(Subset.first(s, d)) if key == "card" else scheme.weight(Subset.of([s], d))
        for u in all_subsets(d):
            k = len(u) if key == "card" else u.ceil
            if k >= s and scheme.weight(u) > ref * (1 + 1e-12):
                return False
    return True


# ---------------------------------------------------------------------- subsets
def test_subset_basics():
    u = Subset.of([1, 3], 4)
    assert len(u) == 2 and u.ceil == 3 and u.floor == 1
    assert str(u) == "{1,3}"
    assert str(u.complement()) == "{2,4}"
    assert Subset(0, 4).ceil == 0
    assert Subset.parse("{1,3}", 4) == u
    assert Subset.parse("{}", 4) == Subset(0, 4) == Subset.parse("∅", 4)


def test_subset_rejects_bits_above_d():
    with pytest.raises(ValueError):
        Subset(0b100, 2)


def test_mask_helpers_match_python():
    masks = np.arange(1 << 10)
    assert mask_cardinality(masks).tolist() == [int(m).bit_count() for m in masks]
    assert mask_ceiling(masks).tolist() == [int(m).bit_length() for m in masks]


@given(st.integers(1, 12).flatmap(lambda d: st.tuples(st.just(d), st.integers(0, (1 << d) - 1))))
def test_subsets_of_u_are_all_submasks(args):
    d, bits = args
    u = Subset(bits, d)
    subs = list(u.subsets())
    assert len(subs) == 2 ** len(u)
    assert all(v.issubset(u) for v in subs)


# ---------------------------------------------------------------------- weight_of
def test_weight_of_examples():
    assert w.weight_of(w.product(2), Subset.of([1, 2])) == pytest.approx(0.25, rel=1e-15)
    assert w.weight_of(w.pod(1, 3), Subset.of([1, 2])) == pytest.approx(0.25, rel=1e-15)
    assert w.weight_of(w.product(2), Subset(0, 3)) == 1.0
    assert w.weight_of(w.order(0.5), Subset.of([2, 5])) == pytest.approx(0.25)


def test_explicit_missing_weight():
    with pytest.raises(MissingWeight):
        w.explicit({"{1}": 1.0, "{2}": 1.0}, 2)


def test_empty_weight_infinity_round_trips():
    s = w.from_json({"kind": "product", "eta": 1, "empty": "inf"})
    assert s.weight(Subset(0, 3)) == math.inf
    assert w.from_json(s.to_json()).weight(Subset(0, 3)) == math.inf


@pytest.mark.parametrize("desc", [
    {"kind": "product", "eta": 2},
    {"kind": "pod", "alpha": 1, "beta": 3},
    {"kind": "order", "gamma": 0.5},
    {"kind": "explicit", "d": 2, "weights": {"{1}": 1.0, "{2}": 0.5, "{1,2}": 0.1}},
])
def test_json_round_trip(desc):
    s = w.from_json(desc)
    t = w.from_json(s.to_json())
    for u in all_subsets(2):
        assert t.weight(u) == s.weight(u)


@pytest.mark.parametrize("scheme", [w.product(1), w.product(2), w.pod(1, 3), w.order(0.5),
                                    w.finite_order([1.0, 0.5, 0.2])])
def test_materialized_table_agrees(scheme):
    d = 6
    table = w.materialize(scheme, d)
    for u in all_subsets(d):
        if u:
            assert table.weight(u) == pytest.approx(scheme.weight(u), rel=1e-14)


def test_all_log_weights_matches_pointwise():
    s = w.pod(1, 3)
    lw = s.all_log_weights(5)
    for u in all_subsets(5):
        if u:
            assert lw[u.bits] == pytest.approx(math.log(s.weight(u)), abs=1e-12)


# ---------------------------------------------------------------------- conditions
def test_cardinality_examples():
    assert w.verify_cardinality_condition(w.product(1), 5)
    assert w.verify_cardinality_condition(w.pod(1, 3), 5)
    v = w.verify_cardinality_condition(w.explicit({"{1}": 1.0, "{2}": 1.0, "{1,2}": 2.0}, 2), 2)
    assert not v and v.witness == (Subset.of([1, 2], 2), 1)


def test_index_examples():
    assert w.verify_index_condition(w.product(2), 6)
    assert w.verify_index_condition(w.order(0.5), 4)
    v = w.verify_index_condition(w.pod(1, 3), 3)
    assert not v and v.witness == (Subset.of([1, 2], 3), 2)


def test_pod_index_witness_contains_one():
    for alpha, beta in [(1, 3), (0.5, 2), (2, 4)]:
        s = w.pod(alpha, beta)
        assert w.verify_cardinality_condition(s, 8)
        v = w.verify_index_condition(s, 8)
        assert not v and 1 in v.witness[0]


@pytest.mark.parametrize("d", [1, 4, 9, 14])
def test_product_nonincreasing_le_one_satisfies_both(d):
    s = w.product(factors=np.linspace(1.0, 0.3, d))
    for method in ("exhaustive", "analytic"):
        assert w.verify_cardinality_condition(s, d, method)
        assert w.verify_index_condition(s, d, method)


def test_exhaustive_cap():
    with pytest.raises(CapExceeded):
        w.verify_cardinality_condition(w.product(1), 21, "exhaustive")
    assert w.verify_cardinality_condition(w.product(1), 21)


positive = st.floats(0.05, 3.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(positive, min_size=1, max_size=6), st.lists(positive, min_size=7, max_size=7))
def test_analytic_checks_agree_with_brute_force(factors, orders):
    d = len(factors)
    s = w.pod(order_factors=[1.0] + orders[:d], product_factors=factors)
    for key, fn in (("card", w.verify_cardinality_condition), ("ceil", w.verify_index_condition)):
        expected = brute_condition(s, d, key)
        assert bool(fn(s, d, "analytic")) == expected
        assert bool(fn(s, d, "exhaustive")) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5).flatmap(
    lambda d: st.tuples(st.just(d), st.lists(positive, min_size=2**d - 1, max_size=2**d - 1))))
def test_exhaustive_witness_is_a_real_violation(args):
    d, vals = args
    s = w.explicit({m: v for m, v in zip(range(1, 1 << d), vals)}, d)
    for key, fn in (("card", w.verify_cardinality_condition), ("ceil", w.verify_index_condition)):
        v = fn(s, d)
        assert bool(v) == brute_condition(s, d, key)
        if not v:
            u, t = v.witness
            ref = s.weight(Subset.first(t, d)) if key == "card" else s.weight(Subset.of([t], d))
            assert (len(u) if key == "card" else u.ceil) >= t
            assert s.weight(u) > ref


def test_infinite_d_product():
    v = w.verify_index_condition(w.product(2), w.INF)
    assert v.holds


def test_combinations_match_mask_order():
    # all_subsets enumerates masks in increasing order
    d = 4
    got = [u.bits for u in all_subsets(d)]
    assert got == list(range(1 << d))
    assert sum(1 for _ in itertools.combinations(range(d), 2)) == sum(1 for u in all_subsets(d) if len(u) == 2)
