import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import lambertw

from effdim import bounds as b
from effdim import weights as w
from effdim.errors import ConditionViolated, DomainTooLarge, EmptySubset, OutOfDomain
from effdim.subsets import Subset, all_subsets

PI = math.pi
TABLE_TRUNC = {2: [3, 9, 31, 99], 1: [10, 100, 1000, 10000], 0: [math.inf] * 4}
TABLE_SUPER = {2: [1, 2, 2, 3], 1: [1, 2, 3, 3], 0: [2, 3, 4, 5]}
EPS = ["0.1", "0.01", "0.001", "0.0001"]


def exact_truncation(eta: int, eps: str, strict: bool):
    """max{s : s^-eta >= eps} in rational arithmetic."""
    if eta == 0:
        return math.inf
    e = Fraction(eps)
    s = 1
    while True:
        lhs = Fraction(1, (s + 1) ** eta)
        if lhs < e or (strict and lhs == e):
            return s
        s += 1


def mp_superposition(eta: float, eps: str, strict: bool, smax: int = 60):
    """max{s : (s!)^-eta >= pi^(2(s-1)) eps} at 50 digits."""
    mpmath.mp.dps = 50
    best = 1
    for s in range(1, smax + 1):
        lhs = mpmath.factorial(s) ** (-mpmath.mpf(eta))
        rhs = mpmath.pi ** (2 * (s - 1)) * mpmath.mpf(eps)
        if lhs > rhs or (not strict and lhs == rhs):
            best = s
    return best


# ---------------------------------------------------------------------- rho*
def test_critical_radius_examples():
    r = b.critical_radius(w.product(2), 10)
    assert r.rho == pytest.approx(PI, abs=1e-12) and r.argmin_subset == Subset.of([1], 10)
    assert r.via == "Proposition"
    ex = w.explicit({"{1}": 1.0, "{2}": 1.0, "{1,2}": 20.0}, 2)
    r = b.critical_radius(ex, 2)
    assert r.rho == pytest.approx(PI**2 / math.sqrt(20), rel=1e-12)
    assert r.argmin_subset == Subset.of([1, 2], 2) and r.via == "GeneralSearch"
    r = b.critical_radius(w.order(factors=[1.0] * 6), 5)
    assert r.rho == pytest.approx(PI) and r.argmin_subset == Subset.of([1], 5)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6).flatmap(
    lambda d: st.tuples(st.just(d), st.lists(st.floats(0.01, 200.0), min_size=2**d - 1, max_size=2**d - 1))))
def test_critical_radius_brute_force(args):
    d, vals = args
    s = w.explicit({m: v for m, v in zip(range(1, 1 << d), vals)}, d)
    cost = {u: PI ** (2 * len(u)) / s.weight(u) for u in all_subsets(d) if u}
    r = b.critical_radius(s, d)
    assert r.rho**2 == pytest.approx(min(cost.values()), rel=1e-12)
    assert r.rho**2 == pytest.approx(cost[r.argmin_subset], rel=1e-12)


@pytest.mark.parametrize("scheme", [w.product(2), w.product(1), w.product(0.5), w.pod(1, 3), w.order(0.7),
                                    w.product(factors=[3.0, 2.0, 2.0, 0.1])])
def test_search_agrees_with_analytic(scheme):
    d = 8 if scheme.max_dim is None else min(8, scheme.max_dim)
    if scheme.kind is w.Kind.PRODUCT and scheme.params.get("eta") is None:
        d = 4
    a, s = b.critical_radius(scheme, d), b.critical_radius(scheme, d, method="search")
    assert a.rho == pytest.approx(s.rho, rel=1e-12)
    if a.via == "Proposition":
        assert a.rho == pytest.approx(PI / math.sqrt(scheme.weight(Subset.of([1], d))), rel=1e-12)


# ---------------------------------------------------------------------- component bound
def test_component_variance_bound_examples():
    P = w.product(2)
    assert b.component_variance_bound(P, Subset.of([1, 2], 10)) == pytest.approx(1 / (4 * PI**2), abs=1e-12)
    assert b.component_variance_bound(P, Subset.of([1, 3], 10)) == pytest.approx(1 / (9 * PI**2), abs=1e-12)
    assert b.component_variance_bound(P, Subset.of([1], 10)) == pytest.approx(1.0)
    with pytest.raises(EmptySubset):
        b.component_variance_bound(P, Subset(0, 3))


def test_component_bound_proposition_form():
    P = w.product(1.5)
    for u in all_subsets(5):
        if u:
            expected = PI ** (-2 * (len(u) - 1)) * P.weight(u) / P.weight(Subset.of([1], 5))
            assert b.component_variance_bound(P, u) == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------- dimension bounds
@pytest.mark.parametrize("eta", [2, 1, 0])
@pytest.mark.parametrize("k", range(4))
def test_truncation_against_rational_oracle(eta, k):
    for mode, strict in ((b.Mode.NONSTRICT, False), (b.Mode.STRICT, True)):
        t, _ = b.product_dimension_bounds(eta, float(EPS[k]), mode)
        assert t.value == exact_truncation(eta, EPS[k], strict)


@pytest.mark.parametrize("eta", [2, 1, 0, 0.5, 1.5, 3])
@pytest.mark.parametrize("eps", EPS + ["1e-6", "1e-9"])
def test_superposition_against_mpmath(eta, eps):
    for mode, strict in ((b.Mode.NONSTRICT, False), (b.Mode.STRICT, True)):
        _, s = b.product_dimension_bounds(eta, float(eps), mode)
        assert s.value == mp_superposition(eta, eps, strict)


def test_reference_superposition_in_both_modes():
    for eta in (2, 1, 0):
        for k, eps in enumerate(EPS):
            for mode in b.Mode:
                _, s = b.product_dimension_bounds(eta, float(eps), mode)
                assert s.value == TABLE_SUPER[eta][k]
                assert not s.boundary_flag


def test_truncation_examples():
    P1 = w.product(1)
    assert b.truncation_dimension_bound(P1, w.INF, 0.001).value == 1000
    assert b.truncation_dimension_bound(w.product(0), w.INF, 0.1).value == math.inf
    r = b.truncation_dimension_bound(w.product(2), w.INF, 1e-4)
    assert r.value == 100 and r.boundary_flag
    r = b.truncation_dimension_bound(w.product(2), w.INF, 1e-4, b.Mode.STRICT)
    assert r.value == 99 and r.boundary_flag


def test_superposition_examples():
    assert b.superposition_dimension_bound(w.product(2), w.INF, 0.01).value == 2
    assert b.superposition_dimension_bound(w.order(1.0), w.INF, 1e-4).value == 5
    assert b.superposition_dimension_bound(w.product(1), w.INF, 0.1).value == 1


def test_condition_violation_raises():
    with pytest.raises(ConditionViolated):
        b.truncation_dimension_bound(w.pod(1, 3), 6, 0.01)
    bad = w.explicit({"{1}": 1.0, "{2}": 1.0, "{1,2}": 2.0}, 2)
    with pytest.raises(ConditionViolated):
        b.superposition_dimension_bound(bad, 2, 0.01)


def test_finite_d_caps_the_bounds():
    assert b.truncation_dimension_bound(w.product(1), 50, 0.001).value == 50
    assert b.truncation_dimension_bound(w.product(0), 7, 0.1).value == 7
    assert b.superposition_dimension_bound(w.order(1.0), 3, 1e-4).value == 3


@pytest.mark.parametrize("eta", [0.5, 1, 2, 2.5])
@pytest.mark.parametrize("eps", [0.3, 0.05, 1e-3, 1e-5])
def test_product_shortcut_matches_materialized_scheme(eta, eps):
    for mode in b.Mode:
        t, s = b.product_dimension_bounds(eta, eps, mode)
        if t.value <= 18:
            d = max(int(t.value), 2) + 2
            m = w.materialize(w.product(eta), d)
            assert b.truncation_dimension_bound(m, d, eps, mode).value == t.value
        d = min(s.value + 2, 20)
        m = w.materialize(w.product(eta), d)
        assert b.superposition_dimension_bound(m, d, eps, mode).value == s.value


@settings(max_examples=80, deadline=None)
@given(st.floats(0.0, 4.0), st.floats(1e-8, 0.9), st.floats(1.01, 10.0))
def test_monotone_in_eps_and_eta(eta, eps, factor):
    t1, s1 = b.product_dimension_bounds(eta, eps)
    t2, s2 = b.product_dimension_bounds(eta, min(eps * factor, 0.99))
    assert t2.value <= t1.value and s2.value <= s1.value
    t3, s3 = b.product_dimension_bounds(eta + 0.5, eps)
    assert t3.value <= t1.value and s3.value <= s1.value


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([0.5, 1.0, 2.0, 3.0]), st.integers(2, 4000))
def test_mode_ordering_near_ties(eta, s):
    eps = s ** (-eta)
    for fn in (b.truncation_dimension_bound, b.superposition_dimension_bound):
        lo = fn(w.product(eta), w.INF, eps, b.Mode.STRICT)
        hi = fn(w.product(eta), w.INF, eps, b.Mode.NONSTRICT)
        assert lo.value <= hi.value <= lo.value + 1
        if hi.value != lo.value:
            assert hi.boundary_flag


# ---------------------------------------------------------------------- table
def test_table_nonstrict_and_strict_cells():
    rows = {(r.eta, r.epsilon): r for r in b.effective_dimension_table(mode=b.Mode.NONSTRICT)}
    strict = {(r.eta, r.epsilon): r for r in b.effective_dimension_table(mode=b.Mode.STRICT)}
    assert rows[(2.0, 0.001)].trunc == 31
    assert rows[(2.0, 0.01)].trunc == 10 and strict[(2.0, 0.01)].trunc == 9
    assert rows[(2.0, 0.0001)].trunc == 100 and strict[(2.0, 0.0001)].trunc == 99
    assert rows[(2.0, 0.01)].trunc_boundary
    for eta in (2.0, 1.0, 0.0):
        for k, eps in enumerate(b.TABLE1_EPSILONS):
            assert rows[(eta, eps)].super == TABLE_SUPER[int(eta)][k]


def test_table_is_eps_major_and_parallel_identical():
    serial = b.effective_dimension_table()
    assert [(r.epsilon, r.eta) for r in serial[:3]] == [(0.1, 2.0), (0.1, 1.0), (0.1, 0.0)]
    assert b.effective_dimension_table(workers=4) == serial


# ---------------------------------------------------------------------- interactions
def brute_important(scheme, d, eps, max_order, strict=False):
    rho2 = b.critical_radius(scheme, d).rho ** 2
    out = set()
    for r in range(1, max_order + 1):
        for combo in itertools.combinations(range(1, d + 1), r):
            u = Subset.of(combo, d)
            bound = rho2 * scheme.weight(u) * PI ** (-2 * r)
            tie = abs(math.log(bound) - math.log(eps)) <= 1e-12
            if (bound > eps and not tie) or (tie and not strict):
                out.add(str(u))
    return out


def names(found):
    return {str(u) for u, _ in found}


def test_important_subsets_listings():
    P2 = w.product(2)
    got = names(b.important_subsets(P2, 10, 0.01, 3))
    assert got == {f"{{{j}}}" for j in range(1, 11)} | {"{1,2}", "{1,3}"}
    strict = names(b.important_subsets(P2, 10, 0.01, 3, b.Mode.STRICT))
    assert strict == {f"{{{j}}}" for j in range(1, 10)} | {"{1,2}", "{1,3}"}
    pairs = {f"{{1,{j}}}" for j in range(2, 11)} | {"{2,3}", "{2,4}", "{2,5}"}
    got = names(b.important_subsets(P2, 10, 0.001, 3))
    assert {u for u in got if u.count(",") >= 1} == pairs
    assert not any(u.count(",") >= 2 for u in got)
    got = names(b.important_subsets(w.product(1), 100, 0.01, 2))
    assert got == {f"{{{j}}}" for j in range(1, 101)} | pairs


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([w.product(2), w.product(1), w.product(0.5), w.pod(1, 3), w.order(0.4)]),
       st.integers(2, 9), st.floats(1e-4, 0.5), st.integers(1, 3), st.booleans())
def test_important_subsets_brute_force(scheme, d, eps, max_order, strict):
    mode = b.Mode.STRICT if strict else b.Mode.NONSTRICT
    found = b.important_subsets(scheme, d, eps, max_order, mode)
    assert names(found) == brute_important(scheme, d, eps, max_order, strict)
    bounds = [v for _, v in found]
    assert bounds == sorted(bounds, reverse=True)


# ---------------------------------------------------------------------- Lambert W and asymptotics
def test_lambert_examples():
    assert b.lambert_w0(0.0) == 0.0
    assert b.lambert_w0(math.e) == pytest.approx(1.0, abs=1e-15)
    assert b.lambert_w0(1.0) == pytest.approx(0.5671432904097838, abs=1e-15)
    assert b.lambert_w0(-1 / math.e) == pytest.approx(-1.0, abs=1e-7)
    with pytest.raises(OutOfDomain):
        b.lambert_w0(-0.5)


def test_lambert_residuals_and_scipy_oracle():
    xs = np.concatenate([-1 / math.e + np.logspace(-6, math.log10(1 / math.e), 200),
                         np.logspace(-12, 12, 400)])
    for x in xs:
        wv = b.lambert_w0(float(x))
        assert abs(wv * math.exp(wv) - x) <= 1e-12 * max(1.0, abs(x))
        assert wv >= -1
        assert wv == pytest.approx(lambertw(x).real, rel=1e-10, abs=1e-12)


def test_asymptote():
    a = b.asymptote_argument(1e-40, 2, 0.9)
    assert a == pytest.approx(math.log(1e40) / 1.8)
    val = b.superposition_asymptote(1e-40, 2, 0.9)
    assert val * b.lambert_w0(a) == pytest.approx(math.log(a), rel=1e-14)
    eps = math.exp(-math.e * 0.9 * 2)
    assert b.superposition_asymptote(eps, 2, 0.9) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainTooLarge):
        b.superposition_asymptote(0.1, 2, 0.9)


@pytest.mark.parametrize("eta", [1, 2])
@pytest.mark.parametrize("k", range(6, 41, 2))
def test_growth_bound_dominates(eta, k):
    eps = 10.0**-k
    _, s = b.product_dimension_bounds(eta, eps)
    a = b.asymptote_argument(eps, eta, 0.5)
    g = b.superposition_growth_bound(eps, eta, 0.5)
    assert g * math.log(g) == pytest.approx(a, rel=1e-12)
    assert s.value <= g
    assert s.value * math.log(s.value) <= 2 * math.log(1 / eps) / eta


def test_tractability_labels():
    assert b.tractability_class(2.5) is b.Tractability.QMC_RATE
    assert b.tractability_class(1.5) is b.Tractability.STRONGLY_TRACTABLE
    assert b.tractability_class(2.0) is b.Tractability.STRONGLY_TRACTABLE
    assert b.tractability_class(1.0) is b.Tractability.NOT_ESTABLISHED
    assert b.tractability_class(0.0) is b.Tractability.NOT_ESTABLISHED


def test_report_json_serializes_infinity():
    t, _ = b.product_dimension_bounds(0, 0.1)
    assert t.to_json()["value"] == "inf"
