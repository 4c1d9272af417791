import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effdim import quadrature as qd
from effdim.errors import CapExceeded, EvaluationError
from effdim.integrands import from_expression, linear_sum


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 16, 33, 64, 100])
def test_gauss_matches_numpy_leggauss(n):
    x, w = qd.gauss_legendre_01(n)
    xr, wr = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(x, (xr + 1) / 2, atol=2e-15)
    np.testing.assert_allclose(w, wr / 2, atol=2e-15)
    assert np.all(w > 0)
    assert abs(w.sum() - 1) < 1e-14


def test_tensor_rule_examples():
    nodes, w = qd.tensor_rule(1, 2)
    np.testing.assert_allclose(nodes[:, 0], [0.5 - 1 / (2 * math.sqrt(3)), 0.5 + 1 / (2 * math.sqrt(3))], atol=1e-15)
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-15)
    nodes, w = qd.tensor_rule(1, 1)
    assert nodes[0, 0] == pytest.approx(0.5) and w[0] == pytest.approx(1.0)
    nodes, w = qd.tensor_rule(2, 2)
    assert nodes.shape == (4, 2)
    np.testing.assert_allclose(w, 0.25, atol=1e-15)
    with pytest.raises(CapExceeded):
        qd.tensor_rule(6, 16)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 6), st.data())
def test_gauss_exact_on_monomials(d, n, data):
    powers = data.draw(st.lists(st.integers(0, 2 * n - 1), min_size=d, max_size=d))

    def f(x):
        return np.prod(x ** np.array(powers), axis=1)

    exact = math.prod(1 / (p + 1) for p in powers)
    got = qd.integrate(f, d, qd.GaussTensor(n)).value
    assert got == pytest.approx(exact, rel=1e-13)


def test_integrate_examples():
    f = from_expression("(x1 - 0.5) * (x2 - 0.5)", 2)
    assert abs(qd.integrate(f, 2, qd.GaussTensor(4)).value) < 1e-15
    g = from_expression("x1 * x2", 2)
    assert qd.integrate(g, 2, qd.GaussTensor(2)).value == pytest.approx(0.25, abs=4e-16)
    h = from_expression("sqrt(2) * sin(pi * (x1 - 0.5))", 1)
    assert abs(qd.integrate(h, 1, qd.GaussTensor(16)).value) < 1e-12
    est = qd.integrate(g, 2, qd.GaussTensor(2))
    assert est.std_error is None and est.n_evals == 4


def test_randomized_estimates_report_error_and_repeat():
    f = linear_sum(3)
    a = qd.integrate(f, 3, qd.RandomizedHalton(512, 8, seed=3))
    b = qd.integrate(f, 3, qd.RandomizedHalton(512, 8, seed=3))
    assert a == b and a.std_error > 0
    assert abs(a.value - 1.5) < 5 * a.std_error + 1e-12
    m = qd.integrate(f, 3, qd.MonteCarlo(512, 8, seed=3))
    assert m.std_error > 0 and abs(m.value - 1.5) < 5 * m.std_error


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_evaluation_reports_point():
    f = from_expression("1 / (x1 - x1)", 1)
    with pytest.raises(EvaluationError) as info:
        qd.integrate(f, 1, qd.GaussTensor(3))
    assert info.value.point is not None


def test_halton_examples():
    pts = qd.low_discrepancy_points(2, 3)
    np.testing.assert_allclose(pts, [[0.5, 1 / 3], [0.25, 2 / 3], [0.75, 1 / 9]], atol=1e-15)
    assert qd.low_discrepancy_points(1, 1)[0, 0] == 0.5
    shifted = qd.low_discrepancy_points(2, 1, "shifted_halton", shift=np.array([0.5, 0.5]))
    np.testing.assert_allclose(shifted[0], [0.0, 5 / 6], atol=1e-15)


def test_radical_inverse_against_string_digits():
    for base in (2, 3, 5, 7, 11):
        idx = np.arange(1, 300)
        got = qd.radical_inverse(idx, base)
        for i, g in zip(idx, got):
            digits, k = [], int(i)
            while k:
                digits.append(k % base)
                k //= base
            expected = sum(dg * base ** -(p + 1) for p, dg in enumerate(digits))
            assert g == pytest.approx(expected, abs=1e-15)


@given(st.integers(1, 64), st.integers(1, 200), st.integers(1, 200))
@settings(max_examples=30, deadline=None)
def test_halton_prefix_and_range(d, n, extra):
    short = qd.low_discrepancy_points(d, n)
    long = qd.low_discrepancy_points(d, n + extra)
    assert np.array_equal(long[:n], short)
    assert np.all((long >= 0) & (long < 1))


def test_first_primes():
    assert qd.first_primes(10).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert qd.first_primes(64)[-1] == 311


def test_replicates_are_reproducible_and_distinct():
    spec = qd.RandomizedHalton(16, 4, seed=9)
    a, b = qd.replicate_points(spec, 3), qd.replicate_points(spec, 3)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], a[1])
    assert isinstance(qd.generator(0).bit_generator, np.random.Philox)


def test_default_spec():
    assert qd.default_spec(6) == qd.GaussTensor(16)
    assert qd.default_spec(7) == qd.RandomizedHalton(2**14, 16, 0)


def test_midpoint_rule():
    x, w = qd.midpoint_01(4)
    np.testing.assert_allclose(x, [0.125, 0.375, 0.625, 0.875])
    assert w.sum() == pytest.approx(1.0)


def test_contract_matches_full_sum():
    f = from_expression("exp(x1) * x2 + x3**2", 3)
    grid, w = qd.grid_values(f, 3, qd.GaussTensor(5))
    nodes, wt = qd.tensor_rule(3, 5)
    assert float(qd.contract(grid, w, range(3))) == pytest.approx(float(f(nodes) @ wt), rel=1e-14)


def test_mc_qmc_rmse():
    f = from_expression("sum(x - 0.5, axis=1)", 8)
    mc, qmc = qd.mc_qmc_rmse(f, 8, 1024, 16, 0, true_mean=0.0)
    assert qmc < mc
    assert qd.mc_qmc_rmse(f, 8, 1024, 16, 0, true_mean=0.0) == (mc, qmc)
    one = from_expression("1 + 0 * x1", 8)
    assert qd.mc_qmc_rmse(one, 8, 256, 4, 0, true_mean=1.0) == (0.0, 0.0)
    prod8 = from_expression("prod(x - 0.5, axis=1)", 8)
    ratio = np.divide(*qd.mc_qmc_rmse(prod8, 8, 1024, 16, 0, true_mean=0.0)[::-1])
    assert np.isfinite(ratio)
