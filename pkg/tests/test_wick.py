import math

import numpy as np
import pytest

from skorohod import (
    CapacityError,
    WickValueContext,
    build_gaussian_vector,
    hermite,
    wick_exp,
    wick_inner,
    wick_monomial_value,
    wick_upper_bound,
)
from skorohod.wick import hermite_stack, paired_moment, ryser_permanent, wick_monomial_contracted


def test_hermite_small_cases():
    assert hermite(0, 0.7, 3.0) == 1.0
    assert hermite(1, 0.7, 3.0) == 3.0
    assert hermite(2, 1.0, 0.0) == -1.0
    # h3 = x^3 - 3 var x, expanded by hand from the recurrence
    assert hermite(3, 0.5, 1.0) == pytest.approx(-0.5, abs=1e-15)
    assert hermite(5, 0.0, 1.3) == pytest.approx(1.3 ** 5, rel=1e-15)


def test_hermite_guards():
    with pytest.raises(CapacityError):
        hermite(65, 1.0, 0.0)
    with pytest.raises(ValueError):
        hermite(2, -0.5, 0.0)
    with pytest.raises(ValueError):
        hermite(-1, 0.5, 0.0)


def test_hermite_stack_matches_scalar(rng):
    x = rng.standard_normal(17)
    var = 0.83
    stack = hermite_stack(6, var, x)
    for k in range(7):
        np.testing.assert_allclose(stack[k], hermite(k, var, x), rtol=1e-13)


def test_wick_exp_values():
    assert wick_exp(0.0, 0.0) == 1.0
    assert wick_exp(1.0, 1.0) == pytest.approx(math.exp(0.5), rel=1e-15)


def test_wick_exp_series_spec_point():
    # series oracle at the documented point, 30 terms reach 1e-9
    series = math.fsum(hermite(k, 0.7, 0.3) / math.factorial(k) for k in range(31))
    assert series == pytest.approx(math.exp(-0.05), abs=1e-9)
    assert wick_exp(0.3, 0.7) == pytest.approx(math.exp(-0.05), rel=1e-15)


def test_wick_exp_series_over_box(rng):
    # 30 terms only reach ~2e-8 near var = 4 (truncation, not roundoff);
    # 40 terms reach 1e-9 everywhere on |x|, var <= 4
    for _ in range(60):
        x = rng.uniform(-4.0, 4.0)
        var = rng.uniform(0.0, 4.0)
        s30 = math.fsum(hermite(k, var, x) / math.factorial(k) for k in range(31))
        s40 = math.fsum(hermite(k, var, x) / math.factorial(k) for k in range(41))
        assert abs(s30 - wick_exp(x, var)) < 5e-8
        assert abs(s40 - wick_exp(x, var)) < 1e-9


def _ctx(points, values, n=None):
    gv = build_gaussian_vector(points, n=n)
    return WickValueContext(gv, tuple(values))


def test_monomial_single_slot_is_hermite(rng):
    for _ in range(20):
        t = rng.uniform(0.05, 1.0)
        k = int(rng.integers(0, 7))
        w = rng.standard_normal() * math.sqrt(t)
        got = wick_monomial_value(_ctx([(t, "W")], [w]), (k,))
        assert got == pytest.approx(hermite(k, t, w), rel=1e-12, abs=1e-12)


def test_monomial_examples():
    # single slot W_1, exponent 2: h2 with unit variance
    assert wick_monomial_value(_ctx([(1.0, "W")], [1.7]), (2,)) == pytest.approx(1.7 ** 2 - 1)
    # one recursion step: (W_s, W_t) with exponents (1, 1)
    a, b = 0.4, -1.1
    got = wick_monomial_value(_ctx([(0.3, "W"), (0.8, "W")], [a, b]), (1, 1))
    assert got == pytest.approx(a * b - 0.3, rel=1e-14)
    # zero-variance slot kills the monomial
    assert wick_monomial_value(_ctx([(0.0, "W")], [0.0]), (3,)) == 0.0


def test_monomial_capacity():
    with pytest.raises(CapacityError):
        wick_monomial_value(_ctx([(1.0, "W")], [0.0]), (65,))


def test_monomial_vectorized_values():
    gv = build_gaussian_vector([(0.5, "W"), (0.75, "W")])
    xs = np.array([0.1, -0.4, 2.0])
    ys = np.array([0.0, 1.0, -1.5])
    got = wick_monomial_value(WickValueContext(gv, (xs, ys)), (1, 1))
    np.testing.assert_allclose(got, xs * ys - 0.5, rtol=1e-14)


def test_monomial_matches_generating_function(rng):
    # independent oracle: multivariate Taylor coefficients of
    # exp(sum a_i x_i - 0.5 a' C a), times prod l_i!
    from collections import defaultdict

    def oracle(cov, values, mi):
        m = len(mi)
        linear = defaultdict(float)
        for i in range(m):
            e = [0] * m
            e[i] = 1
            linear[tuple(e)] += values[i]
            for j in range(m):
                e2 = [0] * m
                e2[i] += 1
                e2[j] += 1
                linear[tuple(e2)] -= 0.5 * cov[i][j]
        maxdeg = sum(mi)
        series = defaultdict(float)
        series[tuple([0] * m)] = 1.0
        power = dict(series)
        for k in range(1, maxdeg + 1):
            nxt = defaultdict(float)
            for e1, c1 in power.items():
                for e2, c2 in linear.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    if sum(e) <= maxdeg:
                        nxt[e] += c1 * c2
            power = nxt
            for e, c in power.items():
                series[e] += c / math.factorial(k)
        out = series[tuple(mi)]
        for l in mi:
            out *= math.factorial(l)
        return out

    for _ in range(30):
        m = int(rng.integers(1, 4))
        times = np.sort(rng.uniform(0.05, 1.0, m))
        gv = build_gaussian_vector([(t, "W") for t in times])
        mi = tuple(int(v) for v in rng.integers(0, 4, m))
        vals = rng.standard_normal(m)
        got = wick_monomial_value(WickValueContext(gv, tuple(vals)), mi)
        want = oracle(gv.cov, vals, mi)
        assert got == pytest.approx(want, rel=1e-10, abs=1e-10)


def test_contracted_evaluation_matches_recursion(rng):
    for _ in range(30):
        m = int(rng.integers(1, 4))
        times = np.sort(rng.uniform(0.05, 1.0, m))
        gv = build_gaussian_vector([(t, "W") for t in times])
        mi = tuple(int(v) for v in rng.integers(0, 4, m))
        vals = rng.standard_normal(m)
        stacks = [hermite_stack(mi[i], gv.cov[i, i], np.asarray(vals[i])) for i in range(m)]
        pair_covs = {(i, j): gv.cov[i, j] for i in range(m) for j in range(i + 1, m)}
        got = float(wick_monomial_contracted(mi, stacks, pair_covs))
        want = wick_monomial_value(WickValueContext(gv, tuple(vals)), mi)
        assert got == pytest.approx(want, rel=1e-11, abs=1e-11)


def test_ryser_permanent_small():
    assert ryser_permanent(np.zeros((0, 0))) == 1.0
    assert ryser_permanent(np.array([[3.0]])) == 3.0
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert ryser_permanent(a) == pytest.approx(1 * 4 + 2 * 3)
    rng = np.random.default_rng(5)
    m = rng.standard_normal((5, 5))
    from itertools import permutations
    brute = sum(math.prod(m[i, p[i]] for i in range(5)) for p in permutations(range(5)))
    assert ryser_permanent(m) == pytest.approx(brute, rel=1e-12)


def test_wick_inner_examples():
    gv1 = build_gaussian_vector([(1.0, "W")])
    # permutation-sum oracle: E[(:W_1^2:)^2] = sum over S_2 of 1*1
    assert wick_inner((2,), (2,), gv1, gv1, np.array([[1.0]])) == pytest.approx(2.0)
    gvh = build_gaussian_vector([(0.5, "W")])
    assert wick_inner((2,), (2,), gv1, gvh, np.array([[0.5]])) == pytest.approx(0.5)
    assert wick_inner((1,), (2,), gv1, gv1, np.array([[1.0]])) == 0.0
    with pytest.raises(CapacityError):
        wick_inner((13,), (13,), gv1, gv1, np.array([[1.0]]))


def test_paired_moment_matches_permanent(rng):
    for _ in range(30):
        m1, m2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        t1 = np.sort(rng.uniform(0.05, 1.0, m1))
        t2 = np.sort(rng.uniform(0.05, 1.0, m2))
        gv1 = build_gaussian_vector([(t, "W") for t in t1])
        gv2 = build_gaussian_vector([(t, "W") for t in t2])
        mi1 = tuple(int(v) for v in rng.integers(0, 4, m1))
        mi2 = tuple(int(v) for v in rng.integers(0, 4, m2))
        cross = np.minimum.outer(t1, t2)
        want = wick_inner(mi1, mi2, gv1, gv2, cross)
        got = paired_moment(mi1, mi2, [[cross[i, j] for j in range(m2)] for i in range(m1)])
        assert float(got) == pytest.approx(want, rel=1e-11, abs=1e-12)


def test_wick_upper_bound_examples():
    gv1 = build_gaussian_vector([(1.0, "W")])
    assert wick_upper_bound((2,), gv1) == 2.0
    assert wick_upper_bound((0,), gv1) == 1.0
    gv2 = build_gaussian_vector([(1.0, "W"), (1.0, "W")])
    assert wick_upper_bound((1, 1), gv2) == 2.0
    assert wick_upper_bound((0, 0), gv2) == 1.0


def test_monte_carlo_second_moments_match_inner(rng):
    # sample-mean of monomial products over 1e5 draws vs the permanent
    times = (0.3, 0.8)
    gv = build_gaussian_vector([(t, "W") for t in times])
    chol = np.linalg.cholesky(gv.cov)
    draws = rng.standard_normal((100_000, 2)) @ chol.T
    xs, ys = draws[:, 0], draws[:, 1]
    for mi1, mi2 in (((1, 1), (1, 1)), ((2, 0), (2, 0)), ((2, 1), (1, 2)), ((2, 0), (0, 2))):
        v1 = wick_monomial_value(WickValueContext(gv, (xs, ys)), mi1)
        v2 = wick_monomial_value(WickValueContext(gv, (xs, ys)), mi2)
        product = np.asarray(v1) * np.asarray(v2)
        exact = wick_inner(mi1, mi2, gv, gv, gv.cov)
        se = np.std(product, ddof=1) / math.sqrt(product.size)
        assert abs(np.mean(product) - exact) <= 5 * se
        # centered monomials: mean zero for positive degree
        if sum(mi1) >= 1:
            se1 = np.std(np.asarray(v1), ddof=1) / math.sqrt(product.size)
            assert abs(np.mean(np.asarray(v1))) <= 5 * se1


def test_wick_exp_product_functional_equation(rng):
    # E[exp^w(W_s) exp^w(W_t)] = exp(min(s, t)), via indicator test functions
    s, t = 0.35, 0.6
    gv = build_gaussian_vector([(s, "W"), (t, "W")])
    chol = np.linalg.cholesky(gv.cov)
    draws = rng.standard_normal((100_000, 2)) @ chol.T
    product = wick_exp(draws[:, 0], s) * wick_exp(draws[:, 1], t)
    se = np.std(product, ddof=1) / math.sqrt(product.size)
    assert abs(np.mean(product) - math.exp(min(s, t))) <= 5 * se


def test_permutation_invariance(rng):
    times = (0.2, 0.5, 0.9)
    gv = build_gaussian_vector([(t, "W") for t in times])
    vals = tuple(rng.standard_normal(3))
    mi = (2, 1, 1)
    base = wick_monomial_value(WickValueContext(gv, vals), mi)
    inner = wick_inner(mi, mi, gv, gv, gv.cov)
    for perm in ((1, 0, 2), (2, 1, 0), (1, 2, 0)):
        gv_p = build_gaussian_vector([(times[p], "W") for p in perm])
        vals_p = tuple(vals[p] for p in perm)
        mi_p = tuple(mi[p] for p in perm)
        assert wick_monomial_value(WickValueContext(gv_p, vals_p), mi_p) == pytest.approx(base, rel=1e-12)
        assert wick_inner(mi_p, mi_p, gv_p, gv_p, gv_p.cov) == pytest.approx(inner, rel=1e-12)
