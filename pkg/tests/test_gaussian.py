import numpy as np
import pytest

from skorohod import (
    ConsistencyError,
    GaussianVector,
    build_gaussian_vector,
    bridge_double_integral,
    cov_bridge_bridge,
    cov_bridge_lin,
    cov_bridge_w,
    cov_brownian,
    cov_lin,
    interp_kernel,
)
from skorohod.quadrature import triangle_nodes


def test_cov_brownian_values():
    assert cov_brownian(0.5, 0.75) == 0.5
    assert cov_brownian(0.0, 0.7) == 0.0
    assert cov_brownian(1.0, 1.0) == 1.0


def test_cov_brownian_domain():
    with pytest.raises(ValueError):
        cov_brownian(-0.1, 0.5)
    with pytest.raises(ValueError):
        cov_brownian(0.2, 1.5)


def test_cov_lin_values():
    # same cell, n = 1: 0 + 1 * 0.5 * 0.5
    assert cov_lin(0.5, 0.5, 1) == 0.25
    # distinct cells reduce to min
    assert cov_lin(0.25, 0.75, 2) == 0.25
    # exact at the knots
    for n in (1, 2, 3, 7):
        for i in range(n + 1):
            assert cov_lin(i / n, i / n, n) == pytest.approx(i / n, abs=1e-15)


def test_cov_bridge_values():
    assert cov_bridge_bridge(0.5, 0.5, 1) == 0.25  # 1/(4n) at the midpoint
    assert cov_bridge_bridge(0.25, 0.75, 2) == 0.0
    for n in (1, 2, 5):
        for i in range(n + 1):
            assert cov_bridge_bridge(i / n, 0.4, n) == pytest.approx(0.0, abs=1e-15)
    # bridge-vs-path cross covariance coincides with the bridge covariance
    assert cov_bridge_w(0.3, 0.4, 2) == cov_bridge_bridge(0.3, 0.4, 2)
    assert cov_bridge_lin(0.3, 0.4, 2) == 0.0


def test_kernel_inequalities_and_decomposition(rng):
    for _ in range(500):
        n = int(rng.integers(1, 12))
        s, t = rng.uniform(0.0, 1.0, 2)
        lin = cov_lin(s, t, n)
        assert lin <= min(s, t) + 1e-14
        total = lin + cov_bridge_bridge(s, t, n)
        assert abs(total - cov_brownian(s, t)) <= 1e-12
        assert cov_bridge_bridge(s, s, n) <= 0.25 / n + 1e-14


def test_bridge_variance_peak_at_midpoints():
    for n in (1, 2, 4, 9):
        for i in range(n):
            mid = (i + 0.5) / n
            assert cov_bridge_bridge(mid, mid, n) == pytest.approx(0.25 / n, abs=1e-15)


def test_bridge_double_integral_closed_form():
    assert bridge_double_integral(1, 1, 1) == pytest.approx(1.0 / 12.0, rel=1e-15)
    assert bridge_double_integral(1, 2, 2) == 0.0
    assert bridge_double_integral(3, 3, 4) == pytest.approx(1.0 / 768.0, rel=1e-15)
    with pytest.raises(ValueError):
        bridge_double_integral(0, 1, 4)
    with pytest.raises(ValueError):
        bridge_double_integral(1, 5, 4)


@pytest.mark.parametrize("n,i", [(1, 1), (2, 2), (4, 3), (7, 5)])
def test_bridge_double_integral_vs_quadrature(n, i):
    # independent oracle: numeric double quadrature of the bridge kernel
    s, sp, w = triangle_nodes((i - 1) / n, i / n, 12)
    quad = 2.0 * float(w @ cov_bridge_bridge(s, sp, n))
    closed = bridge_double_integral(i, i, n)
    assert quad == pytest.approx(closed, rel=1e-8)


def test_interp_kernel_matches_equidistant():
    for n in (1, 2, 5):
        kernel = interp_kernel([i / n for i in range(n + 1)])
        rng = np.random.default_rng(n)
        s = rng.uniform(0, 1, 50)
        t = rng.uniform(0, 1, 50)
        np.testing.assert_allclose(kernel(s, t), cov_lin(s, t, n), atol=1e-14)


def test_build_gaussian_vector_examples():
    gv = build_gaussian_vector([(0.5, "W"), (0.5, "Wlin")], n=1)
    np.testing.assert_allclose(gv.cov, [[0.5, 0.25], [0.25, 0.25]], atol=1e-15)

    gv0 = build_gaussian_vector([(0.0, "W")])
    np.testing.assert_allclose(gv0.cov, [[0.0]], atol=0)

    gvb = build_gaussian_vector([(0.5, "W"), (0.5, "Bridge")], n=1)
    np.testing.assert_allclose(gvb.cov, [[0.5, 0.25], [0.25, 0.25]], atol=1e-15)


def test_build_gaussian_vector_requires_n():
    with pytest.raises(ValueError):
        build_gaussian_vector([(0.5, "Wlin")])
    with pytest.raises(ValueError):
        build_gaussian_vector([(0.5, "Nope")], n=2)


def test_gaussian_vector_psd_validation():
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues -1, 3
    with pytest.raises(ConsistencyError):
        GaussianVector(times=(0.3, 0.6), families=("W", "W"), cov=bad)


def test_empirical_covariance_matches_kernels():
    # 1e5 sampled paths on a coarse grid; each kernel entry within 5 SE
    n = 2
    rng = np.random.default_rng(987)
    times = np.array([0.2, 0.5, 0.8])
    paths = 100_000
    grid = np.linspace(0.0, 1.0, 41)
    steps = rng.standard_normal((paths, grid.size - 1)) * np.sqrt(np.diff(grid))
    w = np.concatenate([np.zeros((paths, 1)), np.cumsum(steps, axis=1)], axis=1)
    idx = np.searchsorted(grid, times)
    knots = np.searchsorted(grid, np.array([0.0, 0.5, 1.0]))
    wt = w[:, idx]
    # interpolation on the n = 2 knots and the residual bridge
    kv = w[:, knots]
    wlin = np.empty_like(wt)
    for col, t in enumerate(times):
        cell = 0 if t <= 0.5 else 1
        left, right = (0.0, 0.5) if cell == 0 else (0.5, 1.0)
        lam = (t - left) / (right - left)
        wlin[:, col] = kv[:, cell] * (1 - lam) + kv[:, cell + 1] * lam
    bridge = wt - wlin
    checks = []
    for a in range(3):
        for b in range(3):
            checks.append((wt[:, a] * wt[:, b], cov_brownian(times[a], times[b])))
            checks.append((wlin[:, a] * wlin[:, b], cov_lin(times[a], times[b], n)))
            checks.append((bridge[:, a] * bridge[:, b], cov_bridge_bridge(times[a], times[b], n)))
            checks.append((bridge[:, a] * wlin[:, b], 0.0))
    for product, expected in checks:
        se = np.std(product, ddof=1) / np.sqrt(paths)
        assert abs(np.mean(product) - expected) <= 5 * se + 1e-12
