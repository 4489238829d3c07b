import math

import numpy as np
import pytest

from skorohod import (
    ChaosExpansion,
    ChaosTerm,
    EvaluationPlan,
    PolyCoefficient,
    RateStudyConfig,
    UnsupportedError,
    analytic_fn2,
    builtin_expansion,
    constant_C,
    drift_l2_integral,
    fine_grid,
    linear_drift,
    mc_error,
    nested_mc_oracle,
    nested_mc_study,
    path_rng,
    rate_study,
    sample_path,
    sine,
    square,
    tau_linear,
    wick_square_terminal,
)

FAST = EvaluationPlan(fine_factor=16)


def test_sample_path_statistics():
    grid = fine_grid(2, (), EvaluationPlan(fine_factor=8))
    rng = np.random.default_rng(314)
    paths = 100_000
    steps = rng.standard_normal((paths, grid.size - 1)) * np.sqrt(np.diff(grid))
    w = np.concatenate([np.zeros((paths, 1)), np.cumsum(steps, axis=1)], axis=1)
    w1 = w[:, -1]
    se = np.std(w1 ** 2, ddof=1) / math.sqrt(paths)
    assert abs(np.mean(w1 ** 2) - 1.0) <= 5 * se
    a = w[:, np.searchsorted(grid, 0.25)]
    b = w[:, np.searchsorted(grid, 0.75)]
    se_ab = np.std(a * b, ddof=1) / math.sqrt(paths)
    assert abs(np.mean(a * b) - 0.25) <= 5 * se_ab


def test_sample_path_deterministic_streams():
    grid = fine_grid(2, (), FAST)
    p1 = sample_path(grid, path_rng(77, 5))
    p2 = sample_path(grid, path_rng(77, 5))
    np.testing.assert_array_equal(p1.values, p2.values)
    p3 = sample_path(grid, path_rng(77, 6))
    assert not np.array_equal(p1.values, p3.values)
    # the batched sampler used by mc_error draws the very same streams
    from skorohod.experiment import _sample_chunk
    chunk = _sample_chunk(grid, 77, 4, 7)
    np.testing.assert_array_equal(chunk[1], p1.values)


def test_constant_C_examples():
    assert constant_C(square()) == pytest.approx(1 / math.sqrt(12), abs=1e-12)
    assert constant_C(wick_square_terminal()) == 0.0
    assert constant_C(tau_linear(0.5)) == pytest.approx(math.sqrt(1 / 24), abs=1e-12)
    # order refinement self-check: doubling the rule changes nothing material
    for u in (square(), tau_linear(), sine((0.5,), 7)):
        a = drift_l2_integral(u, order=8, subdiv=4)
        b = drift_l2_integral(u, order=16, subdiv=8)
        assert abs(a - b) < 1e-10


def test_analytic_fn2_examples():
    for n in (1, 2, 4, 16):
        assert analytic_fn2(linear_drift(), n) == pytest.approx(1 / (12 * n * n), abs=1e-14)
    assert analytic_fn2(wick_square_terminal(), 4) == 0.0
    assert analytic_fn2(square(), 4) == pytest.approx(1 / 192, abs=1e-14)
    with pytest.raises(UnsupportedError):
        analytic_fn2(tau_linear(0.3), 2)


def test_mc_error_examples():
    e, se = mc_error(linear_drift(), 4, 20_000, 20240701, FAST)
    assert abs(e - 1 / (math.sqrt(12) * 4)) <= 5 * se
    e0, se0 = mc_error(wick_square_terminal(), 4, 500, 1, FAST)
    assert e0 <= 1e-12 and se0 <= 1e-12
    zero = ChaosExpansion((), ())
    ez, _ = mc_error(zero, 4, 500, 1, FAST)
    assert ez == 0.0


def test_mc_error_reproducible_across_workers_and_chunks():
    u = square()
    base = mc_error(u, 4, 3_000, 99, FAST)
    assert mc_error(u, 4, 3_000, 99, FAST, workers=3) == base
    assert mc_error(u, 4, 3_000, 99, FAST, chunk_size=123) == base


def test_consistency_chain_vs_analytic():
    # |e_hat^2 - f_n^2| <= 5 SE(e^2) + c n^{-5/2}; c = 0.05 covers the exact
    # remainder of the bundled cases (s W_s has remainder n^-3 / 60)
    u = ChaosExpansion((), (ChaosTerm(PolyCoefficient((0.0, 1.0)), (1,)),))  # s * W_s
    for n in (4, 8):
        e, se = mc_error(u, n, 40_000, 31337, EvaluationPlan(fine_factor=32))
        se_sq = 2 * e * se
        assert abs(e * e - analytic_fn2(u, n)) <= 5 * se_sq + 0.05 * n ** -2.5


def test_monotone_information():
    u = square()
    e4, se4 = mc_error(u, 4, 20_000, 5, FAST)
    e8, se8 = mc_error(u, 8, 20_000, 5, FAST)
    assert e8 <= e4 + 5 * math.hypot(se4, se8)


def test_fine_factor_bias_study():
    # refining the pathwise quadrature moves e_n only within Monte Carlo noise
    u = square()
    results = {
        r: mc_error(u, 4, 20_000, 606, EvaluationPlan(fine_factor=r))
        for r in (16, 64, 256)
    }
    (e16, s16), (e64, s64), (e256, s256) = results[16], results[64], results[256]
    assert abs(e16 - e64) <= 5 * math.hypot(s16, s64)
    assert abs(e64 - e256) <= 5 * math.hypot(s64, s256)


def test_simpson_quadrature_option():
    u = square()
    e_t, se_t = mc_error(u, 4, 10_000, 13, EvaluationPlan(fine_factor=16))
    e_s, se_s = mc_error(u, 4, 10_000, 13, EvaluationPlan(fine_factor=16, quadrature="simpson"))
    assert abs(e_t - e_s) <= 5 * math.hypot(se_t, se_s)


def test_constant_matches_fn2_limit():
    # sqrt(12) n f_n -> sqrt(12) C with relative gap <= 2% at n = 64
    for name in ("square", "linear_drift", "tau_linear", "sine"):
        u = builtin_expansion(name)
        c = constant_C(u)
        fn = math.sqrt(analytic_fn2(u, 64))
        if c == 0.0:
            assert fn == 0.0
        else:
            assert abs(64 * fn - c) / c <= 0.02
    assert analytic_fn2(wick_square_terminal(), 64) == 0.0


def test_nested_oracle_self_consistency():
    res = nested_mc_study(linear_drift(), n=2, outer_paths=60, inner_paths=2_000,
                          seed=8, plan=FAST)
    assert abs(res.zscore) < 5.0
    assert res.rms_gap == pytest.approx(res.expected_rms, rel=0.5)


def test_nested_oracle_inner_scaling():
    coarse = nested_mc_oracle(linear_drift(), 2, 40, 4, seed=21, plan=FAST)
    fine = nested_mc_oracle(linear_drift(), 2, 40, 400, seed=21, plan=FAST)
    # inner-mean noise shrinks like 1/sqrt(inner): factor 10 within MC slack
    assert coarse / fine == pytest.approx(10.0, rel=0.5)


def test_nested_oracle_exact_case():
    res = nested_mc_study(wick_square_terminal(), n=2, outer_paths=20,
                          inner_paths=500, seed=4, plan=FAST)
    # integrand is observation-measurable: every inner path reproduces it
    assert res.rms_gap <= 1e-12


def test_rate_study_linear_drift():
    cfg = RateStudyConfig(u=linear_drift(), n_list=(2, 4, 8), paths=20_000,
                          seed=424242, plan=FAST)
    report = rate_study(cfg)
    assert report.c_analytic == pytest.approx(1 / math.sqrt(12), abs=1e-12)
    for row in report.rows:
        assert abs(row.n_e_hat - 1 / math.sqrt(12)) <= 3 * row.n * row.stderr
        assert row.f_n_analytic == pytest.approx(1 / (math.sqrt(12) * row.n), abs=1e-14)
    assert -1.1 <= report.slope <= -0.9


def test_rate_study_exact_case_skips_slope():
    cfg = RateStudyConfig(u=wick_square_terminal(), n_list=(2, 4), paths=200,
                          seed=7, plan=FAST)
    report = rate_study(cfg)
    assert report.slope is None
    assert all(row.e_hat <= 1e-10 for row in report.rows)


def test_rate_study_config_validation():
    with pytest.raises(ValueError):
        RateStudyConfig(u=linear_drift(), n_list=(8, 4), paths=1000, seed=1)
    with pytest.raises(ValueError):
        RateStudyConfig(u=linear_drift(), n_list=(2, 4), paths=50, seed=1)
