"""Self-contained invariant suite behind the ``validate`` command.

Each group re-derives a family of exact identities through an independent
route (closed forms vs. quadrature, recursions vs. permanents, closed-form
conditional expectations vs. nested resampling) and reports pass/fail.
Kernel functions are resolved through the module at call time so test
harnesses can inject corruption and watch the right group fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gaussian, quadrature
from .chaos import (
    ChaosExpansion,
    ChaosTerm,
    PolyCoefficient,
    StepFunction,
    apply_dx,
    apply_L,
    expansion_value,
    s_transform_identity_rhs,
    s_transform_of_integral,
)
from .experiment import nested_mc_study, sample_path
from .integrator import EvaluationPlan, fine_grid, pathwise_time_integral, skorohod_pathwise
from .problems import linear_drift
from .wick import hermite, wick_exp, wick_inner, wick_monomial_value, WickValueContext


@dataclass(frozen=True)
class CheckResult:
    group: str
    passed: bool
    detail: str


def _check_gaussian(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 9))
        s, t = rng.uniform(0.0, 1.0, 2)
        lin = gaussian.cov_lin(s, t, n)
        bb = gaussian.cov_bridge_bridge(s, t, n)
        worst = max(worst, abs(gaussian.cov_brownian(s, t) - lin - bb))
        if lin > min(s, t) + 1e-12 or gaussian.cov_bridge_bridge(s, s, n) > 0.25 / n + 1e-12:
            return CheckResult("gaussian", False, "kernel bound violated")
    for n in (1, 2, 5):
        for i in (1, n):
            s, sp, w = quadrature.triangle_nodes((i - 1) / n, i / n, 12)
            quad = 2.0 * float(w @ gaussian.cov_bridge_bridge(s, sp, n))
            closed = gaussian.bridge_double_integral(i, i, n)
            if abs(quad - closed) > 1e-8 * max(closed, 1e-12):
                return CheckResult("gaussian", False,
                                   f"cell integral mismatch at n={n}: {quad} vs {closed}")
    ok = worst < 1e-12
    return CheckResult("gaussian", ok, f"max decomposition residual {worst:.2e}")


def _check_wick(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    if abs(hermite(2, 1.0, 0.0) + 1.0) > 1e-14 or abs(hermite(3, 0.5, 1.0) + 0.5) > 1e-14:
        return CheckResult("wick", False, "Hermite recurrence broken")
    for _ in range(50):
        x = rng.uniform(-4.0, 4.0)
        var = rng.uniform(0.0, 4.0)
        # 40 terms reach 1e-9 on the whole box; 30 stall near 2e-8 at var ~ 4
        series = math.fsum(hermite(k, var, x) / math.factorial(k) for k in range(41))
        if abs(series - wick_exp(x, var)) > 1e-9:
            return CheckResult("wick", False, f"Hermite series gap at x={x}, var={var}")
    # monomial value vs permanent second moment, Monte Carlo
    gv = gaussian.build_gaussian_vector([(0.3, "W"), (0.8, "W")])
    chol = np.linalg.cholesky(gv.cov)
    draws = rng.standard_normal((200_000, 2)) @ chol.T
    for mi in ((1, 1), (2, 0), (2, 1)):
        vals = np.array([
            wick_monomial_value(WickValueContext(gv, tuple(row)), mi) for row in draws[:20_000]
        ])
        exact = wick_inner(mi, mi, gv, gv, gv.cov)
        se = np.std(vals ** 2, ddof=1) / math.sqrt(vals.size)
        if abs(np.mean(vals ** 2) - exact) > 5 * se + 1e-12:
            return CheckResult("wick", False, f"second moment off for exponents {mi}")
    return CheckResult("wick", True, "Hermite, series, and permanent moments agree")


def _random_expansion(rng: np.random.Generator, max_degree: int = 4) -> ChaosExpansion:
    taus = (round(float(rng.uniform(0.2, 0.9)), 3),)
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        l1 = int(rng.integers(0, max_degree))
        l2 = int(rng.integers(0, max_degree - l1 + 1))
        coeffs = tuple(rng.uniform(-1.0, 1.0, int(rng.integers(1, 4))))
        terms.append(ChaosTerm(PolyCoefficient(coeffs), (l1, l2)))
    return ChaosExpansion(taus, tuple(terms))


def _check_s_transform(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(5):
        u = _random_expansion(rng)
        g = StepFunction(
            breaks=tuple(sorted(rng.uniform(0.1, 0.9, 2))),
            levels=tuple(rng.uniform(-2.0, 2.0, 3)),
        )
        lhs = s_transform_of_integral(u, g)
        rhs = s_transform_identity_rhs(u, g)
        worst = max(worst, abs(lhs - rhs))
    return CheckResult("s_transform", worst < 1e-9, f"max identity residual {worst:.2e}")


def _check_ito(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    plan = EvaluationPlan(fine_factor=64)
    worst = 0.0
    for _ in range(3):
        u = _random_expansion(rng)
        grid = fine_grid(4, u.taus, plan)
        integrand, drift = apply_dx(u, 1), apply_L(u)
        for _ in range(4):
            path = sample_path(grid, rng)
            w_tau = [float(path.values[np.searchsorted(grid, t)]) for t in u.taus]
            lhs = expansion_value(u, 1.0, float(path.values[-1]), w_tau)
            lhs -= expansion_value(u, 0.0, 0.0, w_tau)
            rhs = skorohod_pathwise(integrand, path, plan)
            rhs += pathwise_time_integral(drift, path, plan)
            worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    tol = 50.0 / (4 * plan.fine_factor) ** 2
    return CheckResult("ito", worst < tol, f"max relative residual {worst:.2e} (tol {tol:.2e})")


def _check_nested_mc(seed: int) -> CheckResult:
    res = nested_mc_study(linear_drift(), n=2, outer_paths=40, inner_paths=2000,
                          seed=seed, plan=EvaluationPlan(fine_factor=16))
    ok = abs(res.zscore) < 5.0
    return CheckResult("nested_mc", ok,
                       f"rms gap {res.rms_gap:.3e} vs inner noise {res.expected_rms:.3e} "
                       f"(z={res.zscore:.2f})")


def _check_exactness(seed: int) -> CheckResult:
    plan = EvaluationPlan(fine_factor=16)
    one = ChaosExpansion((), (ChaosTerm(PolyCoefficient((1.0,)), (0,)),))
    lin = ChaosExpansion((), (ChaosTerm(PolyCoefficient((1.0,)), (1,)),))
    terminal = ChaosExpansion((1.0,), (ChaosTerm(PolyCoefficient((1.0,)), (0, 1)),))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(5):
        # constant coefficients: boundary terms only, exact for any quadrature
        path = sample_path(fine_grid(4, (), plan), rng)
        w1 = float(path.values[-1])
        worst = max(worst, abs(skorohod_pathwise(one, path, plan) - w1))
        worst = max(worst, abs(skorohod_pathwise(lin, path, plan) - (w1 ** 2 - 1) / 2))
        tpath = sample_path(fine_grid(4, (1.0,), plan), rng)
        wt1 = float(tpath.values[-1])
        worst = max(worst, abs(skorohod_pathwise(terminal, tpath, plan) - (wt1 ** 2 - 1)))
    return CheckResult("integrator", worst < 1e-12, f"max closed-form residual {worst:.2e}")


GROUPS = (
    ("gaussian", _check_gaussian),
    ("wick", _check_wick),
    ("s_transform", _check_s_transform),
    ("ito", _check_ito),
    ("integrator", _check_exactness),
    ("nested_mc", _check_nested_mc),
)


def run_validation(seed: int = 20240701) -> list[CheckResult]:
    return [fn(seed) for _, fn in GROUPS]
