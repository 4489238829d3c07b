"""Monte Carlo drivers and analytic error formulas.

The central quantity is the root-mean-square gap e_n between the Skorohod
integral of an integrand and its conditional expectation given n equidistant
path observations (plus the frozen times).  Three independent routes are
provided:

* ``mc_error``: direct simulation with reproducible per-path RNG streams;
* ``analytic_fn2``: the exact leading mean-squared error, a sum of per-cell
  double integrals of the bridge covariance against drift second moments;
* ``constant_C``: the limit constant, n * e_n -> C with
  C = sqrt(int_0^1 E[(L u)_s^2] ds / 12).

``nested_mc_oracle`` additionally checks the closed-form conditional
expectation against brute-force inner resampling of bridge-conditioned paths.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .chaos import ChaosExpansion, apply_dx, apply_L, cross_moment
from .errors import UnsupportedError
from .gaussian import cov_bridge_bridge
from .integrator import (
    BrownianPath,
    EvaluationPlan,
    GridWork,
    batch_conditional,
    batch_skorohod,
    fine_grid,
    grid_work,
)

#: Gauss-Legendre order for analytic time integrals (piecewise smooth)
GL_ORDER = 8
#: subdivisions per smooth segment, harmless headroom beyond exactness
GL_SUBDIV = 4


def sample_path(grid, rng: np.random.Generator) -> BrownianPath:
    """Independent Gaussian increments with variance equal to the spacing."""
    grid = np.asarray(grid, dtype=float)
    steps = rng.standard_normal(grid.size - 1) * np.sqrt(np.diff(grid))
    values = np.concatenate(([0.0], np.cumsum(steps)))
    return BrownianPath(grid, values)


def path_rng(seed: int, index: int) -> np.random.Generator:
    """The dedicated stream of one path: derived from (seed, path index).

    Worker counts and chunk sizes therefore cannot change any sampled value.
    """
    if seed < 0 or index < 0:
        raise ValueError("seed and path index must be non-negative")
    return np.random.default_rng([seed, index])


def _sample_chunk(grid: np.ndarray, seed: int, lo: int, hi: int) -> np.ndarray:
    sqdt = np.sqrt(np.diff(grid))
    out = np.empty((hi - lo, grid.size))
    out[:, 0] = 0.0
    for row, index in enumerate(range(lo, hi)):
        steps = path_rng(seed, index).standard_normal(grid.size - 1) * sqdt
        np.cumsum(steps, out=out[row, 1:])
    return out


def _chunk_bounds(total: int, size: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def _default_chunk(grid_size: int) -> int:
    return int(np.clip(4_000_000 // max(grid_size, 1), 64, 8192))


def mc_error(u: ChaosExpansion, n: int, paths: int, seed: int,
             plan: EvaluationPlan = EvaluationPlan(), workers: int = 1,
             chunk_size: int | None = None) -> tuple[float, float]:
    """Monte Carlo estimate of e_n with its delta-method standard error.

    Deterministic for fixed (seed, paths): per-path streams plus a fixed-order
    reduction make the result bit-identical for any worker count.
    """
    grid = fine_grid(n, u.taus, plan)
    work = grid_work(grid, n, u.taus, plan)
    sq = np.empty(paths)
    chunk = chunk_size or _default_chunk(grid.size)

    def run(bounds: tuple[int, int]):
        lo, hi = bounds
        values = _sample_chunk(grid, seed, lo, hi)
        gap = batch_skorohod(u, work, values) - batch_conditional(u, work, values)
        sq[lo:hi] = gap * gap

    bounds = _chunk_bounds(paths, chunk)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, bounds))
    else:
        for b in bounds:
            run(b)
    mean_sq = float(np.sum(sq)) / paths
    e_hat = math.sqrt(mean_sq)
    if paths > 1:
        se_mean = float(np.std(sq, ddof=1)) / math.sqrt(paths)
    else:
        se_mean = 0.0
    stderr = se_mean / (2.0 * e_hat) if e_hat > 0 else se_mean
    return e_hat, stderr


def drift_l2_integral(u: ChaosExpansion, order: int = GL_ORDER,
                      subdiv: int = GL_SUBDIV) -> float:
    """int_0^1 E[(L u)_s^2] ds by composite Gauss-Legendre split at kinks."""
    lu = apply_L(u)
    if lu.is_zero():
        return 0.0
    breaks = set(lu.taus) | set(lu.coefficient_breakpoints())
    return quadrature.integrate(
        lambda s: cross_moment(lu, lu, s, s), breaks, order=order, subdiv=subdiv
    )


def constant_C(u: ChaosExpansion, order: int = GL_ORDER, subdiv: int = GL_SUBDIV) -> float:
    """Limit constant of n * e_n: sqrt(int E[(L u)_s^2] ds / 12)."""
    return math.sqrt(drift_l2_integral(u, order, subdiv) / 12.0)


def _require_on_grid(taus, n: int):
    for t in taus:
        if abs(t * n - round(t * n)) > 1e-9:
            raise UnsupportedError(
                f"frozen time {t} is not on the coarse grid with n={n}; "
                "the exact error formula requires on-grid frozen times"
            )


def analytic_fn2(u: ChaosExpansion, n: int, order: int = 10) -> float:
    """Exact leading mean-squared error at resolution n (on-grid frozen times).

    Two per-cell double integrals against the bridge covariance k_B:

        X1 = sum_cells  iint k_B(s,s')   E[(L u)_s (L u)_s'] ds ds'
        X2 = sum_cells  iint k_B(s,s')^2 E[(d/dx_1 L u)_s (d/dx_1 L u)_s'] ds ds'

    X2 carries the only surviving bridge-against-slot pairings; pairings with
    frozen slots vanish because the bridge is zero at grid knots.  For terms
    whose dynamic exponent is zero this equals the squared error exactly; in
    general the remainder is O(n^-3).
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    _require_on_grid(u.taus, n)
    lu = apply_L(u)
    if lu.is_zero():
        return 0.0
    dlu = apply_dx(lu, 1)
    s_all, sp_all, w_all = [], [], []
    for i in range(n):
        s, sp, w = quadrature.triangle_nodes(i / n, (i + 1) / n, order)
        s_all.append(s)
        sp_all.append(sp)
        w_all.append(w)
    s = np.concatenate(s_all)
    sp = np.concatenate(sp_all)
    w = np.concatenate(w_all)
    kb = cov_bridge_bridge(s, sp, n)
    # symmetric integrands: the square integral is twice the lower triangle
    x1 = 2.0 * float(w @ (kb * cross_moment(lu, lu, s, sp)))
    if dlu.is_zero():
        return x1
    x2 = 2.0 * float(w @ (kb ** 2 * cross_moment(dlu, dlu, s, sp)))
    return x1 + x2


@dataclass(frozen=True)
class RateStudyConfig:
    u: ChaosExpansion
    n_list: tuple[int, ...]
    paths: int
    seed: int
    plan: EvaluationPlan = EvaluationPlan()

    def __post_init__(self):
        n_list = tuple(int(n) for n in self.n_list)
        if list(n_list) != sorted(n_list) or len(set(n_list)) != len(n_list):
            raise ValueError("n_list must be strictly increasing")
        if self.paths < 100:
            raise ValueError("need at least 100 paths per resolution")
        object.__setattr__(self, "n_list", n_list)


@dataclass(frozen=True)
class ErrorRow:
    n: int
    paths: int
    e_hat: float
    stderr: float
    n_e_hat: float
    f_n_analytic: float
    slope_running: float


@dataclass(frozen=True)
class ErrorReport:
    rows: tuple[ErrorRow, ...]
    c_analytic: float
    slope: float | None

    def n_e_hat(self, n: int) -> float:
        for row in self.rows:
            if row.n == n:
                return row.n_e_hat
        raise KeyError(f"no row for n={n}")


def fit_slope(n_values, e_values) -> float | None:
    """Least-squares slope of log e against log n; None if any error vanishes."""
    n_values = np.asarray(n_values, dtype=float)
    e_values = np.asarray(e_values, dtype=float)
    if n_values.size < 2 or np.any(e_values <= 1e-12):
        return None
    return float(np.polyfit(np.log(n_values), np.log(e_values), 1)[0])


def rate_study(cfg: RateStudyConfig, workers: int = 1) -> ErrorReport:
    """Run mc_error over the configured resolutions and fit the decay rate."""
    c = constant_C(cfg.u)
    rows = []
    seen_n, seen_e = [], []
    for n in cfg.n_list:
        e_hat, stderr = mc_error(cfg.u, n, cfg.paths, cfg.seed, cfg.plan, workers)
        try:
            fn = math.sqrt(analytic_fn2(cfg.u, n))
        except UnsupportedError:
            fn = math.nan
        seen_n.append(n)
        seen_e.append(e_hat)
        running = fit_slope(seen_n, seen_e)
        rows.append(ErrorRow(
            n=n, paths=cfg.paths, e_hat=e_hat, stderr=stderr,
            n_e_hat=n * e_hat, f_n_analytic=fn,
            slope_running=math.nan if running is None else running,
        ))
    return ErrorReport(rows=tuple(rows), c_analytic=c,
                       slope=fit_slope(cfg.n_list, [r.e_hat for r in rows]))


# ---------------------------------------------------------------------------
# Nested Monte Carlo oracle for the conditional expectation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NestedOracleResult:
    gaps: np.ndarray = field(repr=False)
    inner_se: np.ndarray = field(repr=False)
    rms_gap: float
    expected_rms: float
    zscore: float


def _bridge_chunk(work: GridWork, knot_values: np.ndarray, rng: np.random.Generator,
                  count: int) -> np.ndarray:
    """Paths on the fine grid conditioned to hit the given knot values.

    Sequential within-cell conditioning: each node is Gaussian given the
    previous node and the right knot, which is an independent code path from
    the closed-form interpolation kernel it is used to check.
    """
    times = work.times
    out = np.empty((count, times.size))
    z = rng.standard_normal((count, times.size))
    knot_pos = {int(k): i for i, k in enumerate(work.knot_idx)}
    prev_value = np.zeros(count)
    prev_time = 0.0
    right_idx = 1
    for col, t in enumerate(times):
        pos = knot_pos.get(col)
        if pos is not None:
            out[:, col] = knot_values[pos]
            prev_value = out[:, col]
            prev_time = t
            right_idx = min(pos + 1, work.knot_times.size - 1)
            continue
        t_right = work.knot_times[right_idx]
        w_right = knot_values[right_idx]
        span = t_right - prev_time
        mean = prev_value + (t - prev_time) / span * (w_right - prev_value)
        var = (t - prev_time) * (t_right - t) / span
        out[:, col] = mean + np.sqrt(var) * z[:, col]
        prev_value = out[:, col]
        prev_time = t
    return out


def nested_mc_study(u: ChaosExpansion, n: int, outer_paths: int, inner_paths: int,
                    seed: int, plan: EvaluationPlan = EvaluationPlan()) -> NestedOracleResult:
    """Estimate E[I | observations] by inner resampling and compare it with
    the closed-form conditional value on each outer path.

    Small instances only: the cost is outer_paths * inner_paths full
    evaluations.  The z-score tests E[gap^2] against the inner-noise level.
    """
    grid = fine_grid(n, u.taus, plan)
    work = grid_work(grid, n, u.taus, plan)
    gaps = np.empty(outer_paths)
    inner_se = np.empty(outer_paths)
    for o in range(outer_paths):
        outer = _sample_chunk(grid, seed, o, o + 1)
        closed = float(batch_conditional(u, work, outer)[0])
        knot_values = outer[0, work.knot_idx]
        inner_rng = np.random.default_rng([seed, o, 1])
        inner = _bridge_chunk(work, knot_values, inner_rng, inner_paths)
        samples = batch_skorohod(u, work, inner)
        gaps[o] = float(np.mean(samples)) - closed
        inner_se[o] = float(np.std(samples, ddof=1)) / math.sqrt(inner_paths)
    rms_gap = float(np.sqrt(np.mean(gaps ** 2)))
    expected = float(np.sqrt(np.mean(inner_se ** 2)))
    diff = gaps ** 2 - inner_se ** 2
    spread = float(np.std(diff, ddof=1)) / math.sqrt(outer_paths)
    z = float(np.mean(diff)) / spread if spread > 0 else 0.0
    return NestedOracleResult(gaps=gaps, inner_se=inner_se, rms_gap=rms_gap,
                              expected_rms=expected, zscore=z)


def nested_mc_oracle(u: ChaosExpansion, n: int, outer_paths: int, inner_paths: int,
                     seed: int, plan: EvaluationPlan = EvaluationPlan()) -> float:
    """Root-mean-square gap between inner-resampled and closed-form
    conditional values; vanishes at the inner-sampling rate."""
    return nested_mc_study(u, n, outer_paths, inner_paths, seed, plan).rms_gap
