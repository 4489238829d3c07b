"""Covariance kernels on [0, 1] for Brownian motion, its piecewise-linear
interpolation on n equidistant knots, and the residual bridge.

With W the Brownian motion, W^lin its linear interpolation on the knots
{i/n} and B = W - W^lin the bridge, the closed forms are

    E[W_s W_t]       = min(s, t)
    E[W_s^lin W_t^lin] = E[W_s W_t^lin]
                     = min(s, t)                         if floor(ns) != floor(nt)
                     = c/n + n (t - c/n)(s - c/n)        if floor(ns) = floor(nt) = c
    E[B_s B_t]       = E[B_s W_t]
                     = (min(s,t) - c/n - n (s - c/n)(t - c/n)) 1{floor(ns)=floor(nt)=c}
    E[B_s W_t^lin]   = 0

Bridge variance is at most 1/(4n), attained at cell midpoints, and the
double integral of the bridge covariance over a cell squared is n^-3 / 12.

Cell assignment uses the plain floor: s = i/n lands in the cell starting at
i/n (so the bridge vanishes exactly at knots), and s = 1 uses floor = n,
where every formula above still evaluates exactly.  All kernels are
continuous across cell boundaries, pure, and vectorized over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError

#: tolerance on the smallest eigenvalue when validating covariance matrices
PSD_TOL = 1e-10

FAMILIES = ("W", "Wlin", "Bridge")


def _check_time(x, name: str = "time") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return arr


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"resolution n must be a positive integer, got {n!r}")
    return int(n)


def cov_brownian(s, t):
    """E[W_s W_t] = min(s, t)."""
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    out = np.minimum(s, t)
    return float(out) if out.ndim == 0 else out


def cov_lin(s, t, n: int):
    """Covariance of the linear interpolation, E[W_s^lin W_t^lin].

    Also equals the cross-covariance E[W_s W_t^lin].  Never exceeds min(s, t).
    """
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    n = _check_n(n)
    cs = np.floor(n * s)
    ct = np.floor(n * t)
    c = ct / n
    same = cs == ct
    out = np.where(same, c + n * (t - c) * (s - c), np.minimum(s, t))
    return float(out) if out.ndim == 0 else out


def cov_bridge_bridge(s, t, n: int):
    """Covariance of the bridge B = W - W^lin; zero across distinct cells."""
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    n = _check_n(n)
    cs = np.floor(n * s)
    ct = np.floor(n * t)
    c = ct / n
    same = cs == ct
    out = np.where(same, np.minimum(s, t) - c - n * (s - c) * (t - c), 0.0)
    return float(out) if out.ndim == 0 else out


def cov_bridge_w(s, t, n: int):
    """Cross-covariance E[B_s W_t]; identical to the bridge covariance."""
    return cov_bridge_bridge(s, t, n)


def cov_bridge_lin(s, t, n: int):
    """E[B_s W_t^lin] = 0: the bridge is orthogonal to the interpolation."""
    s = _check_time(s, "s")
    t = _check_time(t, "t")
    _check_n(n)
    out = np.zeros(np.broadcast(s, t).shape)
    return float(out) if out.ndim == 0 else out


def bridge_double_integral(i: int, j: int, n: int) -> float:
    """Integral of E[B_s B_t] over cell i times cell j: 1{i=j} n^-3 / 12.

    Cells are numbered 1..n, cell i covering [(i-1)/n, i/n].
    """
    n = _check_n(n)
    for name, k in (("i", i), ("j", j)):
        if int(k) != k or not 1 <= k <= n:
            raise ValueError(f"cell index {name}={k!r} out of range 1..{n}")
    if i != j:
        return 0.0
    return 1.0 / (12.0 * n ** 3)


def interp_kernel(knots) -> "InterpKernel":
    """Covariance kernel of the linear interpolation of W on arbitrary knots.

    The knots must include 0 and 1.  On the equidistant grid {i/n} this
    coincides with :func:`cov_lin`; it is used when extra conditioning times
    (off-grid frozen times) refine the knot set.
    """
    return InterpKernel(tuple(float(k) for k in knots))


@dataclass(frozen=True)
class InterpKernel:
    knots: tuple[float, ...]

    def __post_init__(self):
        k = np.asarray(self.knots)
        if k.size < 2 or k[0] != 0.0 or k[-1] != 1.0 or np.any(np.diff(k) <= 0):
            raise ValueError("knots must be strictly increasing from 0.0 to 1.0")

    def __call__(self, s, t):
        s = _check_time(s, "s")
        t = _check_time(t, "t")
        k = np.asarray(self.knots)
        # cell index: largest knot <= time, clipped so t = 1 uses the last cell
        cs = np.clip(np.searchsorted(k, s, side="right") - 1, 0, k.size - 2)
        ct = np.clip(np.searchsorted(k, t, side="right") - 1, 0, k.size - 2)
        lo = k[ct]
        width = k[ct + 1] - lo
        same = cs == ct
        out = np.where(same, lo + (t - lo) * (s - lo) / width, np.minimum(s, t))
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianVector:
    """A jointly Gaussian vector of path evaluations.

    ``times`` and ``families`` describe each slot; ``cov`` is the full
    covariance matrix, validated to be symmetric positive semidefinite up to
    ``PSD_TOL`` on the smallest eigenvalue.
    """

    times: tuple[float, ...]
    families: tuple[str, ...]
    cov: np.ndarray = field(repr=False)

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (len(self.times), len(self.times)):
            raise ValueError("covariance shape does not match the slot count")
        if not np.allclose(cov, cov.T, atol=1e-14):
            raise ConsistencyError("covariance matrix is not symmetric")
        if cov.size:
            smallest = float(np.linalg.eigvalsh(cov)[0])
            if smallest < -PSD_TOL:
                raise ConsistencyError(
                    f"covariance is not PSD: smallest eigenvalue {smallest:.3e}"
                )
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return len(self.times)

    def variances(self) -> np.ndarray:
        return np.diag(self.cov)


def _pair_cov(s: float, fam_s: str, t: float, fam_t: str, n: int | None) -> float:
    if fam_s not in FAMILIES or fam_t not in FAMILIES:
        raise ValueError(f"unknown family tag in ({fam_s!r}, {fam_t!r})")
    if fam_s == "W" and fam_t == "W":
        return cov_brownian(s, t)
    if n is None:
        raise ValueError("resolution n is required for Wlin/Bridge slots")
    pair = {fam_s, fam_t}
    if pair == {"W", "Wlin"} or pair == {"Wlin"}:
        return cov_lin(s, t, n)
    if pair == {"Bridge"}:
        return cov_bridge_bridge(s, t, n)
    if pair == {"W", "Bridge"}:
        # bridge slot first in the kernel's asymmetric-looking closed form
        return cov_bridge_w(s, t, n) if fam_s == "Bridge" else cov_bridge_w(t, s, n)
    return 0.0  # {"Wlin", "Bridge"}


def build_gaussian_vector(points, n: int | None = None) -> GaussianVector:
    """Assemble the covariance matrix for slots given as (time, family) pairs.

    Families are ``"W"`` (exact path), ``"Wlin"`` (linear interpolation on n
    knots) and ``"Bridge"`` (their difference); ``n`` is required as soon as
    any slot is not ``"W"``.
    """
    times = tuple(float(_check_time(t, "time")) for t, _ in points)
    families = tuple(fam for _, fam in points)
    if n is not None:
        n = _check_n(n)
    d = len(times)
    cov = np.empty((d, d))
    for a in range(d):
        for b in range(a, d):
            v = _pair_cov(times[a], families[a], times[b], families[b], n)
            cov[a, b] = v
            cov[b, a] = v
    return GaussianVector(times=times, families=families, cov=cov)
