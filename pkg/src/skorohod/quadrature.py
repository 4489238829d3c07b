"""Deterministic quadrature helpers.

Two kinds of integrals appear in this package:

* analytic time integrals of piecewise-smooth functions (polynomials, or
  polynomial-times-exponential), handled by composite Gauss-Legendre rules
  split at the known kink locations;
* pathwise integrals along a simulated trajectory, handled by trapezoid
  (default) or Simpson weights on the trajectory's own grid.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]; exact for polynomials of degree 2*order-1."""
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def segment_nodes(a: float, b: float, order: int, subdiv: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights for [a, b] split into equal parts."""
    base_x, base_w = gauss_legendre(order)
    edges = np.linspace(a, b, subdiv + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    weights = (half[:, None] * base_w[None, :]).ravel()
    return nodes, weights


def split_points(breaks: Iterable[float], a: float = 0.0, b: float = 1.0) -> np.ndarray:
    """Sorted, deduplicated partition of [a, b] including the given interior breaks."""
    pts = sorted({float(a), float(b), *(float(x) for x in breaks if a < float(x) < b)})
    return np.asarray(pts)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breaks: Iterable[float] = (),
    a: float = 0.0,
    b: float = 1.0,
    order: int = 10,
    subdiv: int = 1,
) -> float:
    """Integrate a vectorized function over [a, b], splitting at the breaks.

    Exact (to rounding) for piecewise polynomials of degree <= 2*order-1 with
    kinks only at the breaks; near machine precision for smooth analytic pieces.
    """
    edges = split_points(breaks, a, b)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes, weights = segment_nodes(lo, hi, order, subdiv)
        total += float(weights @ np.asarray(f(nodes), dtype=float))
    return total


def path_weights(times: Sequence[float], kind: str = "trapezoid") -> np.ndarray:
    """Quadrature weights over a sorted grid for pathwise time integrals.

    ``trapezoid`` works on any grid.  ``simpson`` fits a parabola through each
    consecutive pair of intervals (nonuniform three-point rule) and falls back
    to trapezoid on a trailing odd interval.
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("grid must be a 1-d array with at least two points")
    if np.any(np.diff(t) <= 0):
        raise ValueError("grid must be strictly increasing")
    w = np.zeros_like(t)
    if kind == "trapezoid":
        dt = np.diff(t)
        w[:-1] += 0.5 * dt
        w[1:] += 0.5 * dt
        return w
    if kind == "simpson":
        i = 0
        m = t.size - 1
        while i + 2 <= m:
            h0 = t[i + 1] - t[i]
            h1 = t[i + 2] - t[i + 1]
            s = h0 + h1
            w[i] += s * (2.0 - h1 / h0) / 6.0
            w[i + 1] += s ** 3 / (6.0 * h0 * h1)
            w[i + 2] += s * (2.0 - h0 / h1) / 6.0
            i += 2
        if i < m:
            h = t[i + 1] - t[i]
            w[i] += 0.5 * h
            w[i + 1] += 0.5 * h
        return w
    raise ValueError(f"unknown quadrature kind {kind!r}")


def triangle_nodes(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre rule for the triangle a <= s' <= s <= b.

    Returns flattened (s, s', weight) arrays.  Used for the per-cell double
    integrals of symmetric kernels: the square integral is twice the triangle.
    """
    base_x, base_w = gauss_legendre(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    s_outer = mid + half * base_x
    w_outer = half * base_w
    s_list, sp_list, w_list = [], [], []
    for s, ws in zip(s_outer, w_outer):
        mid_in = 0.5 * (a + s)
        half_in = 0.5 * (s - a)
        s_list.append(np.full(order, s))
        sp_list.append(mid_in + half_in * base_x)
        w_list.append(ws * half_in * base_w)
    return np.concatenate(s_list), np.concatenate(sp_list), np.concatenate(w_list)
