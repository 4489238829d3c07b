"""Hermite polynomials, Wick exponentials, and Wick monomials of jointly
Gaussian variables.

A Wick monomial of a Gaussian vector (X_1, ..., X_m) with exponents
(l_1, ..., l_m) is the polynomial obtained from the generating function

    exp(sum_i a_i x_i - 1/2 sum_{i,j} a_i a_j Cov(X_i, X_j))

by differentiating l_i times in each a_i at a = 0.  Equivalently it satisfies
the recursion (variables listed with multiplicity X_1, ..., X_d)

    :X_1 ... X_d: = X_d :X_1 ... X_{d-1}:
                    - sum_{i<d} Cov(X_i, X_d) :X_1 ... X_{d-1} without X_i:

which is how :func:`wick_monomial_value` evaluates it.  Second moments of
Wick monomials reduce to a matrix permanent over the pairwise covariances of
the slot-expanded variable lists (:func:`wick_inner`, exact Ryser algorithm).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError
from .gaussian import GaussianVector

#: largest supported Hermite index / total Wick degree for pathwise values
MAX_DEGREE = 64
#: largest total degree for exact permanents (cost is O(2^d d))
MAX_INNER_DEGREE = 12
#: variance below this is treated as a deterministic zero slot
ZERO_VAR_TOL = 1e-14


def hermite(k: int, var: float, x):
    """Variance-parameterized probabilists' Hermite polynomial h_k(x; var).

    Computed by the recurrence h_0 = 1, h_1 = x,
    h_{k+1} = x h_k - var * k * h_{k-1}; for var = 0 this degenerates to x**k.
    Vectorized over ``x``.
    """
    if int(k) != k or k < 0:
        raise ValueError(f"Hermite index must be a non-negative integer, got {k!r}")
    if k > MAX_DEGREE:
        raise CapacityError(f"Hermite index {k} exceeds the supported maximum {MAX_DEGREE}")
    if var < 0:
        raise ValueError(f"variance must be non-negative, got {var!r}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return float(prev) if prev.ndim == 0 else prev
    cur = x.copy()
    for i in range(1, k):
        prev, cur = cur, x * cur - var * i * prev
    return float(cur) if cur.ndim == 0 else cur


def hermite_stack(kmax: int, var, x) -> list:
    """All of h_0(x; var), ..., h_kmax(x; var) by one pass of the recurrence.

    ``var`` and ``x`` may be arrays with broadcastable shapes.
    """
    if kmax > MAX_DEGREE:
        raise CapacityError(f"Hermite index {kmax} exceeds the supported maximum {MAX_DEGREE}")
    x = np.asarray(x, dtype=float)
    var = np.asarray(var, dtype=float)
    shape = np.broadcast(x, var).shape
    out = [np.ones(shape)]
    if kmax >= 1:
        out.append(np.broadcast_to(x, shape).copy())
    for i in range(1, kmax):
        out.append(x * out[i] - var * i * out[i - 1])
    return out


def wick_exp(x, var):
    """Wick exponential exp(x - var/2) of a Gaussian realization x.

    Normalized so that its expectation over x ~ N(0, var) is one; its Hermite
    series is sum_k h_k(x; var) / k!.
    """
    if np.any(np.asarray(var) < 0):
        raise ValueError("variance must be non-negative")
    out = np.exp(np.asarray(x, dtype=float) - 0.5 * np.asarray(var, dtype=float))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class WickValueContext:
    """A Gaussian vector together with realizations of its values.

    Each slot value may be a scalar or an array (broadcastable across slots),
    in which case monomial evaluation vectorizes over the realizations.
    """

    gv: GaussianVector
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.gv.dim:
            raise ValueError("realization length does not match the Gaussian vector")
        for v, var in zip(self.values, self.gv.variances()):
            if var <= ZERO_VAR_TOL and np.any(np.abs(v) > 1e-9):
                raise ValueError("slot with zero variance must carry the value 0")


def _check_multi_index(mi, dim: int) -> tuple[int, ...]:
    mi = tuple(int(l) for l in mi)
    if len(mi) != dim:
        raise ValueError(f"multi-index length {len(mi)} does not match {dim} slots")
    if any(l < 0 for l in mi):
        raise ValueError("multi-index entries must be non-negative")
    return mi


def wick_monomial_value(ctx: WickValueContext, mi) -> float:
    """Value of the Wick monomial with exponents ``mi`` at the realization.

    Memoized over sub-exponent tuples, so the cost is O(prod(l_i + 1) * m)
    rather than exponential in the total degree.  A slot with zero variance
    and positive exponent makes the whole monomial vanish.
    """
    mi = _check_multi_index(mi, ctx.gv.dim)
    degree = sum(mi)
    if degree > MAX_DEGREE:
        raise CapacityError(f"total degree {degree} exceeds the supported maximum {MAX_DEGREE}")
    variances = ctx.gv.variances()
    for l, var in zip(mi, variances):
        if l > 0 and var <= ZERO_VAR_TOL:
            return 0.0
    cov = ctx.gv.cov
    values = ctx.values
    memo: dict[tuple[int, ...], float] = {}

    def rec(exps: tuple[int, ...]) -> float:
        cached = memo.get(exps)
        if cached is not None:
            return cached
        j = next((i for i in reversed(range(len(exps))) if exps[i] > 0), None)
        if j is None:
            return 1.0
        rest = exps[:j] + (exps[j] - 1,) + exps[j + 1:]
        out = values[j] * rec(rest)
        for i, r in enumerate(rest):
            if r > 0:
                out -= r * cov[i, j] * rec(rest[:i] + (r - 1,) + rest[i + 1:])
        memo[exps] = out
        return out

    return rec(mi)


def ryser_permanent(matrix: np.ndarray) -> float:
    """Exact permanent by Ryser's inclusion-exclusion with Gray-code updates.

    Cost O(2^d d) for a d x d matrix; callers must truncate beyond d = 12.
    """
    m = np.asarray(matrix, dtype=float)
    d = m.shape[0]
    if m.shape != (d, d):
        raise ValueError("permanent requires a square matrix")
    if d == 0:
        return 1.0
    if d > MAX_INNER_DEGREE:
        raise CapacityError(f"permanent size {d} exceeds the supported maximum {MAX_INNER_DEGREE}")
    row_sums = np.zeros(d)
    total = 0.0
    gray = 0
    for k in range(1, 1 << d):
        new_gray = k ^ (k >> 1)
        bit = gray ^ new_gray
        col = bit.bit_length() - 1
        if new_gray & bit:
            row_sums += m[:, col]
        else:
            row_sums -= m[:, col]
        gray = new_gray
        parity = -1.0 if (d - bin(gray).count("1")) % 2 else 1.0
        total += parity * float(np.prod(row_sums))
    return total


def _expand_slots(mi: tuple[int, ...]) -> list[int]:
    out: list[int] = []
    for slot, l in enumerate(mi):
        out.extend([slot] * l)
    return out


def wick_inner(mi1, mi2, gv1: GaussianVector, gv2: GaussianVector, cross_cov) -> float:
    """E[(Wick monomial over gv1)(Wick monomial over gv2)].

    Zero unless the total degrees match; otherwise the permanent of the
    matrix of pairwise covariances of the slot-expanded variable lists, with
    ``cross_cov[i, j] = Cov(gv1 slot i, gv2 slot j)``.
    """
    mi1 = _check_multi_index(mi1, gv1.dim)
    mi2 = _check_multi_index(mi2, gv2.dim)
    if sum(mi1) != sum(mi2):
        return 0.0
    d = sum(mi1)
    if d > MAX_INNER_DEGREE:
        raise CapacityError(
            f"total degree {d} exceeds the exact-permanent capacity {MAX_INNER_DEGREE}"
        )
    cross = np.asarray(cross_cov, dtype=float)
    if cross.shape != (gv1.dim, gv2.dim):
        raise ValueError("cross covariance shape does not match the slot counts")
    rows = _expand_slots(mi1)
    cols = _expand_slots(mi2)
    matrix = cross[np.ix_(rows, cols)]
    return ryser_permanent(matrix)


def wick_upper_bound(mi, gv: GaussianVector) -> float:
    """Second-moment bound m! * prod l_i! * prod var_i^l_i over active slots.

    Valid for slots built on orthogonal directions (distinct times listed
    once); used to control truncation tails of chaos series.
    """
    mi = _check_multi_index(mi, gv.dim)
    variances = gv.variances()
    active = [(l, var) for l, var in zip(mi, variances) if l > 0]
    out = math.factorial(len(active))
    for l, var in active:
        out *= math.factorial(l) * var ** l
    return float(out)


# ---------------------------------------------------------------------------
# Contraction expansions.  These serve two fast paths that the recursion and
# the permanent stay oracles for:
#   * _contraction_plan: a Wick monomial as a combination of products of
#     per-slot Hermite polynomials and cross-covariance powers (vectorizes
#     over many realizations at once);
#   * _pairing_plan: E[(monomial)(monomial)] as a sum over contraction
#     matrices with fixed row/column sums (a permanent with multiplicities).
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _contraction_plan(exponents: tuple[int, ...]):
    """Entries (pair_powers, residual_degrees, coefficient) such that

    :prod X_i^{l_i}: = sum coeff * prod_{i<k} Cov(X_i,X_k)^{j_ik}
                               * prod_i h_{l_i - r_i}(X_i; Var X_i)

    with r_i the total contraction count at slot i and
    coeff = prod_i l_i!/(l_i-r_i)! * prod_{i<k} (-1)^{j_ik} / j_ik!.
    """
    m = len(exponents)
    pairs = [(i, k) for i in range(m) for k in range(i + 1, m)]
    plan = []

    def rec(idx: int, j_list: list[int], rem: list[int]):
        if idx == len(pairs):
            coeff = 1.0
            for full, left in zip(exponents, rem):
                coeff *= math.factorial(full) / math.factorial(left)
            for j in j_list:
                coeff *= (-1.0) ** j / math.factorial(j)
            plan.append((tuple(j_list), tuple(rem), coeff))
            return
        i, k = pairs[idx]
        for j in range(min(rem[i], rem[k]) + 1):
            rem[i] -= j
            rem[k] -= j
            j_list.append(j)
            rec(idx + 1, j_list, rem)
            j_list.pop()
            rem[i] += j
            rem[k] += j

    rec(0, [], list(exponents))
    return tuple(plan), tuple(pairs)


def wick_monomial_contracted(exponents, hermites, pair_covs):
    """Evaluate a Wick monomial from per-slot Hermite stacks.

    ``hermites[i][d]`` is h_d(X_i; Var X_i) for slot i (arrays broadcast),
    ``pair_covs[(i, k)]`` is Cov(X_i, X_k) for i < k (scalar or array).
    Used by the batched integrators; agrees with :func:`wick_monomial_value`.
    """
    exponents = tuple(int(l) for l in exponents)
    plan, pairs = _contraction_plan(exponents)
    total = 0.0
    for j_list, rem, coeff in plan:
        term = coeff
        for (pair, j) in zip(pairs, j_list):
            if j:
                term = term * pair_covs[pair] ** j
        for i, r in enumerate(rem):
            if r:
                term = term * hermites[i][r]
        total = total + term
    return total


@lru_cache(maxsize=None)
def _pairing_plan(row_sums: tuple[int, ...], col_sums: tuple[int, ...]):
    """Contraction matrices J >= 0 with the given row/column sums, paired with
    the multiplicity prod_i a_i! prod_j b_j! / prod_{ij} J_ij!.

    E[(Wick monomial a)(Wick monomial b)] = sum_J mult(J) prod C_ij^{J_ij},
    the permanent of the slot-expanded covariance matrix grouped by slots.
    """
    rows = len(row_sums)
    cols = len(col_sums)
    plan = []

    def rec(r: int, c: int, j_matrix: list[list[int]], row_left: list[int], col_left: list[int]):
        if r == rows:
            if any(col_left):
                return
            mult = 1.0
            for a in row_sums:
                mult *= math.factorial(a)
            for b in col_sums:
                mult *= math.factorial(b)
            for row in j_matrix:
                for j in row:
                    mult /= math.factorial(j)
            plan.append((tuple(tuple(row) for row in j_matrix), mult))
            return
        if c == cols:
            if row_left[r]:
                return
            rec(r + 1, 0, j_matrix, row_left, col_left)
            return
        cap = min(row_left[r], col_left[c])
        # remaining columns must be able to absorb the rest of this row
        for j in range(cap + 1):
            j_matrix[r][c] = j
            row_left[r] -= j
            col_left[c] -= j
            rec(r, c + 1, j_matrix, row_left, col_left)
            row_left[r] += j
            col_left[c] += j
            j_matrix[r][c] = 0

    rec(0, 0, [[0] * cols for _ in range(rows)], list(row_sums), list(col_sums))
    return tuple(plan)


def paired_moment(mi1, mi2, cross_cov) -> float | np.ndarray:
    """E[(monomial with exponents mi1)(monomial with exponents mi2)].

    ``cross_cov[i][j]`` is Cov(slot i of the first, slot j of the second);
    entries may be scalars or broadcastable arrays, in which case the result
    is an array.  Equals :func:`wick_inner` on scalar covariances, without the
    exponential slot expansion.
    """
    mi1 = tuple(int(l) for l in mi1)
    mi2 = tuple(int(l) for l in mi2)
    if sum(mi1) != sum(mi2):
        return 0.0
    total = 0.0
    for j_matrix, mult in _pairing_plan(mi1, mi2):
        term = mult
        for r, row in enumerate(j_matrix):
            for c, j in enumerate(row):
                if j:
                    term = term * cross_cov[r][c] ** j
        total = total + term
    return total
