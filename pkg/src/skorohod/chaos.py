"""Finite chaos expansions with one dynamic slot.

An integrand u_s = f(s, W_s, W_{tau_2}, ..., W_{tau_K}) is modelled as a
finite sum of terms

    a(s) * :W_s^{l_1} W_{tau_2}^{l_2} ... W_{tau_K}^{l_K}:

where the Wick monomial exponents form the term's multi-index (dynamic slot
first) and a is a differentiable coefficient.  On this representation the
drift operator L acts by differentiating every coefficient in s, and the
partial derivative in slot j multiplies by l_j and decrements the exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import quadrature
from .errors import CapacityError
from .gaussian import build_gaussian_vector
from .wick import MAX_INNER_DEGREE, WickValueContext, paired_moment, wick_monomial_value

_polyval = np.polynomial.polynomial.polyval


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    out = [float(c) for c in coeffs]
    while len(out) > 1 and out[-1] == 0.0:
        out.pop()
    return tuple(out) if out else (0.0,)


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise polynomial on [0, 1] with interior breakpoints.

    ``pieces[i]`` holds low-to-high coefficients valid on the i-th interval of
    the partition (0, breaks..., 1); evaluation is left-continuous at 1.
    """

    breaks: tuple[float, ...] = ()
    pieces: tuple[tuple[float, ...], ...] = ((0.0,),)

    def __post_init__(self):
        breaks = tuple(float(b) for b in self.breaks)
        if any(not 0.0 < b < 1.0 for b in breaks) or list(breaks) != sorted(set(breaks)):
            raise ValueError("breakpoints must be strictly increasing inside (0, 1)")
        pieces = tuple(_trim(p) for p in self.pieces)
        if len(pieces) != len(breaks) + 1:
            raise ValueError("need exactly len(breaks) + 1 pieces")
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def constant(cls, value: float) -> "PiecewisePoly":
        return cls((), ((float(value),),))

    def _piece_index(self, s: np.ndarray) -> np.ndarray:
        return np.searchsorted(np.asarray(self.breaks), s, side="right")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if not self.breaks:
            out = _polyval(s, np.asarray(self.pieces[0]))
        else:
            idx = self._piece_index(s)
            out = np.empty_like(s)
            for i, coeffs in enumerate(self.pieces):
                mask = idx == i
                if np.any(mask):
                    out[mask] = _polyval(s[mask], np.asarray(coeffs))
        return float(out) if out.ndim == 0 else out

    def derivative(self) -> "PiecewisePoly":
        return PiecewisePoly(
            self.breaks,
            tuple(
                tuple(k * c for k, c in enumerate(p) if k > 0) or (0.0,)
                for p in self.pieces
            ),
        )

    def _aligned(self, other: "PiecewisePoly"):
        breaks = tuple(sorted(set(self.breaks) | set(other.breaks)))

        def refit(pp: "PiecewisePoly"):
            edges = (0.0, *breaks, 1.0)
            idx = pp._piece_index(np.asarray(edges[:-1]))
            return [pp.pieces[i] for i in idx]

        return breaks, refit(self), refit(other)

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        breaks, mine, theirs = self._aligned(other)
        pieces = []
        for a, b in zip(mine, theirs):
            width = max(len(a), len(b))
            pieces.append(tuple(
                (a[k] if k < len(a) else 0.0) + (b[k] if k < len(b) else 0.0)
                for k in range(width)
            ))
        return PiecewisePoly(breaks, tuple(pieces))

    def __mul__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        breaks, mine, theirs = self._aligned(other)
        pieces = []
        for a, b in zip(mine, theirs):
            conv = [0.0] * (len(a) + len(b) - 1)
            for k, ca in enumerate(a):
                for m, cb in enumerate(b):
                    conv[k + m] += ca * cb
            pieces.append(tuple(conv))
        return PiecewisePoly(breaks, tuple(pieces))

    def scaled(self, factor: float) -> "PiecewisePoly":
        return PiecewisePoly(self.breaks, tuple(tuple(factor * c for c in p) for p in self.pieces))

    def is_zero(self) -> bool:
        return all(c == 0.0 for p in self.pieces for c in p)

    def is_constant(self) -> bool:
        if any(c != 0.0 for p in self.pieces for c in p[1:]):
            return False
        return len({p[0] for p in self.pieces}) == 1


class Coefficient:
    """Interface of a differentiable coefficient a(s) on [0, 1]."""

    kind: str = "abstract"

    def __call__(self, s):  # pragma: no cover - interface
        raise NotImplementedError

    def derivative(self) -> "Coefficient":  # pragma: no cover - interface
        raise NotImplementedError

    def scaled(self, factor: float) -> "Coefficient":  # pragma: no cover - interface
        raise NotImplementedError

    def is_zero(self) -> bool:  # pragma: no cover - interface
        raise NotImplementedError

    def is_constant(self) -> bool:  # pragma: no cover - interface
        raise NotImplementedError

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class PolyCoefficient(Coefficient):
    """Global polynomial coefficient; derivatives are exact."""

    coeffs: tuple[float, ...]
    kind = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    def __call__(self, s):
        out = _polyval(np.asarray(s, dtype=float), np.asarray(self.coeffs))
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self) -> "PolyCoefficient":
        return PolyCoefficient(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def scaled(self, factor: float) -> "PolyCoefficient":
        return PolyCoefficient(tuple(factor * c for c in self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coeffs)

    def is_constant(self) -> bool:
        return all(c == 0.0 for c in self.coeffs[1:])


@dataclass(frozen=True)
class ExpPolyCoefficient(Coefficient):
    """Coefficient of the form p(s) * exp(q(s)) with piecewise-polynomial p, q.

    Closed under differentiation: (p' + p q') exp(q).  Covers chaos series of
    Gaussian exponent type, where q is a piecewise-linear variance profile.
    """

    poly: PiecewisePoly
    exponent: PiecewisePoly
    kind = "exp_poly"

    def __call__(self, s):
        out = self.poly(s) * np.exp(self.exponent(s))
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self) -> "ExpPolyCoefficient":
        return ExpPolyCoefficient(
            self.poly.derivative() + self.poly * self.exponent.derivative(),
            self.exponent,
        )

    def scaled(self, factor: float) -> "ExpPolyCoefficient":
        return ExpPolyCoefficient(self.poly.scaled(factor), self.exponent)

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def is_constant(self) -> bool:
        if self.poly.is_zero():
            return True
        return self.poly.is_constant() and self.exponent.is_constant()

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.poly.breaks) | set(self.exponent.breaks)))


class CallableCoefficient(Coefficient):
    """User-supplied value/derivative pair, validated by finite differences."""

    kind = "callable"

    def __init__(self, value_fn: Callable, derivative_fn: Callable,
                 breakpoints: Sequence[float] = (), validate: bool = True):
        self._value = value_fn
        self._derivative = derivative_fn
        self._breaks = tuple(float(b) for b in breakpoints)
        if validate:
            self._validate()

    def _validate(self, npoints: int = 20, h: float = 1e-6):
        rng = np.random.default_rng(0x5eed)
        pts = rng.uniform(2 * h, 1.0 - 2 * h, npoints)
        fd = (np.asarray(self._value(pts + h)) - np.asarray(self._value(pts - h))) / (2 * h)
        dv = np.asarray(self._derivative(pts))
        scale = 1.0 + np.max(np.abs(dv))
        if np.max(np.abs(fd - dv)) > 1e-4 * scale:
            raise ValueError("supplied derivative does not match finite differences")

    def __call__(self, s):
        out = np.asarray(self._value(np.asarray(s, dtype=float)))
        return float(out) if out.ndim == 0 else out

    def derivative(self) -> "CallableCoefficient":
        dfn = self._derivative

        def second(s, h=1e-5):
            return (np.asarray(dfn(np.asarray(s) + h)) - np.asarray(dfn(np.asarray(s) - h))) / (2 * h)

        return CallableCoefficient(dfn, second, self._breaks, validate=False)

    def scaled(self, factor: float) -> "CallableCoefficient":
        vfn, dfn = self._value, self._derivative
        return CallableCoefficient(
            lambda s: factor * np.asarray(vfn(s)),
            lambda s: factor * np.asarray(dfn(s)),
            self._breaks,
            validate=False,
        )

    def is_zero(self) -> bool:
        pts = np.linspace(0.0, 1.0, 101)
        return bool(np.max(np.abs(np.asarray(self._value(pts)))) < 1e-12)

    def is_constant(self) -> bool:
        pts = np.linspace(0.0, 1.0, 101)
        vals = np.asarray(self._value(pts), dtype=float)
        return bool(np.max(np.abs(vals - vals[0])) < 1e-12)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self._breaks


def constant_coefficient(value: float) -> PolyCoefficient:
    return PolyCoefficient((float(value),))


# ---------------------------------------------------------------------------
# Expansions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChaosTerm:
    coeff: Coefficient
    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(l) for l in self.exponents)
        if any(l < 0 for l in exps):
            raise ValueError("exponents must be non-negative")
        object.__setattr__(self, "exponents", exps)

    @property
    def total_degree(self) -> int:
        return sum(self.exponents)


@dataclass(frozen=True)
class ChaosExpansion:
    """Finite chaos integrand: dynamic slot first, then the frozen times."""

    taus: tuple[float, ...]
    terms: tuple[ChaosTerm, ...]

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        if any(not 0.0 <= t <= 1.0 for t in taus):
            raise ValueError("frozen times must lie in [0, 1]")
        k = len(taus) + 1
        kept = []
        for term in self.terms:
            if len(term.exponents) != k:
                raise ValueError(
                    f"term multi-index length {len(term.exponents)} does not match {k} slots"
                )
            if term.total_degree > MAX_INNER_DEGREE:
                raise CapacityError(
                    f"term with exponents {term.exponents} has total degree "
                    f"{term.total_degree}, beyond the exact-moment capacity {MAX_INNER_DEGREE}"
                )
            if not term.coeff.is_zero():
                kept.append(term)
        kept.sort(key=lambda t: t.exponents)
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "terms", tuple(kept))

    @property
    def K(self) -> int:
        return len(self.taus) + 1

    @property
    def max_degree(self) -> int:
        return max((t.total_degree for t in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient_breakpoints(self) -> tuple[float, ...]:
        pts = set()
        for term in self.terms:
            pts.update(term.coeff.breakpoints)
        return tuple(sorted(pts))


def apply_L(u: ChaosExpansion) -> ChaosExpansion:
    """Drift operator on the representation: differentiate every coefficient.

    Multi-indices are untouched; terms with constant coefficients vanish, so
    the result is the zero expansion exactly when u admits constant
    (chaos-series) coefficients.
    """
    return ChaosExpansion(
        u.taus,
        tuple(ChaosTerm(t.coeff.derivative(), t.exponents) for t in u.terms),
    )


def apply_dx(u: ChaosExpansion, j: int) -> ChaosExpansion:
    """Partial derivative in slot j (1-based; j = 1 is the dynamic slot).

    Each term with l_j >= 1 maps to l_j times the term with l_j decremented;
    the falling-factorial action on Wick monomials.
    """
    if not 1 <= j <= len(u.taus) + 1:
        raise ValueError(f"slot index {j} out of range 1..{len(u.taus) + 1}")
    i = j - 1
    out = []
    for term in u.terms:
        l = term.exponents[i]
        if l >= 1:
            exps = term.exponents[:i] + (l - 1,) + term.exponents[i + 1:]
            out.append(ChaosTerm(term.coeff.scaled(float(l)), exps))
    return ChaosExpansion(u.taus, tuple(out))


def ito_decompose(u: ChaosExpansion) -> tuple[ChaosExpansion, ChaosExpansion]:
    """Split u viewed as F(t, W_t, frozen...) into (integrand, drift).

    F(1, W_1, ...) - F(0, W_0, ...) equals the stochastic integral of the
    first component plus the time integral of the second along the path.
    """
    return apply_dx(u, 1), apply_L(u)


# ---------------------------------------------------------------------------
# Step functions and the S-transform
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant test function on [0, 1] (left-closed pieces)."""

    breaks: tuple[float, ...] = ()
    levels: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        breaks = tuple(float(b) for b in self.breaks)
        levels = tuple(float(v) for v in self.levels)
        if any(not 0.0 < b < 1.0 for b in breaks) or list(breaks) != sorted(set(breaks)):
            raise ValueError("breakpoints must be strictly increasing inside (0, 1)")
        if len(levels) != len(breaks) + 1:
            raise ValueError("need exactly len(breaks) + 1 levels")
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "levels", levels)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(np.asarray(self.breaks), t, side="right")
        out = np.asarray(self.levels)[idx]
        return float(out) if out.ndim == 0 else out

    def antiderivative(self, t):
        """Exact running integral from 0 to t."""
        t = np.asarray(t, dtype=float)
        edges = np.asarray((0.0, *self.breaks, 1.0))
        cumulative = np.concatenate(([0.0], np.cumsum(np.asarray(self.levels) * np.diff(edges))))
        idx = np.searchsorted(np.asarray(self.breaks), t, side="right")
        out = cumulative[idx] + np.asarray(self.levels)[idx] * (t - edges[idx])
        return float(out) if out.ndim == 0 else out


def s_transform(u: ChaosExpansion, g: StepFunction, s) -> float:
    """S-transform of u_s at the test function g.

    Each Wick monomial maps to the product of per-slot powers of the running
    integral of g, so the result is
    sum_terms a(s) * G(s)^{l_1} * prod_j G(tau_j)^{l_j} with G(t) = int_0^t g.
    """
    g_dyn = g.antiderivative(s)
    g_tau = [g.antiderivative(t) for t in u.taus]
    total = 0.0
    for term in u.terms:
        l = term.exponents
        factor = g_dyn ** l[0]
        for gt, lj in zip(g_tau, l[1:]):
            factor = factor * gt ** lj
        total = total + term.coeff(s) * factor
    return total if np.ndim(total) else float(total)


def s_transform_of_integral(u: ChaosExpansion, g: StepFunction,
                            order: int = 12, subdiv: int = 2) -> float:
    """S-transform of the Skorohod integral of u, in closed form.

    Integration by parts per term: with G the running integral of g and
    k = l_1 + 1,
    (1/k) [a(1) G(1)^k - int_0^1 a'(s) G(s)^k ds] * prod_j G(tau_j)^{l_j}.
    Exact piecewise integration (splits at g's and the coefficients' breaks).
    """
    breaks = set(g.breaks)
    total = 0.0
    for term in u.terms:
        k = term.exponents[0] + 1
        frozen = 1.0
        for gt, lj in zip((g.antiderivative(t) for t in u.taus), term.exponents[1:]):
            frozen *= gt ** lj
        dcoeff = term.coeff.derivative()
        boundary = term.coeff(1.0) * g.antiderivative(1.0) ** k
        if dcoeff.is_zero():
            inner = 0.0
        else:
            inner = quadrature.integrate(
                lambda x, d=dcoeff, kk=k: d(x) * g.antiderivative(x) ** kk,
                breaks | set(term.coeff.breakpoints),
                order=order,
                subdiv=subdiv,
            )
        total += (boundary - inner) / k * frozen
    return total


def s_transform_identity_rhs(u: ChaosExpansion, g: StepFunction,
                             order: int = 12, subdiv: int = 2) -> float:
    """int_0^1 (S u_s)(g) g(s) ds, the defining S-transform of the integral."""
    breaks = set(g.breaks) | set(u.coefficient_breakpoints())
    return quadrature.integrate(
        lambda x: s_transform(u, g, x) * g(x), breaks, order=order, subdiv=subdiv
    )


# ---------------------------------------------------------------------------
# Moments and pointwise values
# ---------------------------------------------------------------------------


def cross_moment(u: ChaosExpansion, v: ChaosExpansion, s, sp):
    """E[u_s v_s'] over the joint Gaussian (W_s, W_s', frozen W's).

    ``s`` and ``sp`` may be arrays of matching shape; expansions must share
    the same frozen times.
    """
    if u.taus != v.taus:
        raise ValueError("cross moments require identical frozen times")
    s = np.asarray(s, dtype=float)
    sp = np.asarray(sp, dtype=float)
    taus = u.taus
    k = len(taus) + 1
    cov = [[None] * k for _ in range(k)]
    cov[0][0] = np.minimum(s, sp)
    for j, t in enumerate(taus):
        cov[0][j + 1] = np.minimum(s, t)
        cov[j + 1][0] = np.minimum(t, sp)
        for i, t2 in enumerate(taus):
            cov[j + 1][i + 1] = min(t2, t)
    total = np.zeros(np.broadcast(s, sp).shape)
    for ta in u.terms:
        a_vals = ta.coeff(s)
        for tb in v.terms:
            if ta.total_degree != tb.total_degree:
                continue
            moment = paired_moment(ta.exponents, tb.exponents, cov)
            total = total + a_vals * tb.coeff(sp) * moment
    return float(total) if total.ndim == 0 else total


def second_moment(u: ChaosExpansion, s) -> float:
    """E[u_s^2], assembled from pairwise Wick-monomial inner products."""
    return cross_moment(u, u, s, s)


def expansion_value(u: ChaosExpansion, s: float, w_s: float, w_taus) -> float:
    """Realized value of u_s given W_s = w_s and the frozen values w_taus."""
    w_taus = tuple(float(w) for w in w_taus)
    if len(w_taus) != len(u.taus):
        raise ValueError("need one frozen value per frozen time")
    gv = build_gaussian_vector([(s, "W")] + [(t, "W") for t in u.taus])
    ctx = WickValueContext(gv, (float(w_s),) + w_taus)
    return math.fsum(
        term.coeff(s) * wick_monomial_value(ctx, term.exponents) for term in u.terms
    )


def coefficients_constant(u: ChaosExpansion) -> bool:
    """True when every coefficient is constant in s (chaos-series form)."""
    return all(term.coeff.is_constant() for term in u.terms)


def expansions_allclose(u: ChaosExpansion, v: ChaosExpansion,
                        s_points=None, tol: float = 1e-12) -> bool:
    """Termwise comparison after grouping by multi-index, at sample times."""
    if u.taus != v.taus:
        return False
    if s_points is None:
        s_points = np.linspace(0.0, 1.0, 21)
    s_points = np.asarray(s_points, dtype=float)
    exps = {t.exponents for t in u.terms} | {t.exponents for t in v.terms}
    for e in exps:
        mine = np.zeros_like(s_points)
        theirs = np.zeros_like(s_points)
        for term in u.terms:
            if term.exponents == e:
                mine = mine + term.coeff(s_points)
        for term in v.terms:
            if term.exponents == e:
                theirs = theirs + term.coeff(s_points)
        if np.max(np.abs(mine - theirs)) > tol:
            return False
    return True
