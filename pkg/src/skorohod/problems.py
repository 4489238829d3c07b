"""Problem definitions: the JSON file schema and bundled integrands.

A problem file is a single JSON document::

    {
      "K": 2,
      "taus": [0.5],
      "terms": [
        {"coeff": {"kind": "polynomial", "coeffs": [0.0, 1.0]},
         "exponents": [0, 1]}
      ]
    }

Coefficient kinds are ``polynomial`` (global polynomial, low-to-high
coefficients) and ``exp_poly`` (piecewise polynomial times the exponential of
a piecewise polynomial, sharing a breakpoint list).  Numbers round-trip
losslessly: serialization uses shortest-exact decimal representations.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import quadrature
from .chaos import (
    ChaosExpansion,
    ChaosTerm,
    Coefficient,
    ExpPolyCoefficient,
    PiecewisePoly,
    PolyCoefficient,
    constant_coefficient,
)
from .errors import CapacityError, ProblemParseError

BUILTIN_NAMES = ("square", "linear_drift", "wick_square_terminal", "sine", "tau_linear")


# ---------------------------------------------------------------------------
# Bundled integrands
# ---------------------------------------------------------------------------


def square() -> ChaosExpansion:
    """u_s = W_s^2, i.e. the chaos form s + :W_s^2:."""
    return ChaosExpansion((), (
        ChaosTerm(PolyCoefficient((0.0, 1.0)), (0,)),
        ChaosTerm(constant_coefficient(1.0), (2,)),
    ))


def linear_drift() -> ChaosExpansion:
    """Deterministic integrand u_s = s; its error law is exact at every n."""
    return ChaosExpansion((), (ChaosTerm(PolyCoefficient((0.0, 1.0)), (0,)),))


def wick_square_terminal(tau: float = 1.0) -> ChaosExpansion:
    """u_s = W_tau: constant coefficients, hence exactly simulable."""
    return ChaosExpansion((float(tau),), (ChaosTerm(constant_coefficient(1.0), (0, 1)),))


def tau_linear(tau: float = 0.5) -> ChaosExpansion:
    """u_s = s * W_tau: the smallest integrand with a frozen slot and drift."""
    return ChaosExpansion((float(tau),), (ChaosTerm(PolyCoefficient((0.0, 1.0)), (0, 1)),))


def _sine_variance_profile(taus: tuple[float, ...]) -> PiecewisePoly:
    """Var(W_s + sum_i W_tau_i) = s + 2 sum_i min(s, tau_i) + sum_ij min(tau_i, tau_j),
    a piecewise-linear function of s with kinks at the frozen times."""
    const = sum(min(a, b) for a in taus for b in taus)
    breaks = tuple(sorted({t for t in taus if 0.0 < t < 1.0}))
    pieces = []
    for left in (0.0,) + breaks:
        # on (left, next break): min(s, tau) = tau for tau <= left, else s
        slope = 1.0 + 2.0 * sum(1 for t in taus if t > left)
        intercept = const + 2.0 * sum(t for t in taus if t <= left)
        pieces.append((intercept, slope))
    return PiecewisePoly(breaks, tuple(pieces))


def sine(taus=(0.5,), degree: int = 9) -> ChaosExpansion:
    """Truncated chaos form of u_s = sin(W_s + sum_i W_tau_i).

    The chaos coefficients follow from the series of the renormalized sine of
    a Gaussian X with variance v:
    sin(X) = exp(-v/2) * sum_{m odd} (-1)^((m-1)/2) / m! * :X^m:,
    and :X^m: expands multinomially over the slots, so

        a_l(s) = (-1)^((|l|-1)/2) / prod_i l_i! * exp(-v(s)/2),  |l| odd,

    with v(s) the piecewise-linear variance profile.  Terms with total degree
    above ``degree`` are dropped; see :func:`sine_truncation_tail`.
    """
    taus = tuple(float(t) for t in taus)
    if degree < 1:
        raise ValueError("truncation degree must be at least 1")
    half_neg_var = _sine_variance_profile(taus).scaled(-0.5)
    k = len(taus) + 1
    terms = []
    for total in range(1, degree + 1, 2):
        sign = (-1.0) ** ((total - 1) // 2)
        for exps in _compositions(total, k):
            weight = sign / math.prod(math.factorial(l) for l in exps)
            terms.append(ChaosTerm(
                ExpPolyCoefficient(PiecewisePoly.constant(weight), half_neg_var),
                exps,
            ))
    return ChaosExpansion(taus, tuple(terms))


def _compositions(total: int, slots: int):
    if slots == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


def sine_truncation_tail(taus=(0.5,), degree: int = 9) -> float:
    """L2(ds x P) distance between the sine integrand and its truncation.

    Chaos levels are orthogonal and the level-m norm of the renormalized sine
    of a variance-v Gaussian is exactly exp(-v) v^m / m!, so the squared tail
    at time s is exp(-v(s)) sum_{m > degree, m odd} v(s)^m / m!, integrated
    over s.
    """
    taus = tuple(float(t) for t in taus)
    profile = _sine_variance_profile(taus)

    def tail_sq(s):
        v = np.asarray(profile(s), dtype=float)
        total = np.zeros_like(v)
        m = degree + 2 if degree % 2 else degree + 1
        while True:
            term = v ** m / math.factorial(m)
            total += term
            if np.max(term) < 1e-30:
                break
            m += 2
        return np.exp(-v) * total

    return math.sqrt(quadrature.integrate(tail_sq, profile.breaks, order=12, subdiv=2))


def builtin_expansion(name: str, sine_degree: int = 9) -> ChaosExpansion:
    if name == "square":
        return square()
    if name == "linear_drift":
        return linear_drift()
    if name == "wick_square_terminal":
        return wick_square_terminal()
    if name == "sine":
        return sine(degree=sine_degree)
    if name == "tau_linear":
        return tau_linear()
    raise ProblemParseError(
        f"unknown builtin {name!r}; available: {', '.join(BUILTIN_NAMES)}"
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _coeff_to_data(coeff: Coefficient) -> dict:
    if isinstance(coeff, PolyCoefficient):
        return {"kind": "polynomial", "coeffs": list(coeff.coeffs)}
    if isinstance(coeff, ExpPolyCoefficient):
        breaks = sorted(set(coeff.poly.breaks) | set(coeff.exponent.breaks))
        poly = _on_breaks(coeff.poly, breaks)
        expo = _on_breaks(coeff.exponent, breaks)
        return {
            "kind": "exp_poly",
            "breaks": list(breaks),
            "poly_pieces": [list(p) for p in poly.pieces],
            "exp_pieces": [list(p) for p in expo.pieces],
        }
    raise ProblemParseError(
        f"coefficient kind {coeff.kind!r} has no file representation"
    )


def _on_breaks(pp: PiecewisePoly, breaks) -> PiecewisePoly:
    return pp + PiecewisePoly(tuple(breaks), tuple((0.0,) for _ in range(len(breaks) + 1)))


def _coeff_from_data(data: dict, where: str) -> Coefficient:
    kind = data.get("kind")
    if kind == "polynomial":
        coeffs = data.get("coeffs")
        if not isinstance(coeffs, list) or not all(isinstance(c, (int, float)) for c in coeffs):
            raise ProblemParseError(f"{where}.coeffs must be a list of numbers")
        return PolyCoefficient(tuple(float(c) for c in coeffs))
    if kind == "exp_poly":
        try:
            breaks = tuple(float(b) for b in data["breaks"])
            poly = PiecewisePoly(breaks, tuple(tuple(float(c) for c in p) for p in data["poly_pieces"]))
            expo = PiecewisePoly(breaks, tuple(tuple(float(c) for c in p) for p in data["exp_pieces"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemParseError(f"{where}: malformed exp_poly coefficient: {exc}") from exc
        return ExpPolyCoefficient(poly, expo)
    raise ProblemParseError(f"{where}.kind must be 'polynomial' or 'exp_poly', got {kind!r}")


def serialize_expansion(u: ChaosExpansion) -> str:
    doc = {
        "K": u.K,
        "taus": list(u.taus),
        "terms": [
            {"coeff": _coeff_to_data(t.coeff), "exponents": list(t.exponents)}
            for t in u.terms
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_expansion(text: str) -> ChaosExpansion:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ProblemParseError("top level must be a JSON object")
    if "builtin" in doc:
        name = doc["builtin"]
        return builtin_expansion(name, sine_degree=int(doc.get("sine_degree", 9)))
    taus = doc.get("taus")
    if not isinstance(taus, list) or not all(isinstance(t, (int, float)) for t in taus):
        raise ProblemParseError("field 'taus' must be a list of numbers")
    terms_data = doc.get("terms")
    if not isinstance(terms_data, list):
        raise ProblemParseError("field 'terms' must be a list")
    if "K" in doc and doc["K"] != len(taus) + 1:
        raise ProblemParseError(
            f"field 'K'={doc['K']} inconsistent with {len(taus)} frozen times"
        )
    terms = []
    for i, td in enumerate(terms_data):
        where = f"terms[{i}]"
        if not isinstance(td, dict):
            raise ProblemParseError(f"{where} must be an object")
        exps = td.get("exponents")
        if not isinstance(exps, list) or not all(isinstance(l, int) and l >= 0 for l in exps):
            raise ProblemParseError(f"{where}.exponents must be a list of non-negative integers")
        coeff_data = td.get("coeff")
        if not isinstance(coeff_data, dict):
            raise ProblemParseError(f"{where}.coeff must be an object")
        terms.append(ChaosTerm(_coeff_from_data(coeff_data, f"{where}.coeff"), tuple(exps)))
    try:
        return ChaosExpansion(tuple(float(t) for t in taus), tuple(terms))
    except CapacityError:
        raise
    except ValueError as exc:
        raise ProblemParseError(str(exc)) from exc


def load_expansion(path: str) -> ChaosExpansion:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemParseError(f"cannot read {path}: {exc}") from exc
    return parse_expansion(text)
