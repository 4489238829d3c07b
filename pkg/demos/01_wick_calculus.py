"""Wick calculus on a Gaussian path: Hermite polynomials, renormalized
exponentials, Wick monomials, and exact second moments.

Run:  python3 demos/01_wick_calculus.py
"""

import math

import numpy as np

from skorohod import (
    WickValueContext,
    build_gaussian_vector,
    hermite,
    wick_exp,
    wick_inner,
    wick_monomial_value,
)

rng = np.random.default_rng(1)

# --- variance-parameterized Hermite polynomials --------------------------
# h_k(x; v) follows h_{k+1} = x h_k - v k h_{k-1}; with v = Var(X) these are
# the orthogonal polynomials of a centered Gaussian X.
print("h_2(x; 1) at x = 0:", hermite(2, 1.0, 0.0))
print("h_3(x; 0.5) at x = 1:", hermite(3, 0.5, 1.0), "(= x^3 - 3*0.5*x)")

# --- the renormalized exponential and its Hermite series -----------------
x, var = 0.3, 0.7
series = math.fsum(hermite(k, var, x) / math.factorial(k) for k in range(31))
print(f"\nexp(x - var/2)      = {wick_exp(x, var):.12f}")
print(f"30-term Hermite sum = {series:.12f}")

# --- Wick monomials of correlated path values ----------------------------
# :W_s W_t: = W_s W_t - min(s, t); higher powers come from the recursion.
s, t = 0.3, 0.8
gv = build_gaussian_vector([(s, "W"), (t, "W")])
w_s, w_t = 0.25, -0.6
ctx = WickValueContext(gv, (w_s, w_t))
print("\n:W_s W_t: at (0.25, -0.6):", wick_monomial_value(ctx, (1, 1)))
print("by hand  w_s w_t - min(s,t):", w_s * w_t - min(s, t))

# --- exact second moments via the permanent -------------------------------
# E[:W_1^2: :W_1^2:] = 2 and E[:W_1^2: :W_0.5^2:] = 2 min(1, 0.5)^2 = 0.5
gv1 = build_gaussian_vector([(1.0, "W")])
gvh = build_gaussian_vector([(0.5, "W")])
print("\nE[(:W_1^2:)^2]        =", wick_inner((2,), (2,), gv1, gv1, np.array([[1.0]])))
print("E[:W_1^2: :W_0.5^2:]  =", wick_inner((2,), (2,), gv1, gvh, np.array([[0.5]])))

# Monte Carlo agrees: sample the pair and average the product of monomials
chol = np.linalg.cholesky(gv.cov)
draws = rng.standard_normal((200_000, 2)) @ chol.T
vals = wick_monomial_value(WickValueContext(gv, (draws[:, 0], draws[:, 1])), (1, 1))
exact = wick_inner((1, 1), (1, 1), gv, gv, gv.cov)
print(f"\nMC E[(:W_s W_t:)^2] = {np.mean(np.asarray(vals) ** 2):.5f}  exact = {exact:.5f}")
