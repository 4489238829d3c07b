"""The stochastic change-of-value identity, realized path by path.

For an integrand model F(t, W_t, W_tau) the identity

    F(1, W_1, W_tau) - F(0, W_0, W_tau)
        = (stochastic integral of dF/dx_1) + (time integral of the drift)

holds along every path; both sides are computed here from one trajectory.

Run:  python3 demos/02_change_of_value_identity.py
"""

import numpy as np

from skorohod import (
    EvaluationPlan,
    expansion_value,
    fine_grid,
    ito_decompose,
    pathwise_time_integral,
    sample_path,
    skorohod_pathwise,
    square,
    tau_linear,
)

plan = EvaluationPlan(fine_factor=64)
rng = np.random.default_rng(7)

# W_t^2 in chaos form is t + :W_t^2:; its decomposition recovers the classic
# W_1^2 = 2 int W dW + 1.
u = square()
integrand, drift = ito_decompose(u)
print("d/dx of W_t^2  ->", [(t.exponents, t.coeff(0.0)) for t in integrand.terms])
print("drift of W_t^2 ->", [(t.exponents, t.coeff(0.0)) for t in drift.terms])

grid = fine_grid(8, (), plan)
for k in range(3):
    path = sample_path(grid, rng)
    w1 = float(path.values[-1])
    lhs = expansion_value(u, 1.0, w1, ()) - expansion_value(u, 0.0, 0.0, ())
    rhs = skorohod_pathwise(integrand, path, plan) + pathwise_time_integral(drift, path, plan)
    print(f"path {k}: F(1)-F(0) = {lhs:+.6f}   integral form = {rhs:+.6f}")

# A nonadapted integrand: s * W_{1/2}.  The drift keeps the frozen factor.
u2 = tau_linear(0.5)
integrand2, drift2 = ito_decompose(u2)
grid2 = fine_grid(8, (0.5,), plan)
path = sample_path(grid2, rng)
tau_col = int(np.argmin(np.abs(grid2 - 0.5)))
w_tau = (float(path.values[tau_col]),)
lhs = expansion_value(u2, 1.0, float(path.values[-1]), w_tau)
lhs -= expansion_value(u2, 0.0, 0.0, w_tau)
rhs = skorohod_pathwise(integrand2, path, plan) + pathwise_time_integral(drift2, path, plan)
print(f"\nnonadapted:  F(1)-F(0) = {lhs:+.6f}   integral form = {rhs:+.6f}")
