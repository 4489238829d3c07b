"""First-order convergence of the optimal approximation error.

The root-mean-square gap e_n between the integral and its conditional
expectation given n equidistant observations decays like C / n, with

    C = sqrt( int_0^1 E[(L u)_s^2] ds / 12 ).

This script estimates e_n by Monte Carlo for two integrands, prints n * e_n
against C, and compares with the exact per-resolution error formula.

Run:  python3 demos/04_convergence_rate.py       (about a minute)
"""

from skorohod import (
    EvaluationPlan,
    RateStudyConfig,
    analytic_fn2,
    constant_C,
    rate_study,
    square,
    tau_linear,
)

plan = EvaluationPlan(fine_factor=32)

for name, u in (("W_s^2", square()), ("s * W_{1/2}", tau_linear(0.5))):
    cfg = RateStudyConfig(u=u, n_list=(4, 8, 16, 32), paths=20_000, seed=99, plan=plan)
    report = rate_study(cfg)
    print(f"\nintegrand {name}:   C = {report.c_analytic:.6f}")
    print(f"{'n':>4} {'e_n (MC)':>12} {'n e_n':>10} {'n f_n exact':>12}")
    for row in report.rows:
        fn = analytic_fn2(u, row.n) ** 0.5
        print(f"{row.n:>4} {row.e_hat:>12.6f} {row.n_e_hat:>10.5f} {row.n * fn:>12.5f}")
    print(f"fitted slope of log e_n vs log n: {report.slope:.3f}  (first order = -1)")
