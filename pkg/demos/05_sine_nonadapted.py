"""A genuinely infinite chaos integrand: sin(W_s + W_{1/2}).

The sine of a Gaussian has an explicit chaos series (odd Wick powers with
factorially decaying coefficients), truncated here at a configurable total
degree with an exactly computed L2 tail.  The truncation inherits the C / n
error law with a constant that the rate study reproduces.

Run:  python3 demos/05_sine_nonadapted.py        (a few minutes)
"""

import math

from skorohod import (
    EvaluationPlan,
    RateStudyConfig,
    constant_C,
    expansion_value,
    rate_study,
    sine,
    sine_truncation_tail,
)

degree = 9
u = sine((0.5,), degree)
print(f"truncation degree {degree}: {len(u.terms)} terms, "
      f"L2 tail {sine_truncation_tail((0.5,), degree):.2e}")

# pointwise sanity: the truncated series tracks sin itself
for w_s, w_tau in ((0.3, -0.2), (1.0, 0.5), (-1.5, 0.8)):
    got = expansion_value(u, 0.7, w_s, (w_tau,))
    print(f"  at (W_s, W_tau) = ({w_s:+.1f}, {w_tau:+.1f}): "
          f"series {got:+.6f}  sin {math.sin(w_s + w_tau):+.6f}")

c = constant_C(u)
cfg = RateStudyConfig(u=u, n_list=(4, 8, 16, 32), paths=20_000, seed=5,
                      plan=EvaluationPlan(fine_factor=32))
report = rate_study(cfg)
print(f"\nC = {c:.6f}")
for row in report.rows:
    print(f"  n={row.n:>3}: n*e_n = {row.n_e_hat:.5f} +- {3 * row.n * row.stderr:.5f} (3 SE)")
print(f"slope = {report.slope:.3f}")
