"""Consensus-time exponents: the predicted curves and a desk-scale fit.

The predicted exponent of the expected consensus time is piecewise linear in
the temperature theta.  For the classical dynamics it first falls and then
rises again (the double stars take over at high theta); for the discursive
dynamics it never increases.  A scaling run fits log E[tau] against log N.
Polylogarithmic factors bend the fitted slope at these sizes, so the
comparison is loose by design.
"""

import numpy as np

from irgvoter import GraphSpec, RngStream
from irgvoter.experiments import scaling_experiment, theoretical_exponent, thresholds

gamma = 1 / 3
print("theta  classical  discursive  classical(component 1)")
for theta in np.arange(-1.0, 2.51, 0.5):
    print(f"{theta:5.2f}  {theoretical_exponent(gamma, theta, 'classical'):9.4f}  "
          f"{theoretical_exponent(gamma, theta, 'discursive'):10.4f}  "
          f"{theoretical_exponent(gamma, theta, 'classical', 'component1'):9.4f}")
print("classical thresholds:", [round(t, 4) for t in thresholds(gamma, "classical")])

res = scaling_experiment(GraphSpec(256, 0.1, 0.4), "discursive", 1.0, [256, 512, 1024, 2048], 60,
                         RngStream(7, "scaling"), n_boot=200)
for p in res.per_N:
    print(f"N={p.N:5d}  mean tau {p.mean:8.3f} +- {p.stderr:.3f}")
print(f"fitted slope {res.slope:.3f} [{res.ci_low:.3f}, {res.ci_high:.3f}], predicted {res.theory:.3f}, "
      f"verdict {res.verdict}")
