"""W_nu(delta) is a smooth function of delta, including near the special points.

Solving the truncation condition for omega = 4 m f^2 / delta^2 suggests that
only isolated frequencies are allowed. A scan in delta shows eigenvalues at
every delta, passing straight through sqrt(6) with no change of behaviour.
"""
import numpy as np

from kgcoulomb import converge_spectrum, truncation_solve
from kgcoulomb.oracle import asymmetry_check

gamma = 1
special = [float(r) for r in truncation_solve(gamma, 1).nontrivial_roots]
print("truncation points for n=1:", special)

deltas = np.round(np.arange(2.40, 2.5001, 0.01), 2)
print("\n delta      W0            W1            W2")
prev = None
for d in deltas:
    w = converge_spectrum(gamma, float(d), 3, 1e-9).as_floats()
    jump = "" if prev is None else f"   max step {max(abs(a - b) for a, b in zip(w, prev)):.4f}"
    print(f" {d:.2f}  " + "  ".join(f"{x:.9f}" for x in w) + jump)
    prev = w

# the curve for -delta is a different curve
print("\n delta   W_nu(delta) - W_nu(-delta)   (finite differences)")
for d in (0.5, 1.0, 2.0, 6 ** 0.5, 4.0):
    rows = asymmetry_check(gamma, d, 3)
    print(f" {d:5.3f}  " + "  ".join(f"{r.difference:+.6f}" for r in rows))
