"""Where does the polynomial solution sit in the real spectrum?

The series R = xi^gamma exp(-xi^2/2) sum a_j xi^j terminates only when
W = 2n + 2(gamma + 1) and delta is a root of a_{n+1}(delta). Those roots come in
+- pairs, so the polynomial solution has the same W for delta and -delta.
The actual spectrum is not symmetric, and the exact level lands at a different
position nu on the two sides.
"""
import gmpy2

from kgcoulomb import converge_spectrum, truncation_solve
from kgcoulomb.core_model import format_real

gamma = 1
for n in (1, 2, 3):
    fam = truncation_solve(gamma, n)
    print(f"n={n}: theta={fam.theta}  W={format_real(fam.W)}")
    for d, trivial in zip(fam.delta_roots, fam.trivial):
        spec = converge_spectrum(gamma, d, n + 3, 1e-10)
        nu = [k for k, w in enumerate(spec.eigenvalues) if abs(w - fam.W) < 1e-20]
        below = ", ".join(format_real(w, 10) for w in spec.eigenvalues[: nu[0]]) if nu else "?"
        tag = " (delta=0, no coupling)" if trivial else ""
        print(f"   delta={format_real(d):>15}{tag}: W is level nu={nu[0]}; below it: [{below}]")

# n=1 is the textbook case: +-sqrt(6) both give W=6 ...
sqrt6 = gmpy2.sqrt(gmpy2.mpfr(6))
plus = converge_spectrum(1, sqrt6, 3, 1e-10).as_floats()
minus = converge_spectrum(1, -sqrt6, 3, 1e-10).as_floats()
print()
print("delta=+sqrt6:", [round(w, 9) for w in plus])
print("delta=-sqrt6:", [round(w, 9) for w in minus])
# ... but only on the + side is it the ground state
print("W0(+) - W0(-) =", round(plus[0] - minus[0], 9))
