"""Three independent numerical routes to the same eigenvalues.

Rayleigh-Ritz gives upper bounds that drop as the basis grows. The
Riccati-Pade method finds roots of Hankel determinants, and these settle as
the order D increases. Finite differences provide a crude double-precision
check.
"""
import gmpy2

from kgcoulomb import fd_spectrum, rayleigh_ritz, rpm

sqrt6 = gmpy2.sqrt(gmpy2.mpfr(6))

for label, delta in (("+sqrt6", sqrt6), ("-sqrt6", -sqrt6)):
    print(f"== gamma=1, delta={label}")

    # variational bounds for growing basis size
    for N in (2, 5, 10, 15, 20):
        vals = rayleigh_ritz.ritz_values(1, delta, N)[:3]
        print(f"  RR  N={N:2d}: " + "  ".join(f"{float(w):.12f}" for w in vals))

    # Hankel roots: every D also carries the roots of the reflected problem,
    # which the shooting test removes
    s = rpm.rpm_spectrum(1, delta, (1, 16), D_max=10, tol=1e-7)
    print("  RPM D=10: " + "  ".join(f"{w:.12f}" for w in s.as_floats()))
    print("      movement D=9->10:", ["%.1e" % m for m in s.convergence])
    print("      roots set aside (they belong to -delta):", [round(w, 6) for w in s.metadata["mirror_roots"]])

    fd = fd_spectrum(1, float(delta))
    print("  FD       : " + "  ".join(f"{w:.9f}" for w in fd.as_floats()))
    print()
