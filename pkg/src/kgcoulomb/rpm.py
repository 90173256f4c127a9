"""Riccati-Pade eigenvalues from Hankel determinants.

With R = xi**(-1/2) phi the radial equation becomes

    phi'' + [W - xi**2 - delta/xi - (gamma**2 - 1/4)/xi**2] phi = 0,

and f(xi) = (gamma + 1/2)/xi - phi'/phi is regular at the origin. Its Taylor
coefficients obey

    f_0 = -delta/(2 gamma + 1),
    f_{k+1} = [sum_{i=0}^{k} f_i f_{k-i} - b_k] / (k + 2 gamma + 2),

with b_0 = -W, b_2 = 1 and b_k = 0 otherwise. Eigenvalues are the limits of
roots of H_D^d(W) = det[f_{d+i+j+1}]_{i,j<D} as D grows.

f_k has the parity (-1)**(k+1) under delta -> -delta, so every Hankel
determinant is invariant under that reflection and its roots approximate the
union of both spectra. ``rpm_spectrum`` keeps the roots that belong to the
requested sign of delta (decided by a shooting test on the Frobenius series)
and reports the others as mirror roots.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import flint
import gmpy2
import numpy as np
from gmpy2 import mpfr

from . import linalg
from ._mp import DEFAULT_PRECISION, precision, to_mpfr
from .core_model import KGError, Spectrum
from .frobenius import shooting_defect

log = logging.getLogger(__name__)

DEFAULT_SHIFT = 1
BRANCH_TOL = 1e-4


@dataclass(frozen=True)
class RiccatiSeries:
    gamma: mpfr
    delta: mpfr
    W: mpfr
    f_coeffs: tuple
    precision_bits: int = DEFAULT_PRECISION


@dataclass(frozen=True)
class HankelSpec:
    D: int
    d: int = DEFAULT_SHIFT

    def __post_init__(self):
        if self.D < 1:
            raise ValueError(f"Hankel dimension must be >= 1, got {self.D}")
        if self.d < 0:
            raise ValueError(f"Hankel shift must be >= 0, got {self.d}")

    @property
    def required_K(self) -> int:
        return self.d + 2 * self.D - 1

    def degree_bound(self) -> int:
        """Upper bound on the degree of H_D^d as a polynomial in W."""
        return self.D * (self.D + self.d + 1) // 2


def _coefficients(g: mpfr, d: mpfr, w: mpfr, K: int) -> list:
    f = [-d / (2 * g + 1)]
    for k in range(K):
        acc = sum((f[i] * f[k - i] for i in range(k + 1)), mpfr(0))
        if k == 0:
            acc += w
        elif k == 2:
            acc -= 1
        f.append(acc / (k + 2 * g + 2))
    return f


def riccati_coefficients(gamma, delta, W, K: int, precision_bits: int = DEFAULT_PRECISION) -> RiccatiSeries:
    """Taylor coefficients f_0..f_K of the regularised Riccati function."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    with precision(precision_bits):
        g, d, w = to_mpfr(gamma), to_mpfr(delta), to_mpfr(W)
        if not g > 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        f = _coefficients(g, d, w, K)
    return RiccatiSeries(g, d, w, tuple(f), precision_bits)


def hankel_matrix(f, spec: HankelSpec) -> np.ndarray:
    D, s = spec.D, spec.d
    if len(f) <= spec.required_K:
        raise KGError(
            f"Hankel D={D}, d={s} needs coefficients up to f_{spec.required_K}, only {len(f)} available"
        )
    a = linalg.zeros(D)
    for i in range(D):
        for j in range(D):
            a[i, j] = f[s + i + j + 1]
    return a


def hankel_determinant(series: RiccatiSeries, spec: HankelSpec) -> mpfr:
    """det[f_{d+i+j+1}] by partially pivoted elimination."""
    with precision(series.precision_bits):
        return linalg.determinant(hankel_matrix(series.f_coeffs, spec))


# --- roots of H_D^d(W) -------------------------------------------------------

@dataclass
class HankelRoots:
    D: int
    d: int
    roots: list
    degenerate: bool = False
    degree: int = 0


def _to_fmpq(x: mpfr) -> "flint.fmpq":
    num, den = x.as_integer_ratio()
    return flint.fmpq(int(num), int(den))


def _arb_mid_to_mpfr(a) -> mpfr:
    man, exp = a.mid().man_exp()
    return gmpy2.mul_2exp(mpfr(int(man)), int(exp))


def hankel_roots(gamma, delta, D: int, window, d: int = DEFAULT_SHIFT,
                 precision_bits: int = DEFAULT_PRECISION, imag_tol: float = 1e-12) -> HankelRoots:
    """All real roots of H_D^d(W) inside ``window``.

    H_D^d is a polynomial in W of known maximal degree, so it is sampled at
    Chebyshev nodes of the window, converted exactly to a rational polynomial
    and handed to a certified complex root isolator. Unlike sign-change
    scanning this resolves the tight root clusters that build up around each
    eigenvalue. Roots whose imaginary part is below ``imag_tol`` are treated as
    real: a k-fold root perturbed by rounding splits into a small complex
    star of radius ~ eps**(1/k).
    """
    spec = HankelSpec(D, d)
    deg = spec.degree_bound()
    n = deg + 1
    wp = precision_bits + 2 * deg + 64
    with precision(precision_bits):
        g_in, d_in = to_mpfr(gamma), to_mpfr(delta)
        lo, hi = to_mpfr(window[0]), to_mpfr(window[1])
    if not lo < hi:
        raise ValueError(f"empty search window [{window[0]}, {window[1]}]")
    with precision(wp):
        g, dl = mpfr(g_in), mpfr(d_in)
        mid, rad = (lo + hi) / 2, (hi - lo) / 2
        pi = gmpy2.const_pi()
        nodes = [gmpy2.cos(pi * (k + mpfr(0.5)) / n) for k in range(n)]
        values = []
        for t in nodes:
            f = _coefficients(g, dl, mid + rad * t, spec.required_K)
            values.append(linalg.determinant(hankel_matrix(f, spec)))
        if all(v == 0 for v in values):
            return HankelRoots(D, d, [], degenerate=True)
        # Chebyshev coefficients by the discrete cosine sum
        cheb = []
        for j in range(n):
            s = sum((v * gmpy2.cos(pi * j * (k + mpfr(0.5)) / n) for k, v in enumerate(values)), mpfr(0))
            cheb.append(s * 2 / n)
        cheb[0] /= 2
        big = max(abs(c) for c in cheb)
        # drop only what is indistinguishable from rounding at the working precision
        cut = big * gmpy2.mul_2exp(mpfr(1), 16 + 2 * n.bit_length() - wp)
        while len(cheb) > 1 and abs(cheb[-1]) <= cut:
            cheb.pop()
        poly = flint.fmpq_poly([0])
        for j, c in enumerate(cheb):
            if c != 0:
                poly += _to_fmpq(c / big) * flint.fmpq_poly(flint.fmpz_poly.chebyshev_t(j))
        if poly.degree() < 1:
            return HankelRoots(D, d, [], degree=max(poly.degree(), 0))
        old = flint.ctx.prec
        flint.ctx.prec = wp
        try:
            isolated = poly.numer().complex_roots()
        finally:
            flint.ctx.prec = old
        found = []
        for z, mult in isolated:
            w_re = mid + rad * _arb_mid_to_mpfr(z.real)
            w_im = rad * abs(_arb_mid_to_mpfr(z.imag))
            if w_im <= imag_tol and lo <= w_re <= hi:
                found.extend([w_re] * mult)
    with precision(precision_bits):
        found = sorted(mpfr(r) for r in found)
    return HankelRoots(D, d, found, degree=poly.degree())


# --- the method --------------------------------------------------------------

def default_window(gamma, delta, count: int, margin: float = 0.5) -> tuple[float, float]:
    """A search interval that brackets the lowest ``count`` eigenvalues.

    The lower end is a bound on W_0: 2 gamma + 2 for delta >= 0 (a repulsive
    Coulomb term only raises levels) and the pure two-dimensional Coulomb
    ground level -delta**2/(2 gamma + 1)**2 for delta < 0 (dropping the
    oscillator only lowers them). The upper end is a small Rayleigh-Ritz
    calculation, which bounds W_{count-1} from above.
    """
    from .rayleigh_ritz import ritz_values

    g, d = float(gamma), float(delta)
    lo = 2 * g + 2 if d >= 0 else -d * d / (2 * g + 1) ** 2
    upper = ritz_values(gamma, delta, max(count + 4, 10))[count - 1]
    return lo - margin, float(upper) + margin


@dataclass
class _Tracked:
    W: mpfr
    movement: float
    history: list = field(default_factory=list)


def _nearest(x, pool):
    best = None
    for p in pool:
        if best is None or abs(p - x) < abs(best - x):
            best = p
    return best


def rpm_spectrum(gamma, delta, search_interval, D_max: int = 10, tol: float = 1e-8,
                 d: int = DEFAULT_SHIFT, precision_bits: int = DEFAULT_PRECISION,
                 D_min: int = 2, branch_tol: float = BRANCH_TOL) -> Spectrum:
    """Eigenvalues in ``search_interval`` whose Hankel roots settle as D grows.

    For every D in [D_min, D_max] all real roots of H_D^d are located. A root
    at D_max is converged when the nearest root at the previous non-degenerate
    D lies within ``tol``; clusters of converged roots closer than 10*tol are
    merged, keeping the member that moved least. Each survivor is then checked
    against the Frobenius shooting test and kept only if it belongs to this
    sign of delta; the rest are recorded as ``mirror_roots``.
    """
    lo, hi = search_interval
    if not float(lo) < float(hi):
        raise ValueError(f"search interval must satisfy W_lo < W_hi, got {search_interval}")
    if D_max < 2:
        raise ValueError(f"D_max must be >= 2, got {D_max}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    per_D: dict[int, HankelRoots] = {}
    for D in range(max(1, D_min), D_max + 1):
        per_D[D] = hankel_roots(gamma, delta, D, search_interval, d, precision_bits, imag_tol=tol)
    usable = [D for D in sorted(per_D) if not per_D[D].degenerate]
    meta = {
        "D": D_max, "d": d, "precision_bits": precision_bits,
        "window": (float(lo), float(hi)),
        "roots_per_D": {D: [float(r) for r in per_D[D].roots] for D in per_D},
        "degenerate_D": [D for D in per_D if per_D[D].degenerate],
    }
    if len(usable) < 2 or usable[-1] != D_max:
        meta["diagnostic"] = "not enough non-degenerate Hankel orders to judge convergence"
        return Spectrum("rpm", (), (), (), meta)

    last, before = per_D[usable[-1]].roots, per_D[usable[-2]].roots
    candidates = []
    for r in last:
        p = _nearest(r, before)
        mv = float(abs(r - p)) if p is not None else math.inf
        if mv < tol:
            candidates.append(_Tracked(r, mv))
    # merge clusters
    merged: list[_Tracked] = []
    for c in sorted(candidates, key=lambda c: c.W):
        if merged and float(c.W - merged[-1].W) < 10 * tol:
            if c.movement < merged[-1].movement:
                merged[-1] = c
        else:
            merged.append(c)
    # follow each survivor back through the lower orders
    for c in merged:
        cur = c.W
        for k in range(len(usable) - 1, 0, -1):
            p = _nearest(cur, per_D[usable[k - 1]].roots)
            if p is None:
                break
            c.history.append((usable[k], float(abs(cur - p))))
            cur = p
        c.history.reverse()

    kept, mirror = [], []
    for c in merged:
        defect = shooting_defect(gamma, delta, c.W, precision_bits)
        (kept if defect < branch_tol else mirror).append((c, defect))
    meta["mirror_roots"] = [float(c.W) for c, _ in mirror]
    meta["shooting_defects"] = {float(c.W): dft for c, dft in kept + mirror}
    meta["movement_history"] = [c.history for c, _ in kept]
    meta["unconverged_roots"] = [float(r) for r in last if all(abs(r - c.W) >= 10 * tol for c in candidates)]
    if not kept:
        meta["diagnostic"] = "no converged roots in the search interval"
    return Spectrum(
        method="rpm",
        eigenvalues=tuple(c.W for c, _ in kept),
        convergence=tuple(c.movement for c, _ in kept),
        converged=tuple(True for _ in kept),
        metadata=meta,
    )
