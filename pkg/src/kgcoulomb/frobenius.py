"""Power-series solutions R = xi**gamma exp(-xi**2/2) sum_j a_j xi**j.

Substituting the ansatz into the radial equation gives the three-term
recurrence

    a_{j+2} = [delta a_{j+1} - (theta - 2 j) a_j] / ((j + 2)(j + 1 + alpha)),

with a_{-1} = 0, a_0 = 1, alpha = 2 gamma + 1 and theta = W - 2 (gamma + 1).
Choosing theta = 2 n and a root delta of a_{n+1}(delta) = 0 terminates the
series after a_n; each such pair gives one exact eigenvalue W = 2 n + 2 (gamma + 1)
for one special delta. This module builds those families and nothing more:
it does not claim they exhaust the spectrum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpfr

from ._mp import DEFAULT_PRECISION, exact_rational, precision, to_mpfr
from .core_model import RootFindingError, frequency_from_delta

ROOT_ACCEPT_TOL = 1e-10


@dataclass(frozen=True)
class RecurrenceContext:
    gamma: mpfr
    delta: mpfr
    theta: mpfr

    @property
    def alpha(self) -> mpfr:
        return 2 * self.gamma + 1

    @property
    def W(self) -> mpfr:
        return self.theta + 2 * (self.gamma + 1)

    @classmethod
    def from_W(cls, gamma, delta, W, precision_bits: int = DEFAULT_PRECISION) -> "RecurrenceContext":
        with precision(precision_bits):
            g = to_mpfr(gamma)
            return cls(g, to_mpfr(delta), to_mpfr(W) - 2 * (g + 1))

    @classmethod
    def make(cls, gamma, delta, theta, precision_bits: int = DEFAULT_PRECISION) -> "RecurrenceContext":
        with precision(precision_bits):
            return cls(to_mpfr(gamma), to_mpfr(delta), to_mpfr(theta))


@dataclass(frozen=True)
class SeriesTable:
    context: RecurrenceContext
    coefficients: tuple

    @property
    def J(self) -> int:
        return len(self.coefficients) - 1


def recurrence_step(ctx: RecurrenceContext, a_j, a_j1, j: int):
    """Return a_{j+2} from a_j and a_{j+1}."""
    if j < -1:
        raise ValueError(f"recurrence index must be >= -1, got {j}")
    return (ctx.delta * a_j1 - (ctx.theta - 2 * j) * a_j) / ((j + 2) * (j + 1 + ctx.alpha))


def series_coefficients(ctx: RecurrenceContext, J: int, precision_bits: int = DEFAULT_PRECISION) -> SeriesTable:
    """Coefficients a_0..a_J of the Frobenius series."""
    if J < 0:
        raise ValueError(f"J must be non-negative, got {J}")
    with precision(precision_bits):
        coeffs = [mpfr(1)]
        prev = mpfr(0)
        for j in range(-1, J - 1):
            nxt = recurrence_step(ctx, prev, coeffs[-1], j)
            prev = coeffs[-1]
            coeffs.append(nxt)
    return SeriesTable(ctx, tuple(coeffs))


def evaluate_solution(table: SeriesTable, xi, precision_bits: int = DEFAULT_PRECISION) -> mpfr:
    """R(xi) = xi**gamma exp(-xi**2/2) times the polynomial part (Horner)."""
    with precision(precision_bits):
        x = to_mpfr(xi)
        if not x > 0:
            raise ValueError(f"xi must be positive, got {xi}")
        acc = mpfr(0)
        for a in reversed(table.coefficients):
            acc = acc * x + a
        return x ** table.context.gamma * gmpy2.exp(-x * x / 2) * acc


# --- truncation families ---------------------------------------------------

def _coerce_gamma(gamma):
    """Exact Fraction for rational input, else mpfr at the current precision."""
    q = exact_rational(gamma)
    if q is not None:
        if q <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        return q
    g = to_mpfr(gamma)
    if not g > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return g


def truncation_polynomial(gamma, n: int, precision_bits: int = DEFAULT_PRECISION) -> tuple:
    """Coefficients (ascending powers of delta) of a_{n+1}(delta) with theta = 2 n.

    Coefficients are exact Fractions when ``gamma`` is given exactly (int,
    Fraction or decimal string) and ``mpfr`` otherwise.
    """
    if n < 1:
        raise ValueError(f"truncation order n must be >= 1, got {n}")
    with precision(precision_bits):
        g = _coerce_gamma(gamma)
        alpha = 2 * g + 1
        theta = 2 * n
        zero = Fraction(0) if isinstance(g, Fraction) else mpfr(0)
        prev: list = [zero]
        cur: list = [zero + 1]
        for j in range(-1, n):
            shifted = [zero] + cur
            lagged = prev + [zero] * (len(shifted) - len(prev))
            scale = (j + 2) * (j + 1 + alpha)
            nxt = [(s - (theta - 2 * j) * p) / scale for s, p in zip(shifted, lagged)]
            prev, cur = cur, nxt
    return tuple(cur)


def poly_eval(coeffs, x):
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class TruncationFamily:
    """Exact solutions with theta = 2 n and a_{n+1}(delta) = 0."""

    n: int
    gamma: mpfr
    theta: int
    W: mpfr
    delta_roots: tuple
    trivial: tuple
    residuals: tuple
    discarded_complex: int = 0

    @property
    def nontrivial_roots(self) -> tuple:
        return tuple(d for d, t in zip(self.delta_roots, self.trivial) if not t)

    def allowed_omegas(self, m, f, precision_bits: int = DEFAULT_PRECISION) -> list[tuple]:
        """(delta, omega, sign_consistent) for each non-trivial root.

        ``sign_consistent`` is False when sign(delta) differs from sign(f),
        i.e. the root cannot arise from that coupling at any frequency.
        """
        out = []
        for d in self.nontrivial_roots:
            omega = frequency_from_delta(m, f, d, precision_bits)
            out.append((d, omega, (d > 0) == (float(f) > 0)))
        return out


def _newton_polish(coeffs_mp, x0, max_iter: int = 200):
    deriv = [k * c for k, c in enumerate(coeffs_mp)][1:]
    x = x0
    eps = gmpy2.mul_2exp(mpfr(1), 16 - gmpy2.get_context().precision)
    for _ in range(max_iter):
        d = poly_eval(deriv, x)
        if d == 0:
            break
        step = poly_eval(coeffs_mp, x) / d
        x -= step
        if abs(step) <= eps * max(1, abs(x)):
            return x
    raise RootFindingError(f"Newton polishing stalled near delta = {float(x0):.6g}")


def truncation_solve(gamma, n: int, precision_bits: int = DEFAULT_PRECISION) -> TruncationFamily:
    """All real delta for which the series truncates at degree n, with W.

    The polynomial has the parity of n + 1, so its roots are found from the
    companion matrix of the reduced polynomial in delta**2, then polished by
    Newton's method at full precision and re-checked against the recurrence.
    """
    coeffs = truncation_polynomial(gamma, n, precision_bits)
    with precision(precision_bits):
        g = to_mpfr(_coerce_gamma(gamma))
        coeffs_mp = [to_mpfr(c) for c in coeffs]
        odd = (n + 1) % 2
        reduced = [float(c) for c in coeffs_mp[odd::2]]
        lead = max(abs(c) for c in reduced)
        squares = np.polynomial.polynomial.polyroots([c / lead for c in reduced]) if len(reduced) > 1 else []
        roots = [mpfr(0)] if odd else []
        discarded = 0
        for s in squares:
            if abs(s.imag) > 1e-8 * max(1.0, abs(s.real)) or s.real <= 0:
                discarded += 2
                continue
            r = _newton_polish(coeffs_mp, mpfr(math.sqrt(s.real)))
            roots.extend([r, -r])
        roots.sort()

        residuals = []
        ctx_theta = mpfr(2 * n)
        for r in roots:
            ctx = RecurrenceContext(g, r, ctx_theta)
            a = series_coefficients(ctx, n + 1, precision_bits).coefficients
            scale = max(abs(x) for x in a[: n + 1])
            res = abs(a[n + 1]) / scale
            if not res < ROOT_ACCEPT_TOL:
                raise RootFindingError(
                    f"root delta={float(r):.12g} fails back-substitution: |a_{n + 1}|/scale = {float(res):.3e}"
                )
            residuals.append(res)
        W = ctx_theta + 2 * (g + 1)
    return TruncationFamily(
        n=n,
        gamma=g,
        theta=2 * n,
        W=W,
        delta_roots=tuple(roots),
        trivial=tuple(r == 0 for r in roots),
        residuals=tuple(residuals),
        discarded_complex=discarded,
    )


def on_truncation_family(gamma, delta, n_max: int = 10, tol: float = 1e-9,
                         precision_bits: int = DEFAULT_PRECISION) -> list[tuple[int, mpfr]]:
    """(n, W) for every family n <= n_max that has a root within ``tol`` of delta."""
    hits = []
    d = float(delta)
    for n in range(1, n_max + 1):
        fam = truncation_solve(gamma, n, precision_bits)
        if any(abs(float(r) - d) <= tol for r in fam.nontrivial_roots):
            hits.append((n, fam.W))
    return hits


# --- shooting test on the series -------------------------------------------

def _shooting_radius(theta: float, alpha: float) -> int:
    x = 6
    while x * x - (abs(theta) + alpha + 2) * math.log(x) < 60:
        x += 1
    return x


def shooting_defect(gamma, delta, W, precision_bits: int = DEFAULT_PRECISION) -> float:
    """Newton step |P/P_W| of the series' polynomial part P(X; W) far from the origin.

    For large X, P(X; W) is dominated by an exp(X**2) component whose amplitude
    vanishes exactly at eigenvalues of the (gamma, delta) problem. The Newton
    step is therefore ~ the distance to the nearest eigenvalue: tiny for a
    genuine eigenvalue and O(level spacing) otherwise, in particular for
    eigenvalues that belong to the reflected problem with -delta.
    """
    with precision(precision_bits):
        g, d, w = to_mpfr(gamma), to_mpfr(delta), to_mpfr(W)
        theta0 = float(w) - 2 * (float(g) + 1)
        alpha0 = 2 * float(g) + 1
    X = _shooting_radius(theta0, alpha0)
    wp = precision_bits + int(X * X * 1.4427) + 64
    with precision(wp):
        g, d, w = to_mpfr(gamma), to_mpfr(delta), to_mpfr(W)
        alpha = 2 * g + 1
        theta = w - 2 * (g + 1)
        x = mpfr(X)
        a_prev, a_cur = mpfr(0), mpfr(1)
        b_prev, b_cur = mpfr(0), mpfr(0)
        p, dp = mpfr(1), mpfr(0)
        xp = mpfr(1)
        peak = mpfr(1)
        tiny = gmpy2.mul_2exp(mpfr(1), -wp)
        j = -1
        limit = 20 * X * X + 200
        while True:
            scale = (j + 2) * (j + 1 + alpha)
            a_next = (d * a_cur - (theta - 2 * j) * a_prev) / scale
            b_next = (d * b_cur - (theta - 2 * j) * b_prev - a_prev) / scale
            a_prev, a_cur = a_cur, a_next
            b_prev, b_cur = b_cur, b_next
            xp *= x
            ta, tb = a_cur * xp, b_cur * xp
            p += ta
            dp += tb
            peak = max(peak, abs(ta), abs(tb))
            j += 1
            if j > 2 * X * X and abs(ta) <= tiny * peak and abs(tb) <= tiny * peak:
                break
            if j > limit:
                raise RootFindingError(f"shooting series did not converge at W={float(w):.6g}")
        if dp == 0:
            return math.inf
        return float(abs(p / dp))
