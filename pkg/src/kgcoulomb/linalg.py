"""Dense linear algebra on object arrays of ``mpfr``.

Only what the solvers need: Cholesky, triangular solves, cyclic Jacobi for
symmetric eigenvalues and a partially pivoted determinant. Every routine works
at whatever precision the surrounding context provides.
"""
from __future__ import annotations

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .core_model import ConvergenceError, PrecisionError


def zeros(n: int, m: int | None = None) -> np.ndarray:
    m = n if m is None else m
    out = np.empty((n, m), dtype=object)
    out.fill(mpfr(0))
    return out


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``a = L @ L.T``.

    Raises PrecisionError when a pivot is not positive, which for the Gram
    matrices used here means the working precision is too low.
    """
    n = a.shape[0]
    low = zeros(n)
    for j in range(n):
        s = a[j, j] - (np.dot(low[j, :j], low[j, :j]) if j else 0)
        if not s > 0:
            raise PrecisionError(
                f"Cholesky pivot {j} of {n} is non-positive ({float(s):.3e}); "
                f"increase precision (now {gmpy2.get_context().precision} bits)"
            )
        ljj = gmpy2.sqrt(s)
        low[j, j] = ljj
        for i in range(j + 1, n):
            t = a[i, j] - (np.dot(low[i, :j], low[j, :j]) if j else 0)
            low[i, j] = t / ljj
    return low


def solve_lower(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``low @ x = b`` for a lower-triangular ``low`` (b may be 2-D)."""
    n = low.shape[0]
    x = np.empty_like(b)
    for i in range(n):
        acc = b[i] - (low[i, :i] @ x[:i] if i else 0)
        x[i] = acc / low[i, i]
    return x


def congruence_reduce(h: np.ndarray, low: np.ndarray) -> np.ndarray:
    """Return ``inv(L) @ h @ inv(L).T``, symmetrised."""
    y = solve_lower(low, h)
    a = solve_lower(low, y.T.copy())
    return (a + a.T) / 2


def jacobi_eigenvalues(a: np.ndarray, tol=None, max_sweeps: int = 60) -> list:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``tol * ||diag||``; ``tol`` defaults to a few ulps of the context precision.
    """
    a = a.copy()
    n = a.shape[0]
    if n == 1:
        return [a[0, 0]]
    if tol is None:
        tol = gmpy2.mul_2exp(mpfr(1), 8 - gmpy2.get_context().precision)
    for _ in range(max_sweeps):
        off = sum(a[i, j] ** 2 for i in range(n) for j in range(i + 1, n))
        diag = sum(a[i, i] ** 2 for i in range(n))
        if off <= tol * tol * diag:
            return sorted(a[i, i] for i in range(n))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2 * apq)
                t = 1 / (abs(tau) + gmpy2.sqrt(1 + tau * tau))
                if tau < 0:
                    t = -t
                c = 1 / gmpy2.sqrt(1 + t * t)
                s = t * c
                rp = a[p].copy()
                rq = a[q].copy()
                a[p] = c * rp - s * rq
                a[q] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
    raise ConvergenceError(f"Jacobi rotations did not converge in {max_sweeps} sweeps (n={n})")


def determinant(a: np.ndarray):
    """Determinant by Gaussian elimination with partial pivoting."""
    a = a.copy()
    n = a.shape[0]
    det = mpfr(1)
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(a[r, k]))
        if a[piv, k] == 0:
            return mpfr(0)
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            det = -det
        det *= a[k, k]
        if k + 1 < n:
            factors = a[k + 1:, k] / a[k, k]
            a[k + 1:, k:] = a[k + 1:, k:] - np.outer(factors, a[k, k:])
    return det
