"""Rayleigh-Ritz upper bounds in the basis u_j = xi**(gamma + j) exp(-xi**2/2).

With the radial measure xi dxi and one integration by parts, every matrix
element reduces to moments M(p) = int_0^inf xi**p exp(-xi**2) dxi
= Gamma((p + 1)/2) / 2. Writing p = 2 gamma + i + j,

    S_ij = M(p + 1)
    H_ij = [(gamma + i)(gamma + j) + gamma**2] M(p - 1) + delta M(p)
           - p M(p + 1) + 2 M(p + 3).

The Gram matrix of monomial-Gaussian functions is Hilbert-like, so both the
matrices and the eigensolve are carried out in extended precision.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpfr

from . import linalg
from ._mp import DEFAULT_PRECISION, precision, to_mpfr
from .core_model import PrecisionError, Spectrum

log = logging.getLogger(__name__)

N_STEP = 5
N_CAP = 60


def moment(p, precision_bits: int = DEFAULT_PRECISION) -> mpfr:
    """int_0^inf xi**p exp(-xi**2) dxi = Gamma((p+1)/2)/2, for p > -1."""
    with precision(precision_bits):
        p = to_mpfr(p)
        if not p > -1:
            raise ValueError(f"moment diverges for p <= -1 (p = {p})")
        return gmpy2.gamma((p + 1) / 2) / 2


class MomentTable:
    """M(2 gamma + k) for k = -1, 0, ..., kmax, filled by M(p+2) = (p+1)/2 M(p)."""

    def __init__(self, gamma, kmax: int, precision_bits: int = DEFAULT_PRECISION):
        self.precision_bits = precision_bits
        with precision(precision_bits):
            self.gamma = to_mpfr(gamma)
            if not self.gamma > 0:
                raise ValueError(f"gamma must be positive, got {gamma}")
            base = 2 * self.gamma
            vals = [moment(base - 1, precision_bits), moment(base, precision_bits)]
            for k in range(1, kmax + 1):
                p = base + k - 2
                vals.append((p + 1) / 2 * vals[k - 1])
        self._vals = vals
        self.kmax = kmax

    def __getitem__(self, k: int) -> mpfr:
        """M(2 gamma + k)."""
        if not -1 <= k <= self.kmax:
            raise IndexError(f"moment offset {k} outside [-1, {self.kmax}]")
        return self._vals[k + 1]

    @property
    def entries(self) -> dict:
        return {k: self[k] for k in range(-1, self.kmax + 1)}


@lru_cache(maxsize=64)
def _moment_table(gamma: mpfr, kmax: int, precision_bits: int) -> MomentTable:
    return MomentTable(gamma, kmax, precision_bits)


@dataclass(frozen=True)
class RitzMatrices:
    N: int
    S: np.ndarray
    H: np.ndarray
    gamma: mpfr
    delta: mpfr
    precision_bits: int


def build_matrices(gamma, delta, N: int, precision_bits: int = DEFAULT_PRECISION) -> RitzMatrices:
    """Overlap and Hamiltonian matrices for the first N basis functions."""
    if N < 1:
        raise ValueError(f"basis size must be >= 1, got {N}")
    with precision(precision_bits):
        g, d = to_mpfr(gamma), to_mpfr(delta)
        if not g > 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        M = _moment_table(g, 2 * N + 2, precision_bits)
        S = linalg.zeros(N)
        H = linalg.zeros(N)
        for i in range(N):
            for j in range(i, N):
                k = i + j
                p = 2 * g + k
                S[i, j] = S[j, i] = M[k + 1]
                H[i, j] = H[j, i] = (
                    ((g + i) * (g + j) + g * g) * M[k - 1] + d * M[k] - p * M[k + 1] + 2 * M[k + 3]
                )
    return RitzMatrices(N, S, H, g, d, precision_bits)


def solve_generalized(matrices: RitzMatrices) -> Spectrum:
    """All N Ritz values of H c = W S c via Cholesky reduction and Jacobi sweeps."""
    with precision(matrices.precision_bits):
        low = linalg.cholesky(matrices.S)
        reduced = linalg.congruence_reduce(matrices.H, low)
        values = linalg.jacobi_eigenvalues(reduced)
    n = matrices.N
    return Spectrum(
        method="rayleigh_ritz",
        eigenvalues=tuple(values),
        convergence=tuple(float("inf") for _ in range(n)),
        converged=tuple(False for _ in range(n)),
        metadata={"N": n, "precision_bits": matrices.precision_bits},
    )


def ritz_values(gamma, delta, N: int, precision_bits: int = DEFAULT_PRECISION) -> list:
    return list(solve_generalized(build_matrices(gamma, delta, N, precision_bits)).eigenvalues)


def converge_spectrum(gamma, delta, target_count: int, tol: float,
                      precision_bits: int = DEFAULT_PRECISION,
                      step: int = N_STEP, cap: int = N_CAP) -> Spectrum:
    """Grow the basis in steps of ``step`` until the lowest ``target_count`` values settle.

    The estimate recorded for each eigenvalue is its change over the last
    step. A PrecisionError while growing, or reaching ``cap``, returns the last
    good values flagged as unconverged.
    """
    if target_count < 1:
        raise ValueError("target_count must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    first = step * max(1, -(-target_count // step))
    prev = None
    history = []
    reason = "cap"
    N = first
    last_good = None
    while N <= cap:
        try:
            vals = ritz_values(gamma, delta, N, precision_bits)[:target_count]
        except PrecisionError as exc:
            log.warning("basis growth stopped at N=%d: %s", N, exc)
            reason = "precision"
            break
        history.append((N, vals))
        last_good = (N, vals)
        if prev is not None:
            diffs = [abs(a - b) for a, b in zip(vals, prev)]
            if all(dd < tol for dd in diffs):
                return _make(vals, diffs, tol, N, precision_bits, history, converged_reason="tol")
        prev = vals
        N += step
    if last_good is None:
        raise PrecisionError(f"no basis size up to {cap} could be solved at {precision_bits} bits")
    N, vals = last_good
    if len(history) >= 2:
        diffs = [abs(a - b) for a, b in zip(history[-1][1], history[-2][1])]
    else:
        diffs = [float("inf")] * len(vals)
    return _make(vals, diffs, tol, N, precision_bits, history, converged_reason=reason)


def _make(vals, diffs, tol, N, bits, history, converged_reason):
    return Spectrum(
        method="rayleigh_ritz",
        eigenvalues=tuple(vals),
        convergence=tuple(float(d) for d in diffs),
        converged=tuple(bool(d < tol) for d in diffs),
        metadata={"N": N, "precision_bits": bits, "stop_reason": converged_reason,
                  "history": [(n, [float(v) for v in vs]) for n, vs in history]},
    )
