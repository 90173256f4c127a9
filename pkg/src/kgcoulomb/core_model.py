"""Parameters, the physical <-> dimensionless maps and the energy relation.

The radial problem solved throughout the package is

    R'' + R'/xi - gamma**2/xi**2 R - delta/xi R - xi**2 R + W R = 0,

obtained from the Klein-Gordon oscillator with a Coulomb-type term through
``xi = sqrt(m*omega) * rho``. Only ``gamma`` and ``delta`` reach the solvers;
``m``, ``omega``, ``f`` and ``l`` matter for reporting energies.
Natural units (c = hbar = 1) are assumed everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import gmpy2
from gmpy2 import mpfr

from ._mp import DEFAULT_PRECISION, precision, to_mpfr


class KGError(Exception):
    """Base class for solver failures."""


class PrecisionError(KGError, ArithmeticError):
    """Working precision too low for the requested computation."""


class ConvergenceError(KGError, RuntimeError):
    """An iterative method ran out of iterations."""


class RootFindingError(KGError, RuntimeError):
    """A root could not be located or verified."""


@dataclass(frozen=True)
class PhysicalParameters:
    """Mass, oscillator frequency, Coulomb coupling and azimuthal number."""

    m: Any
    omega: Any
    f: Any
    l: int

    def __post_init__(self):
        if not float(self.m) > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if not float(self.omega) > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if int(self.l) != self.l:
            raise ValueError(f"l must be an integer, got {self.l}")
        if float(self.f) == 0 and self.l == 0:
            raise ValueError("f and l cannot both vanish (gamma must be positive)")


@dataclass(frozen=True)
class ReducedRadialProblem:
    """The pair (gamma, delta) that fully specifies the radial eigenproblem."""

    gamma: mpfr
    delta: mpfr

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not gmpy2.is_finite(mpfr(self.delta)):
            raise ValueError(f"delta must be finite, got {self.delta}")


@dataclass(frozen=True)
class EnergyRecord:
    W: mpfr
    E_squared: mpfr
    E_plus: mpfr | None
    E_minus: mpfr | None

    @property
    def has_real_energy(self) -> bool:
        return self.E_plus is not None


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues W_0 < W_1 < ... produced by one method.

    ``convergence[i]`` is the method's own error estimate for eigenvalue i and
    ``converged[i]`` whether that estimate met the requested tolerance.
    """

    method: str
    eigenvalues: tuple
    convergence: tuple
    converged: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("truncation", "rayleigh_ritz", "rpm", "oracle"):
            raise ValueError(f"unknown method label {self.method!r}")
        if len(self.convergence) != len(self.eigenvalues):
            raise ValueError("one convergence estimate per eigenvalue is required")
        if not self.converged:
            object.__setattr__(self, "converged", tuple(True for _ in self.eigenvalues))
        ev = self.eigenvalues
        if any(not ev[i] < ev[i + 1] for i in range(len(ev) - 1)):
            raise ValueError("eigenvalues must be strictly ascending")
        if any(c < 0 for c in self.convergence):
            raise ValueError("convergence estimates must be non-negative")

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def __getitem__(self, nu: int):
        return self.eigenvalues[nu]

    def as_floats(self) -> list[float]:
        return [float(w) for w in self.eigenvalues]

    @property
    def all_converged(self) -> bool:
        return all(self.converged)


def reduce(params: PhysicalParameters, precision_bits: int = DEFAULT_PRECISION) -> ReducedRadialProblem:
    """Map (m, omega, f, l) to gamma = sqrt(l^2 + f^2), delta = 2 m f / sqrt(m omega)."""
    with precision(precision_bits):
        m, omega, f = to_mpfr(params.m), to_mpfr(params.omega), to_mpfr(params.f)
        gamma = gmpy2.sqrt(mpfr(params.l) ** 2 + f * f)
        delta = 2 * m * f / gmpy2.sqrt(m * omega)
    return ReducedRadialProblem(gamma, delta)


def frequency_from_delta(m, f, delta, precision_bits: int = DEFAULT_PRECISION) -> mpfr:
    """Oscillator frequency omega = 4 m f^2 / delta^2 that produces ``delta``."""
    with precision(precision_bits):
        m, f, delta = to_mpfr(m), to_mpfr(f), to_mpfr(delta)
        if delta == 0:
            raise ValueError("delta = 0 corresponds to no finite frequency")
        if not m > 0:
            raise ValueError(f"mass must be positive, got {m}")
        if f == 0:
            raise ValueError("f must be non-zero")
        return 4 * m * f * f / (delta * delta)


def energy_from_W(params: PhysicalParameters, W, precision_bits: int = DEFAULT_PRECISION) -> EnergyRecord:
    """E^2 = m omega W + m^2 - m omega; both branches when E^2 >= 0."""
    with precision(precision_bits):
        m, omega, w = to_mpfr(params.m), to_mpfr(params.omega), to_mpfr(W)
        if not gmpy2.is_finite(w):
            raise ValueError(f"W must be finite, got {W}")
        e2 = m * omega * w + m * m - m * omega
        if e2 >= 0:
            e = gmpy2.sqrt(e2)
            return EnergyRecord(w, e2, e, -e)
        return EnergyRecord(w, e2, None, None)


def format_real(x, digits: int = 12) -> str:
    """Locale-independent rendering with ``digits`` significant digits."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0:
        return "0"
    return f"{x:.{digits}g}"
