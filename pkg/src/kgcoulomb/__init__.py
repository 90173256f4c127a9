"""Radial eigenvalues of the Klein-Gordon oscillator with a Coulomb-type term.

Four independent routes to the same spectrum W_0 < W_1 < ...:

* ``frobenius``: exact polynomial solutions that exist only for special delta;
* ``rayleigh_ritz``: variational upper bounds in a Gaussian-monomial basis;
* ``rpm``: roots of Hankel determinants of a Riccati series;
* ``oracle``: double-precision finite differences, used for cross-checks.
"""
from .core_model import (
    ConvergenceError,
    EnergyRecord,
    KGError,
    PhysicalParameters,
    PrecisionError,
    ReducedRadialProblem,
    RootFindingError,
    Spectrum,
    energy_from_W,
    frequency_from_delta,
    reduce,
)
from .frobenius import TruncationFamily, on_truncation_family, shooting_defect, truncation_solve
from .oracle import FdGrid, asymmetry_check, fd_spectrum
from .rayleigh_ritz import build_matrices, converge_spectrum, moment, solve_generalized
from .rpm import HankelSpec, hankel_determinant, riccati_coefficients, rpm_spectrum

__all__ = [
    "ConvergenceError", "EnergyRecord", "KGError", "PhysicalParameters", "PrecisionError",
    "ReducedRadialProblem", "RootFindingError", "Spectrum", "energy_from_W", "frequency_from_delta",
    "reduce", "TruncationFamily", "on_truncation_family", "shooting_defect", "truncation_solve",
    "FdGrid", "asymmetry_check", "fd_spectrum", "build_matrices", "converge_spectrum", "moment",
    "solve_generalized", "HankelSpec", "hankel_determinant", "riccati_coefficients", "rpm_spectrum",
]
__version__ = "0.1.0"
