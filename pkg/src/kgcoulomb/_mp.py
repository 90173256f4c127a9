"""Precision handling shared by the extended-precision solvers.

All high-precision arithmetic runs on :mod:`gmpy2` ``mpfr`` values inside a
temporary context, so callers never have to touch the global precision.
"""
from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction
from typing import Iterator

import gmpy2
from gmpy2 import mpfr

DEFAULT_PRECISION = 200


@contextmanager
def precision(bits: int) -> Iterator[None]:
    """Run the enclosed block with ``bits`` of mantissa precision."""
    if bits < 53:
        raise ValueError(f"precision must be at least 53 bits, got {bits}")
    with gmpy2.context(gmpy2.get_context(), precision=int(bits)):
        yield


def to_mpfr(x) -> mpfr:
    """Convert a real-like value to ``mpfr`` at the current context precision.

    Strings are parsed in decimal, fractions are divided at full precision and
    mpmath numbers are converted exactly through their mantissa/exponent pair.
    """
    if isinstance(x, Fraction):
        return mpfr(x.numerator) / x.denominator
    if isinstance(x, (int, float, str)) or type(x).__name__ in ("mpfr", "mpz", "mpq"):
        return mpfr(x)
    mpf_tuple = getattr(x, "_mpf_", None)
    if mpf_tuple is not None:
        sign, man, exp, _ = mpf_tuple
        if man == 0:
            return mpfr(0)
        value = gmpy2.mul_2exp(mpfr(int(man)), int(exp))
        return -value if sign else value
    return mpfr(x)


def to_fraction(x) -> Fraction:
    """Exact rational value of a binary float (``mpfr`` or ``float``)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    num, den = x.as_integer_ratio()
    return Fraction(int(num), int(den))


def exact_rational(x) -> Fraction | None:
    """Return ``x`` as a Fraction when it is given exactly, else ``None``.

    Ints, Fractions and decimal strings count as exact; binary floats do not,
    because e.g. ``0.1`` is not the number the caller meant.
    """
    if isinstance(x, bool):
        return None
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            return None
    if type(x).__name__ == "mpq":
        return Fraction(int(x.numerator), int(x.denominator))
    return None
