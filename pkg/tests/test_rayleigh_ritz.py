import gmpy2
import mpmath
import numpy as np
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings
from hypothesis import strategies as st

from kgcoulomb import rayleigh_ritz as rr
from kgcoulomb.core_model import PrecisionError


def test_moment_examples():
    assert rr.moment(1) == mpfr(0.5)
    assert rr.moment(3) == mpfr(0.5)
    assert abs(rr.moment(2) - gmpy2.sqrt(gmpy2.const_pi()) / 4) < 1e-55
    with pytest.raises(ValueError):
        rr.moment(-1)


@pytest.mark.parametrize("p", [-0.5, 0.3, 2, 5.7])
def test_moment_against_quadrature(p):
    mpmath.mp.dps = 40
    q = mpmath.quad(lambda x: x ** p * mpmath.exp(-x * x), [0, 1, mpmath.inf])
    assert abs(float(rr.moment(p)) - float(q)) < 1e-14


def test_moment_table_recurrence():
    t = rr.MomentTable(1.25, 12)
    for k in range(-1, 13):
        assert abs(t[k] - rr.moment(2 * mpfr(1.25) + k)) < 1e-55 * t[k]
    assert set(t.entries) == set(range(-1, 13))
    with pytest.raises(IndexError):
        t[13]


def _quad_elements(g, d, i, j):
    mpmath.mp.dps = 30
    g, d = mpmath.mpf(g), mpmath.mpf(d)

    def u(k, x):
        return x ** (g + k) * mpmath.exp(-x * x / 2)

    def du(k, x):
        return ((g + k) / x - x) * u(k, x)

    s = mpmath.quad(lambda x: u(i, x) * u(j, x) * x, [0, 2, mpmath.inf])
    h = mpmath.quad(lambda x: (du(i, x) * du(j, x) + (g * g / x ** 2 + d / x + x * x) * u(i, x) * u(j, x)) * x,
                    [0, 2, mpmath.inf])
    return s, h


@pytest.mark.parametrize("g, d", [(1, 0.0), (1.3, -0.7), (2.5, 3.1)])
def test_matrix_elements_against_quadrature(g, d):
    m = rr.build_matrices(g, d, 3)
    for i in range(3):
        for j in range(3):
            s, h = _quad_elements(g, d, i, j)
            assert abs(float(m.S[i, j]) - float(s)) < 1e-12 * abs(float(s))
            assert abs(float(m.H[i, j]) - float(h)) < 1e-12 * max(1, abs(float(h)))


def test_coulomb_term_of_single_function():
    base = rr.build_matrices(1, 0, 1).H[0, 0]
    shifted = rr.build_matrices(1, 1.5, 1).H[0, 0]
    assert abs(shifted - base - mpfr(1.5) * gmpy2.sqrt(gmpy2.const_pi()) / 4) < 1e-55


def test_matrices_are_symmetric():
    m = rr.build_matrices(1.7, -2.2, 7)
    assert all(m.S[i, j] == m.S[j, i] and m.H[i, j] == m.H[j, i] for i in range(7) for j in range(7))


def test_single_function_ground_state():
    m = rr.build_matrices(1, 0, 1)
    assert m.S[0, 0] == mpfr(0.5) and m.H[0, 0] == 2
    assert rr.ritz_values(1, 0, 1) == [4]


def test_two_functions_capture_truncated_state(sqrt6):
    assert abs(rr.ritz_values(1, sqrt6, 2)[0] - 6) < 1e-50


def test_input_validation():
    with pytest.raises(ValueError):
        rr.build_matrices(1, 0, 0)
    with pytest.raises(ValueError):
        rr.build_matrices(0, 0, 2)
    with pytest.raises(ValueError):
        rr.converge_spectrum(1, 0, 0, 1e-9)
    with pytest.raises(ValueError):
        rr.converge_spectrum(1, 0, 1, 0)


def test_converged_spectra(sqrt6):
    plus = rr.converge_spectrum(1, sqrt6, 3, 1e-9)
    assert plus.all_converged and plus.method == "rayleigh_ritz"
    assert np.allclose(plus.as_floats(), [6, 9.805784090, 13.66928892], atol=5e-9)
    minus = rr.converge_spectrum(1, -sqrt6, 3, 1e-9)
    assert np.allclose(minus.as_floats(), [1.600357154, 6, 10.21072810], atol=5e-9)
    assert minus.metadata["N"] <= rr.N_CAP


def test_ground_state_at_zero_coupling():
    s = rr.converge_spectrum(1, 0, 1, 1e-12)
    assert s[0] == 4 and s.metadata["history"][0][0] == 5


def test_cap_flags_unconverged():
    s = rr.converge_spectrum(1, 1, 3, 1e-300, cap=10)
    assert not s.all_converged and s.metadata["stop_reason"] == "cap"


def test_precision_failure_returns_last_good():
    s = rr.converge_spectrum(3, 1, 2, 1e-300, precision_bits=80, cap=60)
    assert s.metadata["stop_reason"] == "precision"
    assert not s.all_converged
    with pytest.raises(PrecisionError):
        rr.ritz_values(3, 1, 60, 80)


@settings(max_examples=15, deadline=None)
@given(g=st.floats(0.5, 3), d=st.floats(-5, 5))
def test_upper_bound_and_monotone(g, d):
    from kgcoulomb.oracle import fd_spectrum

    ref = fd_spectrum(g, d, count=2).as_floats()
    prev = None
    for N in (4, 8, 12):
        vals = rr.ritz_values(g, d, N)[:2]
        if prev is not None:
            assert all(v <= p + mpfr("1e-25") for v, p in zip(vals, prev))
        assert all(float(v) >= r - 1e-5 for v, r in zip(vals, ref))
        prev = vals
