import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.special import loggamma

from loglft.errors import DomainError, PlanError
from loglft.special_functions import (
    UNDERFLOW_FLOOR, build_kernel_table, check_k_margin, gamma_complex, kernel_factor,
    kernel_phase, kernel_values, log_gamma_complex)


def _wrap(d):
    # log Gamma is compared modulo 2 pi i (only exp of it enters the kernel)
    return d.real + 1j * np.angle(np.exp(1j * d.imag))


@pytest.mark.parametrize("z, expect", [
    (1.0, 0.0), (2.0, 0.0), (0.5, 0.5 * math.log(math.pi)),
    (5.0, math.log(24.0)), (11.0, math.log(3628800.0)),
    (-0.5, math.log(2 * math.sqrt(math.pi)) + 1j * math.pi)])
def test_log_gamma_known_values(z, expect):
    assert abs(_wrap(log_gamma_complex(z) - expect)) < 1e-13


def test_gamma_on_imaginary_axis():
    # |Gamma(iy)|^2 = pi / (y sinh(pi y))
    for y in (0.1, 1.0, 7.5, 40.0):
        g = gamma_complex(1j * y)
        assert abs(abs(g) ** 2 / (math.pi / (y * math.sinh(math.pi * y))) - 1) < 1e-12


def test_against_scipy_loggamma():
    rng = np.random.default_rng(7)
    z = rng.uniform(-30, 30, 3000) + 1j * rng.uniform(-80, 80, 3000)
    d = _wrap(log_gamma_complex(z) - loggamma(z))
    assert np.max(np.abs(d) / np.maximum(1, np.abs(loggamma(z)))) < 1e-13


def test_large_argument_stays_finite():
    lg = log_gamma_complex(np.array([1e3 + 1e3j, 0.3 - 500j, -200.5 + 1j]))
    assert np.all(np.isfinite(lg))
    np.testing.assert_allclose(_wrap(lg - loggamma([1e3 + 1e3j, 0.3 - 500j, -200.5 + 1j])), 0,
                               atol=1e-10)


@pytest.mark.parametrize("m", [0, 1, 4])
def test_pole_raises_with_index(m):
    with pytest.raises(DomainError) as exc:
        log_gamma_complex(-m)
    assert exc.value.pole_index == m


@settings(max_examples=200)
@given(x=st.floats(-20, 20), y=st.floats(-20, 20))
def test_recurrence(x, y):
    z = complex(x, y)
    assume(abs(z - round(x)) > 1e-3 or round(x) > 0)
    assume(abs(z + 1 - round(x + 1)) > 1e-3 or round(x + 1) > 0)
    d = _wrap(log_gamma_complex(z + 1) - log_gamma_complex(z) - np.log(z))
    assert abs(np.expm1(d)) < 1e-11


@settings(max_examples=200)
@given(x=st.floats(-15, 15), y=st.floats(-15, 15))
def test_reflection(x, y):
    z = complex(x, y)
    assume(min(abs(z - round(x)), abs(1 - z - round(1 - x))) > 1e-3)
    lhs = log_gamma_complex(z) + log_gamma_complex(1 - z)
    # log(pi / sin(pi z))
    rhs = math.log(math.pi) - np.log(np.sin(np.pi * z))
    assert abs(np.expm1(_wrap(lhs - rhs))) < 1e-11


@settings(max_examples=100)
@given(x=st.floats(0.1, 20), y=st.floats(-30, 30))
def test_conjugate_symmetry(x, y):
    z = complex(x, y)
    assert abs(_wrap(log_gamma_complex(z.conjugate()) - np.conj(log_gamma_complex(z)))) < 1e-12


def test_kernel_phase_cases():
    assert kernel_phase(1, 1, np.pi / 2) == pytest.approx(np.pi / 2)
    assert kernel_phase(1, -1, np.pi / 2) == pytest.approx(-np.pi / 2)
    assert kernel_phase(1, 1, np.pi) == pytest.approx(0.0)
    assert kernel_phase(1, -1, np.pi) == pytest.approx(np.pi)
    assert kernel_phase(1, 1, 3 * np.pi / 2) == pytest.approx(-np.pi / 2)
    with pytest.raises(ValueError):
        kernel_phase(0, 1, 0.0)


def test_kernel_is_mellin_transform_of_exponential():
    # int_0^inf x^{k - i s - 1} e^{-x} dx = Gamma(k - i s) for the Laplace phase
    k, s = 0.7, 1.3
    val = kernel_factor(s, k, 1, 1, phi=np.pi)
    assert abs(val - gamma_complex(k - 1j * s)) < 1e-14
    # phi = pi/2: base i, (i)^{i s - k} = exp(i pi/2 (i s - k))
    val = kernel_factor(s, k, 1, 1)
    expect = np.exp(1j * np.pi / 2 * (1j * s - k)) * gamma_complex(k - 1j * s)
    assert abs(val - expect) < 1e-14


def test_kernel_underflow_floor():
    v = kernel_values(np.array([0.0, 400.0, 900.0]), 0.5, np.pi / 2)
    assert v[0] != 0 and v[-1] == 0
    assert np.all(np.isfinite(v))
    assert UNDERFLOW_FLOOR == 1e-300


def test_kernel_table_read_only_and_counts():
    tab = build_kernel_table(np.linspace(-300, 300, 101), 0.5)
    assert len(tab) == 101 and len(tab.entries) == 4
    assert tab.underflow_count > 0
    with pytest.raises(ValueError):
        tab[(1, 1)][0] = 1.0


@pytest.mark.parametrize("k", [0.0, -1.005, -2.0, 0.009, np.nan])
def test_k_margin_rejects(k):
    with pytest.raises(PlanError):
        check_k_margin(k)


@pytest.mark.parametrize("k", [0.01, -0.01, 1.0, 2.05, -0.99])
def test_k_margin_accepts(k):
    check_k_margin(k)
