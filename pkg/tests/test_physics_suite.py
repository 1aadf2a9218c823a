import math

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from loglft.errors import ConvergenceError, DomainError, InvalidArgumentError
from loglft.physics_suite import (
    MctParams, PolarizationSpec, bose_function, critical_sweep, damped_oscillator,
    fit_critical_exponent, lindhard_quadrature, mct_direct_oracle, mct_plan, mct_solve,
    plateau_constant, polarization_assemble, polarization_sigma, sigma_dft_baseline,
    sigma_interpolator, sigma_quadrature)


@pytest.fixture(scope="module")
def sigma_result():
    return polarization_sigma(PolarizationSpec())


@pytest.fixture(scope="module")
def plan():
    return mct_plan()


def test_bose_function():
    assert bose_function(1.0) == pytest.approx(1 / (math.e - 1), rel=1e-15)
    assert bose_function(1e-10) == pytest.approx(1e10, rel=1e-9)
    assert bose_function(800.0) == 0.0
    with pytest.raises(DomainError):
        bose_function(0.0)


def test_spec_rejects_condensate():
    with pytest.raises(InvalidArgumentError):
        PolarizationSpec(mu=0.0)


def test_sigma_real_part_is_half_occupation(sigma_result):
    # Re sigma(y) = n_B(y)/2 because the PV part is purely imaginary
    spec = PolarizationSpec()
    for eta in (1, -1):
        y = eta * np.exp(sigma_result.log_points)
        err = np.abs(sigma_result.branch(eta).real - 0.5 * spec.occupation(y))
        assert err.max() < 1e-7


def test_sigma_against_quadrature(sigma_result):
    y = np.exp(sigma_result.log_points)
    for i in (20, 120, 160, 200, 300):
        for eta in (1, -1):
            ref = sigma_quadrature(eta * y[i], -0.1)
            assert abs(sigma_result.branch(eta)[i] - ref) < 1e-7


def test_quadrature_oracles_agree():
    # two independent quadratures: sigma's Cauchy integral and the Lindhard sum
    sig = lambda y: np.array([sigma_quadrature(v, -0.1) for v in np.atleast_1d(y)])
    for omega, q in ((0.3, 0.7), (-1.2, 2.0), (4.0, 0.5)):
        a = polarization_assemble(sig, omega, q)[0]
        b = lindhard_quadrature(omega, q, -0.1)
        assert abs(a - b) < 1e-10


def test_lindhard_from_transform(sigma_result):
    sig = sigma_interpolator(sigma_result)
    for omega, q in ((1.0, 1.0), (0.3, 0.7), (-2.0, 1.5)):
        val = polarization_assemble(sig, omega, q)
        assert abs(val - lindhard_quadrature(omega, q, -0.1)) < 1e-7


def test_static_polarization_is_real(sigma_result):
    sig = sigma_interpolator(sigma_result)
    for q in (0.2, 1.0, 3.0):
        assert abs(polarization_assemble(sig, 0.0, q).imag) < 1e-8


def test_interpolator_reproduces_grid(sigma_result):
    sig = sigma_interpolator(sigma_result)
    y = np.exp(sigma_result.log_points[::17])
    np.testing.assert_allclose(sig(y), sigma_result.eta_pos[::17], atol=1e-13)
    np.testing.assert_allclose(sig(-y), sigma_result.eta_neg[::17], atol=1e-13)
    with pytest.raises(InvalidArgumentError):
        sig(np.exp(sigma_result.log_points[-1] + 1))
    with pytest.raises(InvalidArgumentError):
        polarization_assemble(sig, 1.0, 0.0)


def test_dft_baseline_is_much_worse(sigma_result):
    spec = PolarizationSpec()
    y = np.exp(sigma_result.log_points[[100, 200, 250]])
    ref = np.array([sigma_quadrature(v, spec.mu) for v in y])
    base = sigma_dft_baseline(spec, y)
    assert np.max(np.abs(base - ref)) > 1e2 * np.max(np.abs(sigma_result.eta_pos[[100, 200, 250]]
                                                            - ref))


def test_plateau_constant():
    assert plateau_constant(0.5) == 0.0
    assert plateau_constant(1.0) == 0.5
    assert plateau_constant(2.0) == pytest.approx((1 + math.sqrt(0.5)) / 2)
    with pytest.raises(InvalidArgumentError):
        plateau_constant(-1)


def test_damped_oscillator_solves_ode():
    for g in (0.5, 2.0, 3.0):
        t = np.linspace(0, 10, 20001)
        phi = damped_oscillator(t, gamma=g)
        h = t[1] - t[0]
        d1 = np.gradient(phi, h)
        d2 = np.gradient(d1, h)
        resid = d2 + g * d1 + phi
        assert phi[0] == 1.0 and abs(d1[0]) < 1e-3
        assert np.max(np.abs(resid[5:-5])) < 1e-5


def test_oracle_matches_closed_form_without_coupling():
    t, phi = mct_direct_oracle(MctParams(lam=0.0), t_max=20.0)
    assert np.max(np.abs(phi - damped_oscillator(t))) < 1e-8


def test_oracle_step_refinement():
    _, a = mct_direct_oracle(MctParams(lam=0.5), t_max=10.0, h_max=0.02)
    _, b = mct_direct_oracle(MctParams(lam=0.5), t_max=10.0, h_max=0.01)
    assert np.max(np.abs(a - b)) < 1e-7


def test_uncoupled_solution(plan):
    sol = mct_solve(MctParams(lam=0.0), plan)
    assert sol.converged and sol.c == 0.0
    assert np.max(np.abs(sol.phi_t - damped_oscillator(sol.t))) < 1e-9


def test_coupled_solution_against_time_domain_oracle(plan):
    sol = mct_solve(MctParams(lam=0.5), plan)
    t, ref = mct_direct_oracle(MctParams(lam=0.5), t_max=30.0)
    curve = CubicSpline(np.log(sol.t), sol.phi_t)
    assert np.max(np.abs(curve(np.log(t[1:])) - ref[1:])) < 1e-4


def test_glass_settles_on_plateau(plan):
    sol = mct_solve(MctParams(lam=2.0), plan)
    assert sol.c == pytest.approx(plateau_constant(2.0))
    assert abs(sol.phi_t[-1] - sol.c) < 1e-10
    # short-time noise floor of the inverse leg is larger in the glass (~2e-6)
    assert abs(sol.phi_t[0] - 1) < 1e-5


def test_nonconvergence_raises_with_last_iterate(plan):
    with pytest.raises(ConvergenceError) as exc:
        mct_solve(MctParams(lam=0.9, max_iter=3), plan)
    assert not exc.value.solution.converged and exc.value.solution.iterations == 3
    sol = mct_solve(MctParams(lam=0.9, max_iter=3), plan, raise_on_failure=False)
    assert len(sol.history) == 3


def test_initial_shape_checked(plan):
    with pytest.raises(InvalidArgumentError):
        mct_solve(MctParams(lam=0.5), plan, initial=np.zeros(3))


def test_exponent_fit_recovers_synthetic_law():
    js = np.arange(8, 20)
    vals = 3.0 * 2.0 ** (1.765 * js) * np.exp(0.4 * 2.0 ** (-js / 2))
    est = fit_critical_exponent(js, vals)
    assert est.exponent == pytest.approx(1.765, abs=1e-10)
    assert est.correction == pytest.approx(0.4, abs=1e-8)
    plain = fit_critical_exponent(js, vals, correction_power=None)
    assert plain.exponent == plain.plain_slope != pytest.approx(1.765, abs=1e-10)
    with pytest.raises(InvalidArgumentError):
        fit_critical_exponent([1, 2], [1.0, 2.0])


def test_short_glass_sweep(plan):
    res = critical_sweep(1, range(1, 8), plan=plan, keep=(7,))
    assert all(res.converged) and 7 in res.solutions
    assert np.all(np.diff(res.phi0_hat) > 0)
    with pytest.raises(InvalidArgumentError):
        critical_sweep(0, [1], plan=plan)
