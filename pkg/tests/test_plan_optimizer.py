import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from loglft.errors import EstimationError, InvalidArgumentError, PlanError
from loglft.log_grid import build_grid, sample
from loglft.plan_optimizer import (
    AsymptoticSpec, achievable_epsilon, admissible_interval, choose_parameters,
    estimate_exponents, estimate_r1, inverse_laplace_feasibility, singularity_radius)

LN12 = math.log(1e-12)


def test_lorentzian_plan_numbers():
    rep = choose_parameters(AsymptoticSpec(0, -2, math.pi / 2, 1e-12))
    p = rep.plan
    assert rep.n_min == 310 and p.n_points == 310
    assert p.k == pytest.approx(-0.01)
    assert p.omega_grid.delta == pytest.approx(-math.pi ** 2 / 2 / LN12)
    assert abs(p.omega_grid.delta - 1 / 6) / (1 / 6) < 0.1
    assert p.s_grid.shift == -155 and p.tau_grid.shift == -155
    assert p.tau_grid.delta == p.omega_grid.delta


def test_omega_shift_general_formula():
    rep = choose_parameters(AsymptoticSpec(0, -2, math.pi / 2, 1e-12), k_override=-0.01)
    dw = rep.plan.omega_grid.delta
    assert rep.plan.omega_grid.shift == pytest.approx(LN12 / (1.01 * dw))
    # with the printed step 1/6 the same formula gives about -164;
    # with the emitted step it is about -153
    assert rep.plan.omega_grid.shift == pytest.approx(-153.2, abs=0.1)


def test_override_must_be_admissible():
    with pytest.raises(PlanError):
        choose_parameters(AsymptoticSpec(0, -2, 1.0, 1e-12), k_override=2.05)
    with pytest.raises(PlanError):
        choose_parameters(AsymptoticSpec(1, -5, 1.0, 1e-12), k_override=-1.0)
    rep = choose_parameters(AsymptoticSpec(2, 0, math.pi / 2, 1e-12), k_override=2.05)
    assert rep.plan.k == 2.05 and rep.notes["n_formula"] == "general"


def test_no_admissible_k():
    with pytest.raises(PlanError):
        AsymptoticSpec(-1, -1, 1.0, 1e-12)
    with pytest.raises(PlanError):
        admissible_interval(AsymptoticSpec(0, -0.01, 1.0, 1e-12))


def test_pole_nudge():
    rep = choose_parameters(AsymptoticSpec(1, -5, math.pi / 2, 1e-12))
    assert rep.plan.k in (pytest.approx(-0.99), pytest.approx(-1.01))
    assert any("pole" in c for c in rep.notes["clamps"])
    # no room above the pole: k must move down
    rep = choose_parameters(AsymptoticSpec(-1.005, -1.5, math.pi / 2, 1e-12))
    lo, hi = admissible_interval(AsymptoticSpec(-1.005, -1.5, math.pi / 2, 1e-12))
    assert lo <= rep.plan.k <= hi


def test_r1_clamp_recorded():
    rep = choose_parameters(AsymptoticSpec(0, -2, 3.0, 1e-12))
    assert rep.n_min == 310
    assert rep.notes["clamps"]


def test_short_n_warns_with_achievable_precision():
    spec = AsymptoticSpec(0, -2, math.pi / 2, 1e-12)
    with pytest.warns(RuntimeWarning, match="achievable"):
        rep = choose_parameters(spec, n_available=100)
    eps2 = rep.notes["achievable_epsilon"]
    assert eps2 == pytest.approx(achievable_epsilon(spec, 100, rep.plan.k))
    # inverting the N formula at eps2 returns the available N
    assert 4 * math.log(achievable_epsilon(spec, 100)) ** 2 / (2 * math.pi * math.pi / 2) \
        == pytest.approx(100)
    assert rep.plan.n_points == 100


def test_deterministic():
    spec = AsymptoticSpec(0.3, -1.7, 1.2, 1e-10)
    a, b = choose_parameters(spec), choose_parameters(spec)
    assert a.plan.to_dict() == b.plan.to_dict() and a.notes == b.notes


def test_step_formulas_agree_at_k_opt():
    for a, b, r1 in ((0, -2, math.pi / 2), (1, -3, 1.0), (0.5, -0.5, 0.7)):
        spec = AsymptoticSpec(a, b, r1, 1e-12)
        rep = choose_parameters(spec)
        n = rep.n_min
        dw1 = 4 * LN12 / ((b - a) * n)
        dw2 = -math.pi * min(r1, math.pi / 2) / LN12
        assert abs(dw1 - dw2) / dw2 < 1 / n


@settings(max_examples=200)
@given(a=st.floats(-3, 3), gap=st.floats(0.03, 6), r1=st.floats(0.3, 3),
       le=st.floats(-28, -3), k_frac=st.one_of(st.none(), st.floats(0, 1)))
def test_admissibility_invariant(a, gap, r1, le, k_frac):
    spec = AsymptoticSpec(a, a - gap, r1, math.exp(le))
    lo, hi = 1 + spec.b + 0.01, 1 + spec.a - 0.01
    assume(lo <= hi)
    # keep N moderate: the kernel table is built for every example
    assume(4 * le * le / (gap * math.pi * min(r1, math.pi / 2)) < 4000)
    k = None if k_frac is None else lo + k_frac * (hi - lo)
    if k is not None:
        m = round(k)
        assume(not (m <= 0 and abs(k - m) < 0.01))
    try:
        rep = choose_parameters(spec, k_override=k)
    except PlanError:
        # only legitimate when the interval holds nothing but a pole neighbourhood
        assert hi - lo < 0.02 + 1e-12
        return
    assert lo <= rep.plan.k <= hi
    m = round(rep.plan.k)
    assert not (m <= 0 and abs(rep.plan.k - m) < 0.01 - 1e-12)
    p = rep.plan
    assert p.n_points * p.s_grid.delta / 2 <= math.pi / p.omega_grid.delta * (1 + 1e-12)


@settings(max_examples=50)
@given(a=st.floats(-2, 2), gap=st.floats(0.5, 5), r1=st.floats(0.1, 1.5))
def test_n_scales_with_log_squared(a, gap, r1):
    n12 = choose_parameters(AsymptoticSpec(a, a - gap, r1, 1e-12)).n_min
    n6 = choose_parameters(AsymptoticSpec(a, a - gap, r1, 1e-6)).n_min
    assume(n6 >= 40)
    assert 3.9 <= n12 / n6 <= 4.1


def test_exponents_of_lorentzian():
    g = build_grid(1 / 6, -180, 360)
    fit = estimate_exponents(sample(lambda v: 1 / (1 + v * v), g))
    assert abs(fit.a) < 0.02 and abs(fit.b + 2) < 0.02 and not fit.warning


def test_exponents_of_exact_power():
    g = build_grid(0.1, -100, 200)
    fit = estimate_exponents(sample(lambda v: np.sqrt(np.abs(v)), g))
    assert fit.a == pytest.approx(0.5, abs=1e-10) and fit.b == pytest.approx(0.5, abs=1e-10)
    with pytest.raises(PlanError):
        AsymptoticSpec(fit.a, fit.a, 1.0, 1e-12)


def test_logarithmic_tail_flagged():
    g = build_grid(1 / 7, -280, 560)
    fit = estimate_exponents(sample(lambda v: np.log1p(v * v), g))
    assert abs(fit.b) < 0.1 and fit.warning


def test_exponent_errors():
    g = build_grid(0.1, -10, 20)
    with pytest.raises(EstimationError):
        estimate_exponents(sample(lambda v: 1 / (1 + v * v), g))
    g = build_grid(0.1, -100, 200)
    with pytest.raises(EstimationError):
        estimate_exponents(sample(lambda v: np.where(np.abs(v) > 1e3, 0.0, 1.0), g))
    with pytest.raises(InvalidArgumentError):
        estimate_exponents(sample(lambda v: v, g), tail_fraction=0.7)


def test_r1_lorentzian():
    r1 = estimate_r1(lambda v: 1 / (1 + v * v), (1.0,))
    assert abs(r1 - math.pi / 2) / (math.pi / 2) < 0.25


def test_r1_entire_function_clamps():
    assert estimate_r1(lambda v: np.exp(-v), (1.0,)) == pytest.approx(math.pi / 2)


def test_constructed_pole_distance():
    r = singularity_radius(lambda v: 1 / (v - (1 + 0.1j)), 1.0)
    assert abs(r - 0.1) < 0.01


def test_r1_min_over_probes():
    f = lambda v: 1 / (v - (1 + 0.1j))
    assert estimate_r1(f, (1.0, 10.0)) == pytest.approx(singularity_radius(f, 1.0), rel=1e-12)


def test_r1_validation():
    with pytest.raises(InvalidArgumentError):
        singularity_radius(lambda v: v, 0.0)
    with pytest.raises(InvalidArgumentError):
        singularity_radius(lambda v: v, 1.0, max_order=12)


def test_feasibility_examples():
    rep = inverse_laplace_feasibility(1e-12, 1e-3, 0.5)
    assert rep.passed and rep.lhs == pytest.approx(2 * 0.5 / math.pi ** 2
                                                   * math.log(math.sqrt(2 * math.pi) * 1e9))
    assert rep.lhs == pytest.approx(2.19, abs=0.01)
    # the log argument sqrt(2 pi) eps / delta never drops below sqrt(2 pi) for
    # delta < eps, so the bound fails only through a small step
    near = inverse_laplace_feasibility(0.999e-3, 1e-3, 0.5)
    assert not near.passed
    assert near.lhs == pytest.approx(1 / math.pi ** 2 * math.log(math.sqrt(2 * math.pi) / 0.999))
    assert inverse_laplace_feasibility(1e-12, 1e-3, 0.5, r1=math.pi / 2).attainable_precision \
        == pytest.approx(1e-6)
    with pytest.raises(InvalidArgumentError):
        inverse_laplace_feasibility(1e-3, 1e-6, 0.5)
