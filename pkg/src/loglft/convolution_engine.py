"""Convolutions through the time domain.

With f^(t) = int dnu/2pi f(nu) e^{-i nu t} and F h(nu) = int dt h(t) e^{i nu t},

    int dnu'/2pi f(nu') g(nu - nu') = F(f^ g^)(nu).

Both factors go to the time domain with their own trade-off parameters
k_f, k_g; the product returns with k_back.  Choosing k_back = 1 - k_f - k_g
cancels the e^{-k tau} growth of the time-domain error, so the result
carries a flat error of order eps.
"""
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError, PlanError
from .log_grid import SampledFunction, SignedLogGrid
from .lft_engine import TransformPlan, lft, make_plan, subtract_gamma_residues
from .special_functions import POLE_MARGIN

__all__ = [
    "BackParameter",
    "ConvolutionPlan",
    "make_convolution_plan",
    "suggest_back_parameter",
    "convolve",
]

_SUPPORTS = ("both", "positive", "negative")


@dataclass(frozen=True)
class BackParameter:
    k_back: float
    fallback: bool
    note: str = ""


def _admissible(k, a_h, b_h, margin=POLE_MARGIN):
    m = round(k)
    if m <= 0 and abs(k - m) < margin - 1e-15:
        return False
    return 1 + b_h + margin <= k <= 1 + a_h - margin


def suggest_back_parameter(k1, k2, product_exponents=(np.inf, -np.inf), omega_max=None,
                           log_scale=None, growth_limit=1e3):
    """Pick the back-transform parameter.

    Returns 1 - k1 - k2 when it is admissible for the time-domain product
    exponents (a_h, b_h) (nudged off a Gamma pole if needed).  Otherwise, and
    also when ``omega_max``/``log_scale`` are given and the error envelope
    e^{-k_back omega_max} exceeds ``growth_limit`` times e^{log_scale}, the
    symmetric fallback k_back = -k1 is returned with ``fallback=True``.
    """
    a_h, b_h = product_exponents
    if not a_h > b_h:
        raise InvalidArgumentError("product exponents need a_h > b_h")
    k = 1.0 - k1 - k2
    note = ""
    m = round(k)
    if m <= 0 and abs(k - m) < POLE_MARGIN - 1e-15:
        cands = [c for c in (m - POLE_MARGIN, m + POLE_MARGIN) if _admissible(c, a_h, b_h)]
        if cands:
            k = min(cands, key=lambda c: abs(c - (1.0 - k1 - k2)))
            note = f"moved off the Gamma pole at {m}"
    reason = None
    if not _admissible(k, a_h, b_h):
        reason = f"1-k1-k2 = {k:g} outside the product's admissible interval"
    elif omega_max is not None and log_scale is not None:
        if -k * omega_max - log_scale > np.log(growth_limit):
            reason = f"error envelope e^(-{k:g} omega_max) outgrows the result"
    if reason is None:
        return BackParameter(k, False, note)
    fb = -float(k1)
    if not _admissible(fb, a_h, b_h):
        raise PlanError(f"{reason}, and the symmetric fallback {fb:g} is not admissible either")
    return BackParameter(fb, True, reason)


@dataclass(frozen=True)
class ConvolutionPlan:
    plan_f: TransformPlan
    plan_g: TransformPlan
    plan_back: TransformPlan
    k_back: float
    support_f: str = "both"
    support_g: str = "both"
    residue_orders: tuple = (0, 1)
    fit_window: object = None
    keep: tuple = ()

    def __post_init__(self):
        pf, pg, pb = self.plan_f, self.plan_g, self.plan_back
        if pf.direction != "inverse" or pg.direction != "inverse" or pb.direction != "forward":
            raise PlanError("factor plans must be inverse and the back plan forward")
        if pf.tau_grid != pg.tau_grid or pf.tau_grid != pb.omega_grid:
            raise PlanError("factor time grids and the back-transform input grid must coincide")
        if pf.omega_grid != pg.omega_grid:
            raise PlanError("both factors must share the frequency grid")
        if pb.k != self.k_back:
            raise PlanError("k_back disagrees with the back plan")
        for s in (self.support_f, self.support_g):
            if s not in _SUPPORTS:
                raise InvalidArgumentError(f"support must be one of {_SUPPORTS}")

    @property
    def omega_grid(self):
        return self.plan_f.omega_grid


def make_convolution_plan(omega_grid, s_grid, tau_grid, k_f, k_g=None, k_back=None,
                          back_s_grid=None, product_exponents=(np.inf, -np.inf),
                          support_f="both", support_g="both", residue_orders=(0, 1),
                          fit_window=None, keep=(), epsilon=1e-12):
    """Assemble a :class:`ConvolutionPlan`; k_back defaults to the suggested value."""
    k_g = k_f if k_g is None else k_g
    if k_back is None:
        k_back = suggest_back_parameter(k_f, k_g, product_exponents).k_back
    pf = make_plan(k_f, omega_grid, s_grid, tau_grid, epsilon=epsilon)
    pg = pf if k_g == k_f else make_plan(k_g, omega_grid, s_grid, tau_grid, epsilon=epsilon)
    bs = s_grid if back_s_grid is None else back_s_grid
    pb = make_plan(k_back, tau_grid, bs, omega_grid, direction="forward", epsilon=epsilon)
    return ConvolutionPlan(pf, pg, pb, float(k_back), support_f, support_g,
                           tuple(residue_orders), fit_window, tuple(keep))


def _masked(res, support):
    if support == "positive":
        return res.eta_pos, np.zeros_like(res.eta_neg)
    if support == "negative":
        return np.zeros_like(res.eta_pos), res.eta_neg
    return res.eta_pos, res.eta_neg


def convolve(f, g, cplan):
    """(f * g)(nu) = int dnu'/2pi f(nu') g(nu - nu') on the plan's frequency grid."""
    if not isinstance(cplan, ConvolutionPlan):
        raise PlanError("cplan must be a ConvolutionPlan")
    for name, s in (("f", f), ("g", g)):
        if not isinstance(s, SampledFunction) or s.grid.base != cplan.omega_grid:
            raise InvalidArgumentError(f"{name} is not sampled on the convolution grid")
    fp, fn = _masked(lft(f, cplan.plan_f), cplan.support_f)
    gp, gn = _masked(lft(g, cplan.plan_g), cplan.support_g)
    prod = SampledFunction(SignedLogGrid(cplan.plan_back.omega_grid), fp * gp, fn * gn)
    out = lft(prod, cplan.plan_back)
    if cplan.residue_orders:
        out = subtract_gamma_residues(out, cplan.plan_back, cplan.residue_orders,
                                      cplan.fit_window, cplan.keep)
    return out
