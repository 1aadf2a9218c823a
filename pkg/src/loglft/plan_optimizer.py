"""Parameter selection for logarithmic transforms.

Given the power laws f ~ nu^a (nu -> 0), f ~ nu^b (|nu| -> inf), the
half-width r1 of the analytic strip in omega = ln|nu| and a target
precision eps, :func:`choose_parameters` returns the smallest grid that
reaches eps.  The two truncation conditions are

    e^{(a+1-k) omega_1} = eps,    e^{(b+1-k) omega_N} = eps

and the step is set by the aliasing condition Delta_omega = -pi r1 / ln eps.
At k_opt = 1 + (a+b)/2 this gives N = 4 ln^2 eps / ((a-b) pi r1).
"""
from dataclasses import dataclass, field
from math import ceil, factorial
import math
import warnings

import numpy as np

from .errors import EstimationError, InvalidArgumentError, PlanError
from .log_grid import LogGrid, SampledFunction, build_grid
from .lft_engine import make_plan
from .special_functions import POLE_MARGIN

__all__ = [
    "AsymptoticSpec",
    "PlanReport",
    "ExponentFit",
    "FeasibilityReport",
    "admissible_interval",
    "choose_parameters",
    "achievable_epsilon",
    "estimate_exponents",
    "singularity_radius",
    "estimate_r1",
    "inverse_laplace_feasibility",
]

S_SAFETY = 0.5
HALF_PI = np.pi / 2


@dataclass(frozen=True)
class AsymptoticSpec:
    a: float
    b: float
    r1: float
    epsilon: float

    def __post_init__(self):
        vals = (self.a, self.b, self.r1, self.epsilon)
        if not all(np.isfinite(v) for v in vals):
            raise InvalidArgumentError("spec fields must be finite")
        if self.a <= self.b:
            raise PlanError(f"a = {self.a} must exceed b = {self.b}: no admissible k")
        if self.r1 <= 0:
            raise InvalidArgumentError("r1 must be positive")
        if not 0 < self.epsilon < 1:
            raise InvalidArgumentError("epsilon must lie in (0, 1)")

    @property
    def theta(self):
        """Effective strip width min(r1, pi/2)."""
        return min(self.r1, HALF_PI)

    @property
    def k_opt(self):
        return 1 + (self.a + self.b) / 2


@dataclass(frozen=True)
class PlanReport:
    plan: object
    n_min: int
    notes: dict = field(default_factory=dict)
    warnings: tuple = ()


def admissible_interval(spec, margin=POLE_MARGIN):
    """Closed k interval [1+b+margin, 1+a-margin]; PlanError if empty."""
    lo, hi = 1 + spec.b + margin, 1 + spec.a - margin
    if lo > hi:
        raise PlanError(f"admissible k interval ({1 + spec.b}, {1 + spec.a}) is empty after "
                        f"the {margin} margin")
    return lo, hi


def _near_pole(k, margin):
    m = round(k)
    return m <= 0 and abs(k - m) < margin - 1e-15


def _nudge(k, lo, hi, margin):
    """Move k off a Gamma pole, preferring the side with more room."""
    if not _near_pole(k, margin):
        return k, None
    m = round(k)
    cands = [c for c in (m - margin, m + margin) if lo <= c <= hi]
    if not cands:
        raise PlanError(f"no admissible k: the interval [{lo}, {hi}] only reaches the pole at {m}")
    # ties go to the lower side
    best = max(cands, key=lambda c: (min(c - lo, hi - c), -c))
    return best, f"k moved from {k:g} to {best:g} (Gamma pole at {m})"


def _n_general(spec, k, d_omega):
    le = math.log(spec.epsilon)
    w_lo = le / (spec.a + 1 - k)
    w_hi = le / (spec.b + 1 - k)
    return w_lo, w_hi, (w_hi - w_lo) / d_omega


def achievable_epsilon(spec, n_available, k=None):
    """Precision reachable with ``n_available`` points (inverts the N formula)."""
    k = spec.k_opt if k is None else k
    span = 1 / (spec.a + 1 - k) + 1 / (k - 1 - spec.b)
    log_eps = -math.sqrt(n_available * np.pi * spec.theta / span)
    return math.exp(log_eps)


def choose_parameters(spec, n_available=None, k_override=None, direction="inverse",
                      phi=None, half_sided=False, d_s_cap=None, d_tau=None, tau_s=None):
    """Build the minimal plan for ``spec``.

    ``d_tau``/``tau_s`` default to Delta_omega and -N/2; ``d_s_cap`` caps
    the auxiliary step.  Returns a :class:`PlanReport`.
    """
    if not isinstance(spec, AsymptoticSpec):
        raise InvalidArgumentError("spec must be an AsymptoticSpec")
    lo, hi = admissible_interval(spec)
    notes = {"k_opt": spec.k_opt, "k_interval": (lo, hi), "clamps": []}
    warn = []
    le = math.log(spec.epsilon)
    theta = spec.theta
    if theta < spec.r1:
        notes["clamps"].append(f"r1 clamped from {spec.r1:g} to pi/2")
    d_omega = -np.pi * theta / le
    if k_override is None:
        k = min(max(spec.k_opt, lo), hi)
        if k != spec.k_opt:
            notes["clamps"].append(f"k_opt clamped to {k:g}")
        k, msg = _nudge(k, lo, hi, POLE_MARGIN)
        if msg:
            notes["clamps"].append(msg)
        n_min = ceil(4 * le * le / ((spec.a - spec.b) * np.pi * theta) - 1e-9)
        notes["n_formula"] = "k_opt"
    else:
        k = float(k_override)
        if not lo <= k <= hi or _near_pole(k, POLE_MARGIN):
            raise PlanError(f"k_override = {k} violates 1+b+0.01 <= k <= 1+a-0.01 "
                            f"or sits on a Gamma pole")
        n_min = ceil(_n_general(spec, k, d_omega)[2] - 1e-9)
        notes["n_formula"] = "general"
    n = n_min
    if n_available is not None:
        if n_available < 8:
            raise InvalidArgumentError("n_available must be at least 8")
        if n_available < n_min:
            eps2 = achievable_epsilon(spec, n_available, k)
            msg = (f"{n_available} points < required {n_min}; "
                   f"achievable precision about {eps2:.3g}")
            warn.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            notes["achievable_epsilon"] = eps2
            # keep the precision/aliasing balance at the reduced size
            le = math.log(eps2)
            d_omega = -np.pi * theta / le
        n = int(n_available)
    d_s = S_SAFETY * (spec.a - spec.b) * np.pi / abs(le)
    # keep the s range |s| <= N ds / 2 inside the alias limit pi / d_omega
    d_s_alias = 2 * np.pi / (n * d_omega)
    if d_s_alias < d_s:
        notes["clamps"].append(f"d_s reduced from {d_s:.6g} to {d_s_alias:.6g} (alias limit)")
        d_s = d_s_alias
    if d_s_cap is not None:
        d_s = min(d_s, float(d_s_cap))
    omega_s = le / ((spec.a + 1 - k) * d_omega)
    d_tau = d_omega if d_tau is None else float(d_tau)
    tau_s = -n / 2 if tau_s is None else float(tau_s)
    notes.update({"k": k, "d_omega": d_omega, "d_s": d_s, "d_tau": d_tau,
                  "omega_s": omega_s, "s_s": -n / 2, "tau_s": tau_s,
                  "tau_max": np.pi / d_s, "N": n})
    og = build_grid(d_omega, omega_s, n)
    sg = build_grid(d_s, -n / 2, n)
    tg = build_grid(d_tau, tau_s, n)
    plan = make_plan(k, og, sg, tg, phi, direction, half_sided, spec.epsilon,
                     meta={"a": spec.a, "b": spec.b, "r1": spec.r1})
    return PlanReport(plan, n_min, notes, tuple(warn))


@dataclass(frozen=True)
class ExponentFit:
    a: float
    b: float
    residual_a: float
    residual_b: float
    log_coefficient_a: float
    log_coefficient_b: float
    warning: bool
    n_window: int


def _tail_fit(x, v):
    y = np.log(np.abs(v))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    q = 0.0
    if np.min(np.abs(x)) >= 1.0:
        # a ln|omega| term signals a logarithmic rather than power-law tail
        B = np.vstack([x, np.log(np.abs(x)), np.ones_like(x)]).T
        q = float(np.linalg.lstsq(B, y, rcond=None)[0][1])
    return float(coef[0]), resid, q


def estimate_exponents(samples, tail_fraction=0.2, branch=1, log_threshold=0.05):
    """Fit a and b from the slopes of ln|f| against omega in both tails."""
    if not isinstance(samples, SampledFunction):
        raise InvalidArgumentError("samples must be a SampledFunction")
    if not 0 < tail_fraction <= 0.5:
        raise InvalidArgumentError("tail_fraction must lie in (0, 1/2]")
    x = samples.grid.log_points
    v = samples.branch(branch)
    m = int(round(tail_fraction * x.size))
    if m < 8:
        raise EstimationError(f"tail windows hold {m} points, need at least 8")
    parts = []
    for sl in (slice(0, m), slice(x.size - m, x.size)):
        if np.any(v[sl] == 0):
            raise EstimationError("zero samples inside a tail window")
        parts.append(_tail_fit(x[sl], v[sl]))
    (a, ra, qa), (b, rb, qb) = parts
    flag = max(abs(qa), abs(qb)) > log_threshold
    return ExponentFit(a, b, ra, rb, qa, qb, bool(flag), m)


def _fd_weights(order, half):
    # central stencil -half..half, exact for polynomials up to degree 2*half
    pts = np.arange(-half, half + 1, dtype=float)
    V = np.vander(pts, increasing=True).T
    rhs = np.zeros(pts.size)
    rhs[order] = factorial(order)
    return np.linalg.solve(V, rhs)


def _taylor_coefficients(f, nu0, h, max_order):
    half = (max_order + 2) // 2 + 1
    pts = nu0 + h * np.arange(-half, half + 1)
    vals = np.asarray(f(pts), dtype=np.complex128)
    if not np.all(np.isfinite(vals)):
        raise EstimationError(f"non-finite samples near nu0 = {nu0}")
    out = []
    for k in range(1, max_order + 1):
        w = _fd_weights(k, half)
        out.append(np.dot(w, vals) / h ** k / factorial(k))
    return np.abs(np.array(out))


def _radius_from_coefficients(c, first):
    k = np.arange(1, c.size + 1)
    scale = np.max(c)
    sel = (k >= first) & (c > 1e-13 * scale)
    if scale == 0 or np.count_nonzero(sel) < 2:
        return np.inf
    kk, lc = k[sel], np.log(c[sel])
    for _ in range(3):
        A = np.vstack([kk, np.ones_like(kk)]).T
        slope, icpt = np.linalg.lstsq(A, lc, rcond=None)[0]
        # drop accidental near-zeros (interfering singularities)
        keep = lc - (slope * kk + icpt) > -1.0
        if keep.all() or keep.sum() < 2:
            break
        kk, lc = kk[keep], lc[keep]
    return float(np.exp(-slope))


def singularity_radius(f, nu0, max_order=8):
    """Distance from ``nu0`` to the nearest singularity of ``f``.

    Taylor coefficients c_k = f^(k)(nu0)/k! come from central differences
    with one Richardson step; |R| follows from the geometric decay
    ln|c_k| ~ const - k ln|R| fitted over orders 3..max_order.  The step is
    refined until it is small against the estimate.
    """
    if not 4 <= max_order <= 8:
        raise InvalidArgumentError("max_order must lie in 4..8")
    nu0 = float(nu0)
    if nu0 == 0 or not np.isfinite(nu0):
        raise InvalidArgumentError("nu0 must be finite and nonzero")
    h = 0.25 * abs(nu0)
    r = np.inf
    for _ in range(12):
        c1 = _taylor_coefficients(f, nu0, h, max_order)
        c2 = _taylor_coefficients(f, nu0, h / 2, max_order)
        c = np.abs((4 * c2 - c1) / 3)
        r = _radius_from_coefficients(c, 3)
        if not np.isfinite(r) or h <= r / 12:
            break
        h = r / 16
    if np.isfinite(r) and r <= 0:
        raise EstimationError("derivative ratios show no dominant singularity; set r1 manually")
    return r


def estimate_r1(f, nu0=(1.0,), max_order=8):
    """Analytic strip half-width in omega, min over the probe points, clamped to pi/2."""
    probes = np.atleast_1d(np.asarray(nu0, dtype=float))
    best = HALF_PI
    for p in probes:
        r = singularity_radius(f, p, max_order)
        best = min(best, r / abs(p))
    return float(best)


@dataclass(frozen=True)
class FeasibilityReport:
    passed: bool
    lhs: float
    margin: float
    attainable_precision: object = None


def inverse_laplace_feasibility(delta_noise, epsilon, delta_omega, r1=None):
    """Check 1 <= (2 Delta_omega / pi^2) ln(sqrt(2 pi) eps / delta).

    With ``r1`` the attainable relative precision delta^{r1/(pi/2 + r1)}
    is reported as well.
    """
    if not 0 < delta_noise < epsilon < 1:
        raise InvalidArgumentError("need 0 < delta_noise < epsilon < 1")
    if not delta_omega > 0:
        raise InvalidArgumentError("delta_omega must be positive")
    lhs = 2 * delta_omega / np.pi ** 2 * math.log(math.sqrt(2 * np.pi) * epsilon / delta_noise)
    att = None
    if r1 is not None:
        if r1 <= 0:
            raise InvalidArgumentError("r1 must be positive")
        r = min(float(r1), HALF_PI)
        att = delta_noise ** (r / (HALF_PI + r))
    return FeasibilityReport(bool(lhs >= 1), float(lhs), float(lhs - 1), att)
