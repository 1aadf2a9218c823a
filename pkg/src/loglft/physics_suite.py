"""Applications: 1D Bose-gas polarization and the schematic glass model.

Polarization
    With xi_k = k^2 - mu (mass 1/2, beta = 1),

        Pi(omega, q) = sum_eta (i eta / 2q) sigma((omega + eta q^2) / 2q),
        sigma(y)     = F^{-1}_{x->y}[theta(-x) F_{k->x}(n_B)](y)
                     = n_B(y)/2 - (i/2pi) PV int dk n_B(k)/(k - y).

Mode coupling
    Phi'' + gamma Phi' + W^2 Phi + 4 lam W^2 int_0^t Phi^2(t-s) Phi'(s) ds = 0,
    Phi(0) = 1, Phi'(0) = 0, solved in the frequency domain for
    dPhi = Phi - c with c = 0 (lam < 1) or (1 + sqrt(1 - 1/lam))/2.
"""
from dataclasses import dataclass, field, replace
import math
import time
import warnings

import numpy as np
from scipy.interpolate import make_interp_spline

from . import _accel
from ._accel import njit
from .errors import (BranchError, ConvergenceError, InvalidArgumentError, OracleError,
                     DomainError)
from .log_grid import SampledFunction, SignedLogGrid, build_grid, sample
from .lft_engine import make_plan, lft, subtract_gamma_residues

__all__ = [
    "bose_function",
    "PolarizationSpec",
    "polarization_sigma",
    "sigma_interpolator",
    "polarization_assemble",
    "sigma_quadrature",
    "lindhard_quadrature",
    "sigma_dft_baseline",
    "plateau_constant",
    "MctParams",
    "MctPlan",
    "MctSolution",
    "mct_plan",
    "mct_solve",
    "mct_direct_oracle",
    "damped_oscillator",
    "SweepResult",
    "ExponentEstimate",
    "critical_sweep",
    "fit_critical_exponent",
]


# -- polarization ----------------------------------------------------------

def bose_function(xi, beta=1.0):
    """n_B = 1/(e^{beta xi} - 1), via expm1 for small arguments."""
    x = beta * np.asarray(xi, dtype=np.float64)
    if np.any(x == 0):
        raise DomainError("Bose function has a pole at beta*xi = 0")
    with np.errstate(over="ignore"):
        out = 1.0 / np.expm1(x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PolarizationSpec:
    mu: float = -0.1
    n_points: int = 336
    k_grid: tuple = (1 / 14, -196)
    s1_grid: tuple = (1 / 4, -168)
    x_grid: tuple = (1 / 11, -234)
    k1: float = -0.9
    s2_grid: tuple = (1 / 6, -168)
    k2: float = 1 / 20
    y_grid: tuple = None
    stage1_orders: tuple = (0, 1, 2)
    stage1_window: float = 0.1
    stage2_keep: tuple = (-1, -3)
    stage2_window: float = 0.2

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu < 0):
            raise InvalidArgumentError("mu must be negative (fugacity below 1)")

    def occupation(self, k):
        return bose_function(np.asarray(k, dtype=float) ** 2 - self.mu)

    def grids(self):
        n = self.n_points
        kg = build_grid(*self.k_grid, n)
        yg = kg if self.y_grid is None else build_grid(*self.y_grid, n)
        return (kg, build_grid(*self.s1_grid, n), build_grid(*self.x_grid, n),
                build_grid(*self.s2_grid, n), yg)


def _tail_window(n, frac):
    return slice(n - max(2, int(round(frac * n))), n)


def polarization_sigma(spec):
    """sigma(y) on the y grid of ``spec`` through two half-sided transforms."""
    kg, s1, xg, s2, yg = spec.grids()
    n = spec.n_points
    p1 = make_plan(spec.k1, kg, s1, xg, direction="forward")
    occ = sample(lambda k: 1.0 / np.expm1(k * k - spec.mu), kg)
    # F_{k->x} n_B; only x < 0 survives the step function
    fx = lft(occ, p1, etas=(-1,))
    fx = subtract_gamma_residues(fx, p1, spec.stage1_orders,
                                 _tail_window(n, spec.stage1_window), etas=(-1,))
    masked = SampledFunction(SignedLogGrid(xg), np.zeros(n), fx.eta_neg)
    p2 = make_plan(spec.k2, xg, s2, yg, direction="inverse")
    out = lft(masked, p2)
    return subtract_gamma_residues(out, p2, (0,), _tail_window(n, spec.stage2_window),
                                   keep=spec.stage2_keep)


def sigma_interpolator(result):
    """Callable y -> sigma(y) from degree-7 splines of each branch in ln|y|.

    Cubic splines on the 1/14 log grid leave ~1e-6 errors near |y| ~ 1;
    degree 7 brings the interpolation error under the transform error.

    Below the smallest sampled |y| the function is continued through y = 0
    from its even and odd parts at that point (error O(y_min^2)).
    """
    lx = result.log_points
    sp = {}
    for eta in (1, -1):
        sp[eta] = make_interp_spline(lx, result.branch(eta), k=7)
    lo, hi = lx[0], lx[-1]
    y_min = math.exp(lo)
    edge = {1: result.eta_pos[0], -1: result.eta_neg[0]}
    even = 0.5 * (edge[1] + edge[-1])
    odd = 0.5 * (edge[1] - edge[-1]) / y_min

    def sigma(y):
        y = np.asarray(y, dtype=float)
        ay = np.abs(y)
        with np.errstate(divide="ignore"):
            ly = np.log(ay)
        if np.any(ly > hi + 1e-12):
            raise InvalidArgumentError("y outside the sampled range")
        out = np.empty(y.shape, dtype=np.complex128)
        small = ly < lo
        out[small] = even + odd * y[small]
        for eta in (1, -1):
            m = (np.sign(y) == eta) & ~small
            if np.any(m):
                out[m] = sp[eta](ly[m])
        return out if out.ndim else complex(out)

    return sigma


def polarization_assemble(sigma, omega, q):
    """Pi(omega, q) = sum_eta (i eta / 2q) sigma((omega + eta q^2)/(2q))."""
    q = np.asarray(q, dtype=float)
    if np.any(q == 0):
        raise InvalidArgumentError("q must be nonzero")
    omega = np.asarray(omega, dtype=float)
    yp = (omega + q * q) / (2 * q)
    ym = (omega - q * q) / (2 * q)
    return 1j / (2 * q) * (sigma(yp) - sigma(ym))


def _nb_scalar(k, mu):
    e = k * k - mu
    return 0.0 if e > 700 else 1.0 / math.expm1(e)


def sigma_quadrature(y, mu, cutoff=12.0):
    """Adaptive-quadrature reference n_B(y)/2 - (i/2pi) PV int n_B(k)/(k-y) dk.

    n_B is below 1e-60 beyond |k| = 12 for any mu < 0, so the PV integral
    is cut there.
    """
    from scipy.integrate import quad

    nb = lambda k: _nb_scalar(k, mu)
    y = float(y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if abs(y) < cutoff:
            pv = quad(nb, -cutoff, cutoff, weight="cauchy", wvar=y, limit=400,
                      epsabs=1e-14, epsrel=1e-13)[0]
        else:
            pv = quad(lambda k: nb(k) / (k - y), -cutoff, cutoff, limit=400, epsabs=1e-15)[0]
    return 0.5 * nb(y) - 1j / (2 * np.pi) * pv


def lindhard_quadrature(omega, q, mu, cutoff=14.0):
    """Direct quadrature of -int dk/2pi [n(k) - n(k-q)] / (omega - xi_k + xi_{k-q} + i0)."""
    from scipy.integrate import quad

    n = lambda k: _nb_scalar(k, mu)
    k0 = (omega + q * q) / (2 * q)
    num = lambda k: n(k) - n(k - q)
    # omega - xi_k + xi_{k-q} = -2q (k - k0)
    g = lambda k: num(k) / (4 * np.pi * q)
    lo, hi = min(-cutoff, k0 - 1), max(cutoff + q, k0 + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pv = quad(g, lo, hi, weight="cauchy", wvar=k0, limit=800, epsabs=1e-14,
                  epsrel=1e-13)[0]
    return pv + 1j * num(k0) / (4 * q)


def sigma_dft_baseline(spec, y, cutoff=12.0):
    """sigma(y) from direct DFT sums on a uniform k grid with the same N."""
    n = spec.n_points
    k = np.linspace(-cutoff, cutoff, n)
    dk = k[1] - k[0]
    x = 2 * np.pi / (n * dk) * (np.arange(n) - n // 2)
    dx = x[1] - x[0]
    nb = bose_function(k * k - spec.mu)
    fx = dk * np.exp(1j * np.outer(x, k)) @ nb
    fx[x >= 0] = 0
    fx[np.argmin(np.abs(x))] *= 0.5
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return dx / (2 * np.pi) * np.exp(-1j * np.outer(y, x)) @ fx


# -- mode coupling ---------------------------------------------------------

def plateau_constant(lam):
    """c(lam) = 0 below 1, (1 + sqrt(1 - 1/lam))/2 from 1 on."""
    if lam < 0:
        raise InvalidArgumentError("coupling must be nonnegative")
    return 0.0 if lam < 1 else 0.5 * (1 + math.sqrt(1 - 1 / lam))


@dataclass(frozen=True)
class MctParams:
    lam: float
    gamma: float = 1.0
    omega0: float = 1.0
    mixing: float = 0.5
    tol: float = 1e-8
    max_iter: int = 30000
    k_forward: float = -0.01
    k_inverse: float = 0.3

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise InvalidArgumentError("lambda must be >= 0")
        if not self.tol > 0:
            raise InvalidArgumentError("tol must be positive")
        if not 0 < self.mixing <= 1:
            raise InvalidArgumentError("mixing must lie in (0, 1]")
        if int(self.max_iter) < 1:
            raise InvalidArgumentError("max_iter must be positive")


@dataclass(frozen=True)
class MctPlan:
    forward: object
    inverse: object
    fit_window: slice
    keep: tuple = (-1, -2, -3)

    @property
    def t(self):
        return np.exp(self.forward.omega_grid.points)

    @property
    def nu(self):
        return np.exp(self.forward.tau_grid.points)


def mct_plan(n=2400, log_nu=(-113.0, 54.0), log_t=(-28.0, 35.0), k_forward=-0.01,
             k_inverse=0.3, tail=0.15):
    """Half-sided transform pair between ln t and ln nu grids.

    The auxiliary steps keep the s range below pi/Delta of the respective
    input grid, which avoids aliasing of the inverse leg.
    """
    wspan = log_nu[1] - log_nu[0]
    tspan = log_t[1] - log_t[0]
    dw, dt = wspan / n, tspan / n
    wg = build_grid(dw, log_nu[0] / dw - 1, n)
    tg = build_grid(dt, log_t[0] / dt - 1, n)
    fwd = make_plan(k_forward, tg, build_grid(2 * np.pi / wspan / 1.05, -n / 2, n), wg,
                    direction="forward", half_sided=True)
    inv = make_plan(k_inverse, wg, build_grid(2 * np.pi / tspan / 2.0, -n / 2, n), tg,
                    direction="inverse")
    return MctPlan(fwd, inv, slice(int((1 - tail) * n), n))


@dataclass(frozen=True)
class MctSolution:
    c: float
    t: np.ndarray
    delta_phi_t: np.ndarray
    nu: np.ndarray
    delta_phi_nu: np.ndarray
    phi0_hat: float
    iterations: int
    converged: bool
    history: tuple = ()
    max_imag: float = 0.0
    elapsed: float = 0.0

    @property
    def phi_t(self):
        return self.c + self.delta_phi_t


def _extrapolate_zero(nu, v):
    # value + slope nu^p through the three smallest frequencies
    p1, p2, p3 = v[:3]
    d1, d2 = p2 - p1, p3 - p2
    if abs(d1) <= 1e-13 * abs(p1) or d2 / d1 <= 0 or d2 / d1 >= 1e6:
        return float(p1)
    rp = d2 / d1
    if abs(rp - 1) < 1e-12:
        return float(p1)
    return float(p1 - d1 / (rp - 1))


def _memory_spectrum(dphi, plan):
    sq = SampledFunction(SignedLogGrid(plan.forward.omega_grid), dphi * dphi)
    d = lft(sq, plan.forward, etas=(1,))
    d = subtract_gamma_residues(d, plan.forward, (0,), plan.fit_window, plan.keep, etas=(1,))
    return d.eta_pos


def _equation(params, c, nu, d):
    iv = 1j * nu
    g, w2, lam = params.gamma, params.omega0 ** 2, params.lam
    if lam < 1:
        return -1.0 / (iv + w2 / (iv - g - 4 * lam * w2 * d))
    a = 8 * c * lam * w2 * iv
    b = nu * nu + 1j * g * nu + w2 * (1 - 4 * lam * c * c + 4 * lam * iv * d)
    cc = (1 - c) * (-iv + g + 4 * lam * w2 * d)
    # scaled discriminant, then the cancellation-free small root
    s = np.maximum(np.abs(b), np.sqrt(np.abs(4 * a * cc)))
    sq = s * np.sqrt((b / s) ** 2 - 4 * (a / s) * (cc / s))
    sgn = np.where((np.conj(b) * sq).real >= 0, 1.0, -1.0)
    return cc / (-0.5 * (b + sgn * sq))


def _step(dphi, params, plan, c, t, nu):
    d = _memory_spectrum(dphi, plan)
    p = _equation(params, c, nu, d)
    bad = p.real < -1e-6 * np.max(np.abs(p))
    if np.any(bad):
        raise BranchError(f"Re dPhi^(nu) < 0 at nu = {nu[np.argmax(bad)]:.3g}")
    # subtract the Debye-like term with the same nu -> 0 value before inverting
    p0 = p[0].real
    tau = p0 / (1 - c)
    r = p0 / (1 - 1j * nu * tau)
    q = p - r
    res = lft(SampledFunction(SignedLogGrid(plan.inverse.omega_grid), q, np.conj(q)),
              plan.inverse, etas=(1,))
    out = res.eta_pos
    return out.real + (1 - c) * np.exp(-t / tau), p, float(np.max(np.abs(out.imag)))


def mct_solve(params, plan=None, initial=None, raise_on_failure=True, callback=None):
    """Fixed-point solution of the frequency-domain equations.

    ``initial`` defaults to (1 - c) e^{-t}; a previous solution's
    ``delta_phi_t`` is a good warm start near the transition.  With
    ``raise_on_failure=False`` an unconverged run returns its last iterate
    with ``converged=False``.
    """
    plan = mct_plan(k_forward=params.k_forward, k_inverse=params.k_inverse) if plan is None else plan
    c = plateau_constant(params.lam)
    t, nu = plan.t, plan.nu
    x = (1 - c) * np.exp(-t) if initial is None else np.array(initial, dtype=float)
    if x.shape != t.shape:
        raise InvalidArgumentError("initial iterate does not match the time grid")
    hist = []
    t0 = time.perf_counter()
    conv = False
    imag = 0.0
    it = 0
    p = None
    for it in range(1, int(params.max_iter) + 1):
        gx, p, imag = _step(x, params, plan, c, t, nu)
        f = gx - x
        diff = float(np.max(np.abs(f)))
        hist.append(diff)
        if not np.isfinite(diff):
            raise ConvergenceError("iteration diverged", hist)
        if diff < params.tol:
            x = gx
            conv = True
            break
        x = x + params.mixing * f
        if callback is not None:
            callback(it, diff)
    sol = MctSolution(c, t, x, nu, p, _extrapolate_zero(nu, p.real), it, conv,
                      tuple(hist), imag, time.perf_counter() - t0)
    if not conv and raise_on_failure:
        err = ConvergenceError(
            f"no convergence after {it} iterations (last change {hist[-1]:.2e})", hist)
        err.solution = sol
        raise err
    return sol


def damped_oscillator(t, gamma=1.0, omega0=1.0):
    """Phi(t) for lam = 0 with Phi(0) = 1, Phi'(0) = 0 (underdamped or overdamped)."""
    t = np.asarray(t, dtype=float)
    disc = omega0 ** 2 - gamma ** 2 / 4
    g2 = gamma / 2
    if disc > 0:
        w = math.sqrt(disc)
        return np.exp(-g2 * t) * (np.cos(w * t) + g2 / w * np.sin(w * t))
    if disc == 0:
        return np.exp(-g2 * t) * (1 + g2 * t)
    w = math.sqrt(-disc)
    return np.exp(-g2 * t) * (np.cosh(w * t) + g2 / w * np.sinh(w * t))


@njit
def _memint(m, psi, n, h):
    # trapezoid of sum_j m[n-j] psi[j], j = 0..n
    if n == 0:
        return 0.0
    s = 0.5 * (m[n] * psi[0] + m[0] * psi[n])
    for j in range(1, n):
        s += m[n - j] * psi[j]
    return s * h


@njit
def _oracle_kernel(lam, g, w, h, n):
    phi = np.zeros(n)
    psi = np.zeros(n)
    m = np.zeros(n)
    phi[0] = 1.0
    m[0] = 4 * lam
    w2 = w * w
    for i in range(n - 1):
        a0 = -g * psi[i] - w2 * phi[i] - w2 * _memint(m, psi, i, h)
        phi[i + 1] = phi[i] + h * psi[i] + 0.5 * h * h * a0
        psi[i + 1] = psi[i] + h * a0
        for _ in range(3):
            m[i + 1] = 4 * lam * phi[i + 1] ** 2
            a1 = -g * psi[i + 1] - w2 * phi[i + 1] - w2 * _memint(m, psi, i + 1, h)
            psi[i + 1] = psi[i] + 0.5 * h * (a0 + a1)
            phi[i + 1] = phi[i] + 0.5 * h * (psi[i] + psi[i + 1])
        if abs(phi[i + 1]) > 10.0:
            return phi[: i + 2]
    return phi


def _oracle_kernel_numpy(lam, g, w, h, n):
    phi = np.zeros(n)
    psi = np.zeros(n)
    m = np.zeros(n)
    phi[0] = 1.0
    m[0] = 4 * lam
    w2 = w * w

    def mem(k):
        if k == 0:
            return 0.0
        s = np.dot(m[k:0:-1], psi[:k]) - 0.5 * m[k] * psi[0] + 0.5 * m[0] * psi[k]
        return s * h

    for i in range(n - 1):
        a0 = -g * psi[i] - w2 * phi[i] - w2 * mem(i)
        phi[i + 1] = phi[i] + h * psi[i] + 0.5 * h * h * a0
        psi[i + 1] = psi[i] + h * a0
        for _ in range(3):
            m[i + 1] = 4 * lam * phi[i + 1] ** 2
            a1 = -g * psi[i + 1] - w2 * phi[i + 1] - w2 * mem(i + 1)
            psi[i + 1] = psi[i] + 0.5 * h * (a0 + a1)
            phi[i + 1] = phi[i] + 0.5 * h * (psi[i] + psi[i + 1])
        if abs(phi[i + 1]) > 10.0:
            return phi[: i + 2]
    return phi


def _oracle_run(params, t_max, h):
    n = int(round(t_max / h)) + 1
    fn = _oracle_kernel if _accel.USE_NUMBA else _oracle_kernel_numpy
    phi = fn(float(params.lam), float(params.gamma), float(params.omega0), float(h), n)
    if phi.shape[0] < n:
        raise OracleError(f"direct integration became unstable at t = {(phi.shape[0] - 1) * h:g}")
    return phi


def mct_direct_oracle(params, t_max=30.0, dt=0.1, h_max=0.02):
    """Time-domain reference Phi(t) on t = 0, dt, 2dt, ..., t_max.

    Heun-type predictor-corrector (three trapezoidal corrector sweeps)
    for the equation of motion with a trapezoidal memory integral.  The
    internal step is at most ``h_max``; runs at h and h/2 are combined by
    Richardson extrapolation of the second-order error.
    """
    if not 0 < t_max <= 1e3:
        raise InvalidArgumentError("t_max must lie in (0, 1e3]")
    if not 0 < dt <= 0.1:
        raise InvalidArgumentError("dt must lie in (0, 0.1]")
    sub = max(1, math.ceil(dt / h_max - 1e-9))
    h = dt / sub
    n_out = int(math.floor(t_max / dt + 1e-9)) + 1
    t_end = (n_out - 1) * dt
    coarse = _oracle_run(params, t_end, h)[::sub]
    fine = _oracle_run(params, t_end, h / 2)[::2 * sub]
    phi = fine + (fine - coarse) / 3.0
    return np.arange(n_out) * dt, phi[:n_out]


# -- exponent sweep --------------------------------------------------------

@dataclass(frozen=True)
class ExponentEstimate:
    exponent: float
    plain_slope: float
    correction: float
    js: tuple


def fit_critical_exponent(js, values, correction_power=0.5):
    """Exponent of values ~ |1 - lam|^{-x} with lam = 1 +- 2^{-j}.

    Fits ln v = c0 + x j ln 2 + c1 2^{-p j} (leading correction to scaling
    of relative order |1 - lam|^p); ``correction_power=None`` gives the
    plain two-parameter slope.
    """
    js = np.asarray(js, dtype=float)
    lv = np.log(np.asarray(values, dtype=float))
    if js.size < 3 or np.any(~np.isfinite(lv)):
        raise InvalidArgumentError("need at least three positive values")
    lj = js * math.log(2)
    plain = float(np.polyfit(lj, lv, 1)[0])
    if correction_power is None:
        return ExponentEstimate(plain, plain, 0.0, tuple(js.astype(int)))
    A = np.vstack([np.ones_like(lj), lj, 2.0 ** (-correction_power * js)]).T
    coef = np.linalg.lstsq(A, lv, rcond=None)[0]
    return ExponentEstimate(float(coef[1]), plain, float(coef[2]), tuple(js.astype(int)))


@dataclass(frozen=True)
class SweepResult:
    side: int
    js: tuple
    lambdas: tuple
    phi0_hat: tuple
    iterations: tuple
    converged: tuple
    elapsed: float
    solutions: dict = field(default_factory=dict, repr=False)

    def estimate(self, j_min=None, j_max=None, correction_power=0.5):
        sel = [(j, p) for j, p in zip(self.js, self.phi0_hat)
               if (j_min is None or j >= j_min) and (j_max is None or j <= j_max)]
        js, ps = zip(*sel)
        return fit_critical_exponent(js, ps, correction_power)


def critical_sweep(side, js, base=None, plan=None, keep=(), warm_start=True, start=None,
                   progress=None):
    """Solve at lam = 1 + side 2^{-j} for increasing j, warm-starting each run.

    Runs that hit ``max_iter`` are kept (flagged unconverged).  ``keep``
    lists the j whose full solutions are retained.
    """
    if side not in (1, -1):
        raise InvalidArgumentError("side must be +1 (glass) or -1 (ergodic)")
    base = MctParams(lam=0.0) if base is None else base
    plan = mct_plan(k_forward=base.k_forward, k_inverse=base.k_inverse) if plan is None else plan
    x = start
    out = {"j": [], "lam": [], "p0": [], "it": [], "ok": []}
    sols = {}
    t0 = time.perf_counter()
    for j in js:
        lam = 1.0 + side * 2.0 ** (-j)
        sol = mct_solve(replace(base, lam=lam), plan, initial=x, raise_on_failure=False)
        if warm_start:
            x = sol.delta_phi_t
        for key, v in zip(("j", "lam", "p0", "it", "ok"),
                          (int(j), lam, sol.phi0_hat, sol.iterations, sol.converged)):
            out[key].append(v)
        if j in keep:
            sols[int(j)] = sol
        if progress is not None:
            progress(j, sol)
    return SweepResult(side, tuple(out["j"]), tuple(out["lam"]), tuple(out["p0"]),
                       tuple(out["it"]), tuple(out["ok"]), time.perf_counter() - t0, sols)
