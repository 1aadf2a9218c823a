r"""Discrete logarithmic Fourier-Laplace transform.

For each output sign eta and output point y_n the engine evaluates

    out(eta e^{y_n}) = P e^{-k y_n} sum_sigma sum_l (ds/2pi) e^{i s_l y_n} K_{sigma eta}(s_l)
                       * sum_m (dx/2pi) f(sigma e^{x_m}) e^{(1-k) x_m} e^{i x_m s_l}

with K the tabulated kernel and P = 1 (inverse, nu -> t) or 2 pi (forward,
t -> nu).  Normalizations:

    inverse:  f^(t)  = \int dnu/(2 pi) f(nu) e^{-i nu t}     (phi = pi/2)
    forward:  f(nu)  = \int dt f^(t) e^{+i nu t}             (phi = 3 pi/2)

and phi = pi replaces the Fourier factor by the Laplace factor e^{-nu t}.
The inner sum is shared by both output signs and the outer sum by both
input signs, so a two-sided transform costs four fractional transforms.
"""
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import CorrectionError, InvalidArgumentError, PlanError
from .log_grid import LogGrid, SampledFunction, SignedLogGrid, build_grid
from .spectral_core import FractionalTransformSpec, frft
from .special_functions import KernelTable, build_kernel_table, check_k_margin

__all__ = [
    "TransformPlan",
    "TransformResult",
    "ResidueCorrection",
    "make_plan",
    "plan_from_dict",
    "lft",
    "lft_laplace",
    "subtract_gamma_residues",
]

_DEFAULT_PHI = {"inverse": np.pi / 2, "forward": 3 * np.pi / 2}


@dataclass(frozen=True)
class TransformPlan:
    k: float
    phi: float
    direction: str
    half_sided: bool
    omega_grid: LogGrid
    s_grid: LogGrid
    tau_grid: LogGrid
    kernel: KernelTable = field(repr=False)
    epsilon: float = 1e-12
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_points(self):
        return self.omega_grid.n_points

    @property
    def beta_omega(self):
        return 2 * np.pi / self.omega_grid.delta

    @property
    def beta_s(self):
        return 2 * np.pi / self.s_grid.delta

    @property
    def prefactor(self):
        return 2 * np.pi if self.direction == "forward" else 1.0

    def inner_spec(self):
        g, s = self.omega_grid, self.s_grid
        return FractionalTransformSpec(g.n_points, g.delta * s.delta, g.shift, s.shift, 1)

    def outer_spec(self):
        s, t = self.s_grid, self.tau_grid
        return FractionalTransformSpec(s.n_points, s.delta * t.delta, s.shift, t.shift, 1)

    def to_dict(self):
        d = {
            "k": self.k, "phi": self.phi, "direction": self.direction,
            "half_sided": self.half_sided, "N": self.n_points,
            "d_omega": self.omega_grid.delta, "d_s": self.s_grid.delta,
            "d_tau": self.tau_grid.delta, "omega_s": self.omega_grid.shift,
            "s_s": self.s_grid.shift, "tau_s": self.tau_grid.shift,
            "epsilon": self.epsilon,
        }
        for key in ("a", "b", "r1"):
            d[key] = self.meta.get(key)
        return d


def make_plan(k, omega_grid, s_grid, tau_grid, phi=None, direction="inverse",
              half_sided=False, epsilon=1e-12, meta=None):
    """Validate parameters and tabulate the kernel."""
    if direction not in _DEFAULT_PHI:
        raise PlanError("direction must be 'inverse' or 'forward'")
    check_k_margin(k)
    grids = (omega_grid, s_grid, tau_grid)
    if not all(isinstance(g, LogGrid) for g in grids):
        raise PlanError("grids must be LogGrid instances")
    if len({g.n_points for g in grids}) != 1:
        raise PlanError("omega, s and tau grids must share N")
    if not 0 < epsilon < 1:
        raise PlanError("epsilon must lie in (0, 1)")
    phi = _DEFAULT_PHI[direction] if phi is None else float(phi) % (2 * np.pi)
    kernel = build_kernel_table(s_grid, k, phi, direction)
    return TransformPlan(float(k), phi, direction, bool(half_sided), omega_grid, s_grid,
                         tau_grid, kernel, float(epsilon), dict(meta or {}))


def plan_from_dict(d):
    """Inverse of :meth:`TransformPlan.to_dict` (plan JSON schema)."""
    try:
        n = int(d["N"])
        direction = d.get("direction", "inverse")
        og = build_grid(d["d_omega"], d.get("omega_s", -n / 2), n)
        sg = build_grid(d["d_s"], d.get("s_s", -n / 2), n)
        tg = build_grid(d.get("d_tau", d["d_omega"]), d.get("tau_s", -n / 2), n)
        meta = {key: d.get(key) for key in ("a", "b", "r1")}
        return make_plan(float(d["k"]), og, sg, tg, d.get("phi"), direction,
                         bool(d.get("half_sided", False)), float(d.get("epsilon", 1e-12)), meta)
    except KeyError as exc:
        raise PlanError(f"plan is missing field {exc.args[0]!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PlanError):
            raise
        raise PlanError(f"malformed plan: {exc}")


@dataclass(frozen=True)
class ResidueCorrection:
    """Subtracted term sum_eta c_eta e^{m y} (coefficients per output sign)."""

    m: int
    coefficients: dict


@dataclass(frozen=True)
class TransformResult:
    grid: SignedLogGrid
    eta_pos: np.ndarray
    eta_neg: np.ndarray
    k: float
    epsilon: float
    corrections: tuple = ()
    spectrum: Optional[dict] = field(default=None, repr=False, compare=False)

    def branch(self, eta):
        return self.eta_pos if eta == 1 else self.eta_neg

    @property
    def log_points(self):
        return self.grid.log_points

    def envelope(self, epsilon=None):
        """Predicted absolute accuracy eps * e^{-k y} on the output grid."""
        eps = self.epsilon if epsilon is None else epsilon
        return eps * np.exp(-self.k * self.grid.log_points)

    def evaluate(self, log_points, eta=1):
        """Transform at arbitrary output points y (off-grid), O(N) per point.

        Re-evaluates the outer sum at ``log_points`` and removes the
        recorded residue corrections, so on grid points it reproduces the
        stored samples.
        """
        if self.spectrum is None:
            raise InvalidArgumentError("result carries no spectrum to evaluate")
        y = np.atleast_1d(np.asarray(log_points, dtype=np.float64))
        sp = self.spectrum
        acc = sp["acc"][eta]
        out = np.empty(y.shape, dtype=np.complex128)
        for lo in range(0, y.size, 256):
            yy = y[lo:lo + 256]
            out[lo:lo + 256] = np.exp(1j * np.outer(yy, sp["s"])) @ acc
        out *= sp["scale"] * np.exp(-self.k * y)
        for c in self.corrections:
            out -= c.coefficients.get(eta, 0) * np.exp(c.m * y)
        return out

    def as_sampled(self, half_sided=False):
        """Output samples re-wrapped as input for a further transform."""
        return SampledFunction(self.grid, self.eta_pos, None if half_sided else self.eta_neg)


def _check_input(samples, plan):
    if not isinstance(samples, SampledFunction):
        raise InvalidArgumentError("input must be a SampledFunction")
    if not isinstance(plan, TransformPlan):
        raise PlanError("plan must be a TransformPlan")
    if samples.grid.base != plan.omega_grid:
        raise InvalidArgumentError("input grid does not match the plan's input grid")
    if plan.kernel.k != plan.k or len(plan.kernel) != plan.s_grid.n_points:
        raise PlanError("kernel table does not belong to this plan")


def lft(samples, plan, etas=(1, -1)):
    """Run the discrete transform described in the module docstring."""
    _check_input(samples, plan)
    x = plan.omega_grid.points
    y = plan.tau_grid.points
    k = plan.k
    sigmas = (1,) if (plan.half_sided or samples.half_sided) else (1, -1)
    w_in = np.exp((1 - k) * x) * (plan.omega_grid.delta / (2 * np.pi))
    inner = plan.inner_spec()
    outer = plan.outer_spec()
    g = {sg: frft(samples.branch(sg) * w_in, inner) for sg in sigmas}
    w_out = plan.prefactor * (plan.s_grid.delta / (2 * np.pi)) * np.exp(-k * y)
    out = {}
    accs = {}
    n = plan.n_points
    for eta in (1, -1):
        acc = np.zeros(n, dtype=np.complex128)
        if eta not in etas:
            out[eta] = acc
            accs[eta] = acc
            continue
        for sg in sigmas:
            acc += plan.kernel[(sg, eta)] * g[sg]
        accs[eta] = acc
        out[eta] = w_out * frft(acc, outer)
    spectrum = {"acc": accs, "s": plan.s_grid.points,
                "scale": plan.prefactor * plan.s_grid.delta / (2 * np.pi)}
    return TransformResult(SignedLogGrid(plan.tau_grid), out[1], out[-1], k, plan.epsilon,
                           spectrum=spectrum)


def lft_laplace(samples, plan):
    """Laplace transform int_0^inf dnu f(nu) e^{-nu t} (phi must be pi)."""
    if abs(plan.phi - np.pi) > 1e-12:
        raise PlanError("lft_laplace needs a plan with phi = pi")
    if not plan.half_sided:
        plan = replace(plan, half_sided=True)
    res = lft(samples, plan)
    if plan.direction == "inverse":
        sp = dict(res.spectrum, scale=res.spectrum["scale"] * 2 * np.pi)
        res = replace(res, eta_pos=res.eta_pos * 2 * np.pi, eta_neg=res.eta_neg * 2 * np.pi,
                      spectrum=sp)
    return res


def _window_slice(n, fit_window):
    if fit_window is None:
        lo = n - max(1, int(round(0.1 * n)))
        return slice(lo, n)
    if isinstance(fit_window, slice):
        return slice(*fit_window.indices(n))
    lo, hi = fit_window
    return slice(*slice(int(lo), int(hi)).indices(n))


def subtract_gamma_residues(result, plan=None, orders=(0,), fit_window=None, keep=(),
                            etas=(1, -1)):
    """Remove fitted residue terms c_m e^{m y} from a transform result.

    Parameters
    ----------
    result : TransformResult
    plan : TransformPlan, optional
        Only used to cross-check the trade-off parameter.
    orders : iterable of int
        Residue orders m >= 0 to subtract.
    fit_window : slice or (lo, hi), optional
        Index range of the least-squares fit; defaults to the last 10% of
        the output grid.
    keep : iterable of float
        Extra exponents p of known asymptotic terms e^{p y} of the true
        image inside the window.  They are fitted jointly with the residues
        but not subtracted.
    etas : output signs to correct.
    """
    orders = [int(m) for m in orders]
    if any(m < 0 for m in orders) or len(set(orders)) != len(orders):
        raise InvalidArgumentError("residue orders must be distinct integers >= 0")
    if plan is not None and plan.k != result.k:
        raise PlanError("plan and result disagree on k")
    if not orders:
        return result
    y = result.log_points
    win = _window_slice(y.shape[0], fit_window)
    yw = y[win]
    cols = list(orders) + [float(p) for p in keep]
    if yw.size < len(cols):
        raise CorrectionError(
            f"fit window holds {yw.size} points for {len(cols)} terms", result)
    y_ref = yw[-1]
    design = np.exp(np.outer(yw - y_ref, cols))
    norms = np.linalg.norm(design, axis=0)
    if not np.all(np.isfinite(norms)) or np.any(norms == 0):
        raise CorrectionError("residue fit design matrix is not finite", result)
    design = design / norms
    if np.linalg.matrix_rank(design) < len(cols):
        raise CorrectionError("residue fit is rank deficient", result)
    basis = np.exp(np.outer(y - y_ref, orders))
    new = {1: result.eta_pos.copy(), -1: result.eta_neg.copy()}
    coef = {m: {} for m in orders}
    for eta in etas:
        c = np.linalg.lstsq(design, new[eta][win], rcond=None)[0] / norms
        new[eta] = new[eta] - basis @ c[:len(orders)]
        for m, cm in zip(orders, c):
            coef[m][eta] = complex(cm * np.exp(-m * y_ref))
    merged = {c.m: dict(c.coefficients) for c in result.corrections}
    for m, cm in coef.items():
        slot = merged.setdefault(m, {})
        for eta, v in cm.items():
            slot[eta] = slot.get(eta, 0) + v
    corr = tuple(ResidueCorrection(m, merged[m]) for m in sorted(merged))
    return replace(result, eta_pos=new[1], eta_neg=new[-1], corrections=corr)
