"""Complex Gamma function and the LFT kernel factor.

``log_gamma_complex`` follows the usual log-gamma convention (analytic in
the plane cut along the negative real axis, real for real z > 0), which is
also the convention of ``scipy.special.loggamma`` and ``mpmath.loggamma``.
Spouge's series (a = 15) handles |z| < 6; beyond that Spouge's alternating
coefficients cancel to ~1e-10, so the Stirling series takes over.  The left
half-plane goes through the reflection formula with an overflow-free
log sin(pi z).
"""
from dataclasses import dataclass, field
from math import factorial, exp, sqrt, pi

import numpy as np

from .errors import DomainError, PlanError

__all__ = [
    "gamma_complex",
    "log_gamma_complex",
    "kernel_phase",
    "kernel_factor",
    "kernel_values",
    "KernelTable",
    "build_kernel_table",
    "check_k_margin",
    "UNDERFLOW_FLOOR",
    "POLE_MARGIN",
]

UNDERFLOW_FLOOR = 1e-300
POLE_MARGIN = 0.01
_LOG_FLOOR = np.log(UNDERFLOW_FLOOR)

_SPOUGE_A = 15
_SPOUGE_C = np.array(
    [sqrt(2 * pi)]
    + [(-1) ** (k - 1) / factorial(k - 1) * (_SPOUGE_A - k) ** (k - 0.5) * exp(_SPOUGE_A - k)
       for k in range(1, _SPOUGE_A)])
_STIRLING_SWITCH = 6.0
# B_2n / (2n (2n-1)), n = 1..10
_STIRLING_C = np.array([1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188,
                        -691 / 360360, 1 / 156, -3617 / 122400, 43867 / 244188,
                        -174611 / 125400])


def _lg_spouge(z):
    w = z - 1.0
    s = np.full_like(w, _SPOUGE_C[0])
    for k in range(1, _SPOUGE_A):
        s = s + _SPOUGE_C[k] / (w + k)
    return (w + 0.5) * np.log(w + _SPOUGE_A) - (w + _SPOUGE_A) + np.log(s)


def _lg_stirling(z):
    zi = 1.0 / z
    z2 = zi * zi
    acc = np.zeros_like(z)
    for c in _STIRLING_C[::-1]:
        acc = acc * z2 + c
    return (z - 0.5) * np.log(z) - z + 0.5 * np.log(2 * np.pi) + acc * zi


def _lg_right(z):
    out = np.empty_like(z)
    big = np.abs(z) >= _STIRLING_SWITCH
    if np.any(big):
        out[big] = _lg_stirling(z[big])
    if np.any(~big):
        out[~big] = _lg_spouge(z[~big])
    return out


def _log_sin_pi(z):
    # sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}) for Im z >= 0
    up = z.imag >= 0
    zz = np.where(up, z, np.conj(z))
    val = (-1j * np.pi * zz + np.log(0.5) + 0.5j * np.pi
           + np.log1p(-np.exp(2j * np.pi * zz)))
    return np.where(up, val, np.conj(val))


def _check_poles(z):
    r = np.round(z.real)
    hit = (z.real <= 0.5) & (r <= 0) & (np.abs(z - r) <= 1e-300)
    if np.any(hit):
        m = int(-r[hit].flat[0])
        raise DomainError(f"Gamma has a pole at z = {-m}", pole_index=m)


def log_gamma_complex(z):
    """log Gamma(z) for complex z (scalar or array)."""
    arr = np.asarray(z, dtype=np.complex128)
    scalar = arr.ndim == 0
    zz = np.atleast_1d(arr).ravel()
    _check_poles(zz)
    out = np.empty_like(zz)
    left = zz.real < 0.5
    if np.any(~left):
        out[~left] = _lg_right(zz[~left])
    if np.any(left):
        zl = zz[left]
        out[left] = np.log(np.pi) - _log_sin_pi(zl) - _lg_right(1.0 - zl)
    out = out.reshape(arr.shape) if not scalar else out[0]
    return complex(out) if scalar else out


def gamma_complex(z):
    """Gamma(z) for complex z (scalar or array)."""
    lg = log_gamma_complex(z)
    return complex(np.exp(lg)) if np.ndim(lg) == 0 else np.exp(lg)


def check_k_margin(k, margin=POLE_MARGIN):
    """Raise PlanError if k lies within ``margin`` of a nonpositive integer."""
    if not np.isfinite(k):
        raise PlanError("k must be finite")
    m = round(k)
    if m <= 0 and abs(k - m) < margin:
        raise PlanError(
            f"k = {k} is within {margin} of the Gamma pole at {m}; "
            f"use e.g. k = {m - margin:g} or {m + margin:g}")


def kernel_phase(sigma, eta, phi):
    """Angle of the kernel base, wrapped to (-pi, pi].

    phi = pi/2 gives base i (inverse Fourier kernel e^{-i nu t}),
    phi = 3pi/2 gives -i (forward kernel e^{+i nu t}), phi = pi gives 1
    (Laplace kernel e^{-nu t}); the sign pair sigma*eta = -1 adds pi.
    """
    if sigma not in (1, -1) or eta not in (1, -1):
        raise ValueError("sigma and eta must be +1 or -1")
    th = np.pi - phi + (0.0 if sigma * eta == 1 else np.pi)
    th = float(np.angle(np.exp(1j * th)))
    if th <= -np.pi:
        th += 2 * np.pi
    return th


def kernel_values(s, k, theta):
    """exp((i s - k) i theta + log Gamma(k - i s)), clamped to 0 below the floor."""
    s = np.asarray(s, dtype=np.float64)
    expo = (1j * s - k) * 1j * theta + log_gamma_complex(k - 1j * s)
    expo = np.asarray(expo)
    with np.errstate(over="ignore", under="ignore"):
        return np.where(expo.real < _LOG_FLOOR, 0.0, np.exp(expo))


def kernel_factor(s, k, sigma, eta, phi=np.pi / 2, direction="inverse"):
    """Kernel (e^{i theta})^{i s - k} Gamma(k - i s) for one sign pair.

    The phase is fixed by ``phi`` alone, so ``direction`` only has to be
    a valid name here; the forward 2 pi prefactor is applied by the engine.
    """
    if direction not in ("inverse", "forward"):
        raise ValueError("direction must be 'inverse' or 'forward'")
    check_k_margin(k)
    val = kernel_values(np.asarray([s], dtype=float), k, kernel_phase(sigma, eta, phi))
    return complex(val[0])


_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class KernelTable:
    """Kernel values on an s grid for every (sigma, eta) pair. Read-only."""

    k: float
    phi: float
    s_values: np.ndarray
    entries: dict = field(repr=False)
    underflow_count: int = 0

    def __getitem__(self, pair):
        return self.entries[pair]

    def __len__(self):
        return self.s_values.shape[0]


def build_kernel_table(s_grid, k, phi=np.pi / 2, direction="inverse"):
    """Tabulate :func:`kernel_factor` over ``s_grid`` for all four sign pairs."""
    if direction not in ("inverse", "forward"):
        raise ValueError("direction must be 'inverse' or 'forward'")
    check_k_margin(k)
    s = np.array(getattr(s_grid, "points", s_grid), dtype=np.float64)
    s.setflags(write=False)
    entries = {}
    zeros = 0
    for sg, et in _PAIRS:
        v = kernel_values(s, k, kernel_phase(sg, et, phi))
        if not np.all(np.isfinite(v)):
            raise PlanError("kernel table has non-finite entries (k too large for this s grid?)")
        zeros += int(np.count_nonzero(v == 0))
        v.setflags(write=False)
        entries[(sg, et)] = v
    return KernelTable(float(k), float(phi) % (2 * np.pi), s, entries, zeros)
