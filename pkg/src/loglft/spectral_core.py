"""Fractional (chirp-z) Fourier sums on non-commensurate grids.

The logarithmic transforms need sums of the form

    out[l] = sum_m x[m] exp(i * sign * alpha * (m + shift_in) * (l + shift_out)),
    m, l = 1..N

for arbitrary real ``alpha`` and shifts.  Writing ``m l = (m^2 + l^2 - (l-m)^2)/2``
turns the sum into a linear convolution with a quadratic chirp, evaluated
with a power-of-two radix-2 FFT (Bluestein's algorithm).  A direct O(N^2)
evaluation is provided as a test oracle.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._accel import USE_NUMBA, njit, prange
from .errors import InvalidArgumentError

__all__ = [
    "FractionalTransformSpec",
    "as_complex_vector",
    "fft",
    "ifft",
    "frft",
    "naive_fractional_sum",
    "ChirpZ",
]


def as_complex_vector(values, name="input"):
    """Validate and convert to a finite 1-d complex128 array."""
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidArgumentError(f"{name} must be a non-empty 1-d vector")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class FractionalTransformSpec:
    """Parameters of one fractional sum (see module docstring)."""

    n_points: int
    alpha: float
    shift_in: float = 0.0
    shift_out: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 1:
            raise InvalidArgumentError("n_points must be a positive integer")
        if not np.isfinite(self.alpha) or self.alpha == 0.0:
            raise InvalidArgumentError("alpha must be finite and nonzero")
        if not (np.isfinite(self.shift_in) and np.isfinite(self.shift_out)):
            raise InvalidArgumentError("shifts must be finite")
        if self.sign not in (1, -1):
            raise InvalidArgumentError("sign must be +1 or -1")


# ---------------------------------------------------------------------------
# radix-2 FFT

@lru_cache(maxsize=32)
def _radix2_tables(m):
    if m < 1 or m & (m - 1):
        raise InvalidArgumentError(f"radix-2 FFT needs a power-of-two length, got {m}")
    bits = m.bit_length() - 1
    idx = np.arange(m)
    rev = np.zeros(m, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    tw = np.exp(-2j * np.pi * np.arange(max(m // 2, 1)) / m)
    rev.setflags(write=False)
    tw.setflags(write=False)
    return rev, tw


@njit
def _fft_inplace_numba(a, rev, tw):
    m = a.shape[0]
    for i in range(m):
        j = rev[i]
        if j > i:
            tmp = a[i]
            a[i] = a[j]
            a[j] = tmp
    half = 1
    while half < m:
        step = m // (2 * half)
        for start in range(0, m, 2 * half):
            for j in range(half):
                w = tw[j * step]
                u = a[start + j]
                v = a[start + j + half] * w
                a[start + j] = u + v
                a[start + j + half] = u - v
        half *= 2
    return a


def _fft_numpy(a, rev, tw):
    m = a.shape[0]
    a = a[rev]
    half = 1
    while half < m:
        step = m // (2 * half)
        blk = a.reshape(-1, 2 * half)
        v = blk[:, half:] * tw[::step][:half]
        u = blk[:, :half]
        a = np.concatenate((u + v, u - v), axis=1).reshape(m)
        half *= 2
    return a


def _fft_core(a):
    rev, tw = _radix2_tables(a.shape[0])
    if USE_NUMBA:
        return _fft_inplace_numba(a.copy(), rev, tw)
    return _fft_numpy(a, rev, tw)


def fft(a):
    """Unnormalized forward DFT, ``A[q] = sum_j a[j] exp(-2 pi i j q / M)``.

    Only power-of-two lengths are supported.
    """
    return _fft_core(np.asarray(a, dtype=np.complex128))


def ifft(a):
    """Inverse of :func:`fft` (includes the 1/M factor)."""
    a = np.asarray(a, dtype=np.complex128)
    return np.conj(_fft_core(np.conj(a))) / a.shape[0]


# ---------------------------------------------------------------------------
# Bluestein fractional transform

class ChirpZ:
    """Precomputed chirp tables for a :class:`FractionalTransformSpec`.

    Instances are immutable after construction and may be shared.
    """

    def __init__(self, spec):
        self.spec = spec
        n = spec.n_points
        self.n = n
        self.m = 1 << (2 * n - 1).bit_length() if n > 1 else 1
        sa = spec.sign * spec.alpha
        j = np.arange(n, dtype=np.float64)
        x0 = spec.shift_in + 1.0
        y0 = spec.shift_out + 1.0
        # 0-based j, q:  (j + x0)(q + y0) = jq + j*y0 + q*x0 + x0*y0
        self._pre = np.exp(1j * sa * (j * y0 + 0.5 * j * j))
        self._post = np.exp(1j * sa * (x0 * (j + y0) + 0.5 * j * j))
        chirp = np.exp(-0.5j * sa * j * j)
        b = np.zeros(self.m, dtype=np.complex128)
        b[:n] = chirp
        if n > 1:
            b[self.m - n + 1:] = chirp[1:][::-1]
        self._bhat = fft(b)
        for arr in (self._pre, self._post, self._bhat):
            arr.setflags(write=False)

    def __call__(self, x):
        a = np.zeros(self.m, dtype=np.complex128)
        a[:self.n] = x * self._pre
        conv = ifft(fft(a) * self._bhat)
        return conv[:self.n] * self._post


@lru_cache(maxsize=64)
def _chirp_plan(spec):
    return ChirpZ(spec)


def _check(values, spec):
    if not isinstance(spec, FractionalTransformSpec):
        raise InvalidArgumentError("spec must be a FractionalTransformSpec")
    x = as_complex_vector(values)
    if x.shape[0] != spec.n_points:
        raise InvalidArgumentError(
            f"input length {x.shape[0]} does not match n_points={spec.n_points}")
    return x


def frft(values, spec):
    """Fractional Fourier sum in O(N log N); see module docstring."""
    x = _check(values, spec)
    return _chirp_plan(spec)(x)


@njit(parallel=True)
def _naive_numba(x, sa, xs, ys):
    n = x.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for l in prange(n):
        yl = l + 1.0 + ys
        acc = 0.0 + 0.0j
        for m in range(n):
            acc += x[m] * np.exp(1j * sa * (m + 1.0 + xs) * yl)
        out[l] = acc
    return out


def _naive_numpy(x, sa, xs, ys, chunk=512):
    n = x.shape[0]
    mm = np.arange(1, n + 1) + xs
    ll = np.arange(1, n + 1) + ys
    out = np.empty(n, dtype=np.complex128)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        out[lo:hi] = np.exp(1j * sa * np.outer(ll[lo:hi], mm)) @ x
    return out


def naive_fractional_sum(values, spec):
    """Direct O(N^2) evaluation of the same sum as :func:`frft`."""
    x = _check(values, spec)
    sa = float(spec.sign * spec.alpha)
    if USE_NUMBA:
        return _naive_numba(x, sa, float(spec.shift_in), float(spec.shift_out))
    return _naive_numpy(x, sa, spec.shift_in, spec.shift_out)
