"""Exponential grids and sampled functions.

A :class:`LogGrid` holds the logarithmic coordinates x_j = delta*(j + shift),
j = 1..N; the physical arguments are sigma*exp(x_j) on the two branches
sigma = +1 and sigma = -1.
"""
import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidArgumentError, RangeError
from .spectral_core import as_complex_vector

__all__ = [
    "LogGrid",
    "SignedLogGrid",
    "SampledFunction",
    "build_grid",
    "sample",
    "resample_tabulated",
    "read_tabulated_csv",
]


@dataclass(frozen=True)
class LogGrid:
    delta: float
    shift: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise InvalidArgumentError("grid step must be positive and finite")
        if not np.isfinite(self.shift):
            raise InvalidArgumentError("grid shift must be finite")
        if int(self.n_points) != self.n_points or self.n_points < 1:
            raise InvalidArgumentError("grid needs at least one point")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def points(self):
        """Logarithmic coordinates x_1..x_N."""
        return self.delta * (np.arange(1, self.n_points + 1) + self.shift)

    @property
    def first(self):
        return self.delta * (1 + self.shift)

    @property
    def last(self):
        return self.delta * (self.n_points + self.shift)

    def to_dict(self):
        return {"delta": self.delta, "shift": self.shift, "n_points": self.n_points}


@dataclass(frozen=True)
class SignedLogGrid:
    base: LogGrid

    @property
    def n_points(self):
        return self.base.n_points

    @property
    def log_points(self):
        return self.base.points

    def physical(self, sigma=1):
        if sigma not in (1, -1):
            raise InvalidArgumentError("sigma must be +1 or -1")
        return sigma * np.exp(self.base.points)


def build_grid(delta, shift, n):
    """Grid with points delta*(j + shift), j = 1..n."""
    return LogGrid(float(delta), float(shift), n)


def _as_signed(grid):
    if isinstance(grid, SignedLogGrid):
        return grid
    if isinstance(grid, LogGrid):
        return SignedLogGrid(grid)
    raise InvalidArgumentError("expected a LogGrid or SignedLogGrid")


@dataclass(frozen=True)
class SampledFunction:
    """Samples of f(sigma e^x) per branch; ``neg_branch`` is None when half-sided."""

    grid: SignedLogGrid
    pos_branch: np.ndarray
    neg_branch: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.grid.n_points
        pos = as_complex_vector(self.pos_branch, "pos_branch")
        if pos.shape[0] != n:
            raise InvalidArgumentError("pos_branch length does not match the grid")
        object.__setattr__(self, "pos_branch", pos)
        if self.neg_branch is not None:
            neg = as_complex_vector(self.neg_branch, "neg_branch")
            if neg.shape[0] != n:
                raise InvalidArgumentError("neg_branch length does not match the grid")
            object.__setattr__(self, "neg_branch", neg)

    @property
    def half_sided(self):
        return self.neg_branch is None

    def branch(self, sigma):
        if sigma == 1:
            return self.pos_branch
        if self.neg_branch is None:
            return np.zeros_like(self.pos_branch)
        return self.neg_branch


def sample(f, grid, branches="both"):
    """Evaluate ``f`` (vectorized over nu) on one or both branches of ``grid``."""
    grid = _as_signed(grid)
    if branches not in ("both", "positive"):
        raise InvalidArgumentError("branches must be 'both' or 'positive'")
    out = {}
    for sg in ((1, -1) if branches == "both" else (1,)):
        nu = grid.physical(sg)
        with np.errstate(all="ignore"):
            val = np.asarray(f(nu), dtype=np.complex128)
        if val.shape != nu.shape:
            val = np.broadcast_to(val, nu.shape).astype(np.complex128)
        bad = ~np.isfinite(val)
        if np.any(bad):
            raise InvalidArgumentError(
                f"non-finite sample at nu = {nu[np.argmax(bad)]!r}")
        out[sg] = val
    return SampledFunction(grid, out[1], out.get(-1))


def resample_tabulated(data, grid, branches="both"):
    """Spline tabulated (nu, value) pairs onto ``grid``.

    Real and imaginary parts are interpolated separately with natural cubic
    splines in omega = ln|nu|, independently on each branch.
    """
    grid = _as_signed(grid)
    arr = list(data)
    if not arr:
        raise RangeError("no tabulated data")
    nu = np.array([float(p[0]) for p in arr])
    val = np.array([complex(p[1]) for p in arr])
    if len(np.unique(nu)) != len(nu):
        raise InvalidArgumentError("tabulated nu values must be distinct")
    need = (1, -1) if branches == "both" else (1,)
    lo, hi = grid.base.first, grid.base.last
    out = {}
    for sg in need:
        sel = (nu > 0) if sg == 1 else (nu < 0)
        w = np.log(np.abs(nu[sel]))
        v = val[sel]
        order = np.argsort(w)
        w, v = w[order], v[order]
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if w.size < 2 or w[0] > lo + tol or w[-1] < hi - tol:
            have = f"[{w[0]:.6g}, {w[-1]:.6g}]" if w.size else "nothing"
            raise RangeError(
                f"branch sigma={sg:+d}: data cover ln|nu| in {have}, "
                f"grid needs [{lo:.6g}, {hi:.6g}]")
        x = grid.log_points
        if w.size == x.size and np.array_equal(w, x):
            out[sg] = v.copy()
            continue
        if w.size < 4:
            re = np.interp(x, w, v.real)
            im = np.interp(x, w, v.imag)
        else:
            re = CubicSpline(w, v.real, bc_type="natural")(x)
            im = CubicSpline(w, v.imag, bc_type="natural")(x)
        out[sg] = re + 1j * im
    return SampledFunction(grid, out[1], out.get(-1))


def read_tabulated_csv(path):
    """Read a ``nu,re,im`` CSV file into a list of (nu, complex) pairs."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames][:3] != ["nu", "re", "im"]:
            raise InvalidArgumentError("tabulated CSV must have header nu,re,im")
        for i, row in enumerate(reader, start=2):
            try:
                rows.append((float(row["nu"]), complex(float(row["re"]), float(row["im"]))))
            except (TypeError, ValueError):
                raise InvalidArgumentError(f"{path}: malformed line {i}")
    return rows
