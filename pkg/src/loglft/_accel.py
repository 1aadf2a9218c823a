"""Numba dispatch.

Hot kernels are written once in a numba-compatible subset of numpy and
compiled with ``njit`` unless ``LOGLFT_DISABLE_NUMBA`` is set to a truthy
value (or numba is not importable), in which case every caller uses its
pure-numpy fallback path instead.
"""
import os

_TRUTHY = {"1", "true", "yes", "on"}


def _flag(name):
    return os.environ.get(name, "").strip().lower() in _TRUTHY


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _numba = None

USE_NUMBA = _numba is not None and not _flag("LOGLFT_DISABLE_NUMBA")

if USE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is often too old; try it last so no warning is raised
    _numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def njit(*args, **kwargs):
    """``numba.njit`` when acceleration is active, identity otherwise."""
    if not USE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)


if USE_NUMBA:
    prange = _numba.prange
else:
    prange = range


def thread_count():
    """Thread cap from ``LOGLFT_THREADS`` (0 or unset means automatic)."""
    raw = os.environ.get("LOGLFT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"LOGLFT_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError("LOGLFT_THREADS must be >= 0")
    return n


def apply_thread_limit():
    n = thread_count()
    if USE_NUMBA and n > 0:
        _numba.set_num_threads(min(n, _numba.config.NUMBA_NUM_THREADS))
    return n


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
