"""Time the numba kernels against the numpy fallback.

Each backend runs in its own subprocess because the choice is fixed at
import time by LOGLFT_DISABLE_NUMBA.  Numba timings exclude the first
(compiling) call.

    python benchmarks/bench_backends.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from loglft import _accel
from loglft.bench_cases import run_fig1
from loglft.physics_suite import MctParams, mct_direct_oracle
from loglft.spectral_core import FractionalTransformSpec, frft, naive_fractional_sum

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
x = rng.normal(size=4096) + 1j * rng.normal(size=4096)
spec = FractionalTransformSpec(4096, 1e-4, -2048, -2048)
xs = x[:1500]
spec_small = FractionalTransformSpec(1500, 1e-3, -750, -750)
cases = {
    "frft N=4096": lambda: frft(x, spec),
    "naive sum N=1500": lambda: naive_fractional_sum(xs, spec_small),
    "fig1 transform": run_fig1,
    "MCT oracle t<=10": lambda: mct_direct_oracle(MctParams(lam=0.5), t_max=10.0),
}
out = {"backend": _accel.backend_name(), "times": {}}
for name, fn in cases.items():
    fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out["times"][name] = best
json.dump(out, sys.stdout)
"""


def run(disable, repeat):
    env = dict(os.environ)
    env.pop("LOGLFT_DISABLE_NUMBA", None)
    if disable:
        env["LOGLFT_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'case':<20} {fast['backend']:>10} {slow['backend']:>10} {'speedup':>8}")
    for name, tn in fast["times"].items():
        ts = slow["times"][name]
        print(f"{name:<20} {tn * 1e3:>8.2f}ms {ts * 1e3:>8.2f}ms {ts / tn:>7.1f}x")


if __name__ == "__main__":
    main()
