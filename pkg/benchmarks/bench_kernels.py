"""Time the compiled and pure-Python kernels side by side.

Each backend runs in its own interpreter because the choice is fixed at
import time by ``QANOMALY_DISABLE_NUMBA``. Compilation is excluded: every
kernel is called once before timing.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--size 2000]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, timeit
import numpy as np
import qanomaly
from qanomaly import specfun, dynamics as dy

size, repeat = int(sys.argv[1]), int(sys.argv[2])
x = np.geomspace(0.01, 60.0, size)
p = dy.EffectiveParams(E=-0.8, A=0.3, theta=1.0, phi=0.4)
d = dy.DriveParams(B0=20.0, omega=1.3)

cases = {
    "bessel_i(2.5, x)": lambda: specfun.bessel_i(2.5, x),
    "bessel_k(1.5, x)": lambda: specfun.bessel_k(1.5, x),
    "logderiv(1.5, x<50)": lambda: specfun.bessel_i_logderiv_series(1.5, x[x < 50]),
    "dopri5 t=20, tol=1e-10": lambda: dy.propagate_numeric(dy.SpinState.up(), p, d, 20.0, tol=1e-10),
}
out = {"backend": qanomaly.BACKEND, "times": {}}
for name, fn in cases.items():
    fn()
    out["times"][name] = min(timeit.repeat(fn, number=1, repeat=repeat))
print(json.dumps(out))
"""


def run(disable: bool, size: int, repeat: int) -> dict:
    env = dict(os.environ, QANOMALY_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run(
        [sys.executable, "-c", WORKER, str(size), str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=2000, help="points per Bessel evaluation")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    fast = run(False, args.size, args.repeat)
    slow = run(True, args.size, args.repeat)
    print(f"{'kernel':<26}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for name, tf in fast["times"].items():
        ts = slow["times"][name]
        print(f"{name:<26}{tf * 1e3:>10.2f}ms{ts * 1e3:>10.2f}ms{ts / tf:>9.1f}x")


if __name__ == "__main__":
    main()
