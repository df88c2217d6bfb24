"""Compare the numba tableau kernels against the pure-numpy fallback.

Runs the same seeded measurement workload through both code paths (the
fallback is selected with TWISTSIM_DISABLE_NUMBA=1) and reports wall times.

Usage: python benchmarks/bench_kernels.py [--sizes 48 96 192] [--reps 2000]
"""

import argparse
import os
import subprocess
import sys
import time

WORKLOAD = r"""
import os, time
import numpy as np
from twistsim import _kernels
from twistsim.lattice import build_lattice
from twistsim.tableau import init_ground
from twistsim.pauli import PauliString

n_sites = {n_sites}
reps = {reps}

side = int(np.sqrt(n_sites))
lat = build_lattice(max(side, 4), max(n_sites // max(side, 4), 4), [])
t = init_ground(lat, seed=0)
rng = np.random.default_rng(0)
strings = []
for _ in range(64):
    letters = {{int(s): "IXYZ"[rng.integers(4)] for s in range(lat.n_sites)}}
    d = {{s: l for s, l in letters.items() if l != "I"}}
    strings.append(PauliString.from_dict(d))

# warm-up (includes any JIT compilation)
warm = t.copy()
for p in strings[:8]:
    warm.measure(p)

start = time.perf_counter()
work = t.copy()
for k in range(reps):
    work.measure(strings[k % len(strings)])
elapsed = time.perf_counter() - start
mode = "numpy" if os.environ.get("TWISTSIM_DISABLE_NUMBA") else "numba"
print(f"{{mode}}\t{{lat.n_sites}}\t{{reps}}\t{{elapsed:.3f}}\t{{reps / elapsed:.0f}}")
"""


def run(n_sites: int, reps: int, disable_numba: bool) -> str:
    env = dict(os.environ)
    if disable_numba:
        env["TWISTSIM_DISABLE_NUMBA"] = "1"
    else:
        env.pop("TWISTSIM_DISABLE_NUMBA", None)
    code = WORKLOAD.format(n_sites=n_sites, reps=reps)
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    if out.returncode != 0:
        raise RuntimeError(out.stderr)
    return out.stdout.strip()


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", type=int, nargs="+", default=[48, 96, 192])
    parser.add_argument("--reps", type=int, default=2000)
    args = parser.parse_args()

    print("kernel\tsites\treps\tseconds\tmeas/s")
    for n in args.sizes:
        for disable in (False, True):
            print(run(n, args.reps, disable))


if __name__ == "__main__":
    main()
