#!/usr/bin/env python3
"""Time the series kernels under both backends.

Runs representative workloads (single-point moment engines, a batched
2001-phase grid scan, and one full phase optimization) in subprocesses with
PAMZI_BACKEND set to numba and to numpy, and prints a side-by-side table.

    python benchmarks/bench_kernels.py [--repeats 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOADS = ["engine_m1", "engine_m3", "grid_idiff_m3", "optimize_idiff_m2"]

_CHILD = r"""
import json, time
import numpy as np
from pamzi.core import ExperimentParams, Scheme, Detector
from pamzi.genfun import MomentEngine, PhiBatchEngine, MomentSpec
from pamzi import metrology as met
import pamzi._kernels as kernels

def engine(m):
    prm = ExperimentParams(alpha_mag=1.0, r=1.0, phi=1.1, T=0.8, m=m,
                           scheme=Scheme.B)
    eng = MomentEngine(Scheme.B, prm, p_cap=2, q_cap=2, order_cap=4)
    return eng.moment(MomentSpec(p1=1, p2=1)).val.real

def grid(m):
    prm = ExperimentParams(alpha_mag=1.0, r=1.0, phi=1.1, T=1.0, m=m,
                           scheme=Scheme.B)
    d = met._delta_phi_grid(Detector.INTENSITY_DIFF, Scheme.B, prm,
                            np.linspace(0.01, 3.13, 2001))
    return float(np.min(d))

def optimize(m):
    prm = ExperimentParams(alpha_mag=1.0, r=1.0, phi=1.1, T=1.0, m=m,
                           scheme=Scheme.B)
    _, rep = met.optimize_phase(Detector.INTENSITY_DIFF, Scheme.B, prm)
    return rep.delta_phi

WORK = {
    "engine_m1": lambda: [engine(1) for _ in range(200)],
    "engine_m3": lambda: [engine(3) for _ in range(50)],
    "grid_idiff_m3": lambda: grid(3),
    "optimize_idiff_m2": lambda: optimize(2),
}

name, repeats = json.loads(input())
fn = WORK[name]
fn()  # warm the jit cache so compile time is not timed
times = []
for _ in range(repeats):
    t0 = time.perf_counter()
    fn()
    times.append(time.perf_counter() - t0)
print(json.dumps({"backend": kernels.active_backend(),
                  "best": min(times)}))
"""


def run_child(backend: str, name: str, repeats: int) -> dict:
    env = dict(os.environ, PAMZI_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", _CHILD],
                          input=json.dumps([name, repeats]),
                          capture_output=True, text=True, env=env)
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    print(f"{'workload':<22} {'numba [s]':>10} {'numpy [s]':>10} {'ratio':>7}")
    for name in WORKLOADS:
        nb = run_child("numba", name, args.repeats)
        np_ = run_child("numpy", name, args.repeats)
        ratio = np_["best"] / nb["best"]
        print(f"{name:<22} {nb['best']:>10.3f} {np_['best']:>10.3f} "
              f"{ratio:>6.1f}x")


if __name__ == "__main__":
    main()
