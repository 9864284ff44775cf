"""Time the numba kernels against their numpy twins.

Each backend runs in a fresh interpreter because the choice is fixed at
import time by ``RIESZ_ANNULUS_NO_JIT``.  Compilation is excluded by a
warm-up call.

    python benchmarks/bench_backends.py [--repeat 20] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, timeit
import numpy as np
from riesz_annulus import _kernels as k
from riesz_annulus.balayage import solve_mu_lambda
from riesz_annulus.oracle import ParticleSystem, descend, initial_positions

repeat = int(sys.argv[1])
t = np.cos(np.linspace(0.0, np.pi, 2000))
coeffs = 1.0 / (1.0 + np.arange(64.0)) ** 2
cases = {
    "pair_energy_gradient N=400": lambda: k.pair_energy_gradient(initial_positions(400), 1.3),
    "pair_energy_gradient N=1600": lambda: k.pair_energy_gradient(initial_positions(1600), 1.3),
    "gegenbauer_table n=64 m=2000": lambda: k.gegenbauer_table(0.35, 64, t),
    "gegenbauer_series n=64 m=2000": lambda: k.gegenbauer_series(0.35, coeffs, t),
    "solve_mu_lambda(0.5, 0.7)": lambda: solve_mu_lambda(0.5, 0.7),
    "descend b=1.3 N=400": lambda: descend(ParticleSystem(initial_positions(400), 1.3)),
}
out = {"backend": k.BACKEND}
for name, fn in cases.items():
    fn()
    out[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
print(json.dumps(out))
"""


def run(no_jit: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env["RIESZ_ANNULUS_NO_JIT"] = "1" if no_jit else "0"
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=10)
    ap.add_argument("--json", dest="json_path")
    args = ap.parse_args()
    jit, ref = run(False, args.repeat), run(True, args.repeat)
    print(f"{'case':34s} {jit['backend']:>12s} {ref['backend']:>12s} {'speedup':>8s}")
    for name in jit:
        if name == "backend":
            continue
        print(f"{name:34s} {jit[name] * 1e3:10.3f}ms {ref[name] * 1e3:10.3f}ms {ref[name] / jit[name]:8.2f}")
    if args.json_path:
        with open(args.json_path, "w") as fh:
            json.dump({"jit": jit, "reference": ref}, fh, indent=2)


if __name__ == "__main__":
    main()
