"""Time the hot kernels under the numba and pure-numpy backends.

Each backend runs in its own interpreter because the switch is read at import
time.  Usage::

    python3 benchmarks/bench_backends.py [--repeat 3] [--n 5]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from breakmin import BACKEND, build_model, build_mdrrt, extract_meetings, generate_srrt
from breakmin.solvers import Schedule, solve_annealing, solve_branch_and_bound, solve_brute_force

n, repeat = int(sys.argv[1]), int(sys.argv[2])
Q = build_model(extract_meetings(build_mdrrt(generate_srrt(n), 0)))
Q3 = build_model(extract_meetings(build_mdrrt(generate_srrt(3), 0)))
Z = np.random.default_rng(0).integers(0, 2, size=(20_000, Q.num_vars)).astype(np.uint8)
tasks = {
    "batch_objective": lambda: Q.objective_many(Z),
    "brute_force_n3": lambda: solve_brute_force(Q3),
    "anneal": lambda: solve_annealing(Q, seed=0, schedule=Schedule(sweeps=200, restarts=2)),
    "branch_and_bound": lambda: solve_branch_and_bound(Q, warm_start=False),
}
out = {"backend": BACKEND, "times": {}, "values": {}}
for name, fn in tasks.items():
    value = fn()  # compile / warm caches
    samples = []
    for _ in range(repeat):
        t = time.perf_counter()
        value = fn()
        samples.append(time.perf_counter() - t)
    out["times"][name] = min(samples)
    out["values"][name] = int(value.sum()) if isinstance(value, np.ndarray) else int(value.objective)
print(json.dumps(out))
"""


def run(disable: bool, n: int, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("BREAKMIN_DISABLE_NUMBA", None)
    if disable:
        env["BREAKMIN_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", WORKER, str(n), str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--n", type=int, default=5, help="half team count of the test instance")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    fast = run(False, args.n, args.repeat)
    slow = run(True, args.n, args.repeat)
    if fast["values"] != slow["values"]:
        print("backends disagree:", fast["values"], slow["values"], file=sys.stderr)
        return 1
    print(f"{'kernel':<18} {fast['backend']:>10} {slow['backend']:>10} {'speedup':>8}")
    for name, t_fast in fast["times"].items():
        t_slow = slow["times"][name]
        print(f"{name:<18} {t_fast:>9.4f}s {t_slow:>9.4f}s {t_slow / t_fast:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
