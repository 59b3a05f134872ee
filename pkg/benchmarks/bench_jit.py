"""Compare the numba-compiled kernels against the interpreted fallback.

Runs `simrel bench` in subprocesses with SIMREL_JIT=1 and SIMREL_JIT=0 on a
few generated models and prints a per-strategy speedup table.  Each
subprocess warms up once before timing, so JIT compilation cost is excluded.

    python benchmarks/bench_jit.py [--quick]
"""

import argparse
import os
import subprocess
import sys
import tempfile


def bench_once(aut_path, strategy, jit):
    env = dict(os.environ, SIMREL_JIT="1" if jit else "0")
    proc = subprocess.run(
        [sys.executable, "-m", "simrel", "bench", aut_path,
         "--strategy", strategy],
        capture_output=True, text=True, env=env, check=True)
    values = dict(line.split("=", 1) for line in proc.stdout.splitlines())
    return float(values["elapsed_s"]), values


def generate(aut_path, seed, states, letters, transitions):
    with open(aut_path, "w") as handle:
        subprocess.run(
            [sys.executable, "-m", "simrel", "random", "--seed", str(seed),
             "--states", str(states), "--letters", str(letters),
             "--transitions", str(transitions)],
            stdout=handle, text=True, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="smaller models, faster run")
    args = parser.parse_args()

    scale = 1 if args.quick else 4
    models = [
        ("sparse", dict(seed=3, states=120 * scale, letters=3,
                        transitions=300 * scale)),
        ("dense", dict(seed=5, states=60 * scale, letters=2,
                       transitions=900 * scale)),
        ("wide-alphabet", dict(seed=8, states=80 * scale, letters=12,
                               transitions=600 * scale)),
    ]

    print("%-15s %-11s %12s %12s %9s" %
          ("model", "strategy", "jit [s]", "no-jit [s]", "speedup"))
    with tempfile.TemporaryDirectory() as tmp:
        for name, params in models:
            path = os.path.join(tmp, name + ".aut")
            generate(path, **params)
            for strategy in ("compromise", "counting", "space"):
                jit_s, jit_vals = bench_once(path, strategy, jit=True)
                py_s, py_vals = bench_once(path, strategy, jit=False)
                for key in ("while_iterations", "splits", "blocks"):
                    assert jit_vals[key] == py_vals[key], \
                        "paths diverged on %s for %s/%s" % (key, name, strategy)
                print("%-15s %-11s %12.6f %12.6f %8.1fx" %
                      (name, strategy, jit_s, py_s,
                       py_s / jit_s if jit_s > 0 else float("inf")))


if __name__ == "__main__":
    main()
