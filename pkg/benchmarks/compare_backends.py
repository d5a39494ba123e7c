"""Time every hot kernel under both backends and print a comparison table.

The numbers motivate the backend split: the jitted path wins the scalar-heavy
kernels (single-observation forward, the physics step), while BLAS-backed
numpy keeps the batch-32 dense work. `auto` therefore prefers the jitted
backend for the simulation loop but nothing in the package depends on which
one is active for correctness: the twin test suite holds them to the same
outputs.

Run:  python3 benchmarks/compare_backends.py [--end-to-end] [--repeat N]
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from psadpg.backends import ACT_LINEAR, ACT_TANH, get_backend


def bench(fn, repeat, number):
    best = min(timeit.repeat(fn, repeat=repeat, number=number))
    return best / number * 1e6  # microseconds per call


def kernel_cases(be, rng):
    x1 = rng.standard_normal((1, 6))
    x32 = rng.standard_normal((32, 6))
    w = rng.standard_normal((6, 64)) * 0.2
    b = rng.standard_normal(64) * 0.1
    y32 = be.dense_forward(x32, w, b, ACT_TANH)
    gy = rng.standard_normal(y32.shape)

    n = 10_000
    theta = rng.standard_normal(n)
    grad = rng.standard_normal(n)
    m = np.zeros(n)
    v = np.zeros(n)

    s, a = 5, 4
    vi_r = rng.standard_normal((s, a))
    raw = rng.random((s * a, s)) + 1e-3
    vi_p2 = np.ascontiguousarray(raw / raw.sum(axis=1, keepdims=True))
    vi_v = np.zeros(s)

    return [
        ("dense_forward b=1 (6->64 tanh)",
         lambda: be.dense_forward(x1, w, b, ACT_TANH)),
        ("dense_forward b=32 (6->64 tanh)",
         lambda: be.dense_forward(x32, w, b, ACT_TANH)),
        ("dense_backward b=32",
         lambda: be.dense_backward(x32, y32, w, gy, ACT_TANH, True)),
        ("adam_flat 10k params",
         lambda: be.adam_flat(theta, grad, m, v, 1, 5e-4, 0.9, 0.999, 1e-8)),
        ("acrobot_step (RK4)",
         lambda: be.acrobot_step(0.05, -0.03, 0.1, -0.2, 1.0, 0.2)),
        ("vi_sweep S=5 A=4",
         lambda: be.vi_sweep(vi_v, vi_r, vi_p2, 0.9)),
    ]


def compare_kernels(repeat):
    rows = {}
    names = []
    for backend_name in ("numpy", "numba"):
        be = get_backend(backend_name)
        be.warmup()
        for label, fn in kernel_cases(be, np.random.default_rng(7)):
            number = 2000 if "adam" not in label else 300
            us = bench(fn, repeat, number)
            rows.setdefault(label, {})[backend_name] = us
            if label not in names:
                names.append(label)
    width = max(len(n) for n in names)
    print("%-*s  %12s  %12s  %8s" % (width, "kernel", "numpy (us)", "numba (us)", "ratio"))
    for label in names:
        a = rows[label]["numpy"]
        b = rows[label]["numba"]
        print("%-*s  %12.2f  %12.2f  %7.2fx" % (width, label, a, b, a / b))
    print("\nratio > 1 means the jitted kernel is faster.")


def end_to_end(episodes):
    """Short full training runs in subprocesses so the env flag is honored."""
    print("\nend-to-end: psadpg on acrobot, %d episodes per backend" % episodes)
    for backend_name in ("numpy", "numba"):
        env = dict(os.environ, PSADPG_BACKEND=backend_name)
        cmd = [sys.executable, "-m", "psadpg.cli", "train", "--agent", "psadpg",
               "--env", "acrobot", "--episodes", str(episodes), "--seed", "0",
               "--log-every", "0"]
        t0 = time.perf_counter()
        res = subprocess.run(cmd, env=env, capture_output=True, text=True)
        dt = time.perf_counter() - t0
        status = "ok" if res.returncode == 0 else "exit %d" % res.returncode
        print("  %-6s %6.1f s (%s)" % (backend_name, dt, status))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timeit repeats; best is kept")
    ap.add_argument("--end-to-end", action="store_true",
                    help="also time short full training runs per backend")
    ap.add_argument("--episodes", type=int, default=20)
    args = ap.parse_args()
    compare_kernels(args.repeat)
    if args.end_to_end:
        end_to_end(args.episodes)


if __name__ == "__main__":
    main()
