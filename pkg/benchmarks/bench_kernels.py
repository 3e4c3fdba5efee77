"""Time the numba kernels against their numpy twins, then a whole fig2 sweep per backend.

    python benchmarks/bench_kernels.py [--blocks N] [--repeat R] [--no-sweep]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from nomaec import _accel
from nomaec.pairing import optimal_pairing, plan_index, plan_table


def kernel_cases(n):
    seed = np.uint64(1)
    g2 = _accel.exp_gains_numpy(seed, 0, n, np.ones(2))
    g4 = _accel.exp_gains_numpy(seed, 0, n, np.ones(4))
    idx = np.full(n, plan_index(optimal_pairing(4)), dtype=np.int64)
    table = plan_table(4)
    partners = np.array([1, 2, 0], dtype=np.int64)  # partner of rank 3 in each M=4 plan
    rates = _accel.sic_rates_numpy(g2, np.array([0.2, 0.8]), 100.0, 1.0, 1.0)[:, 1].copy()
    return {
        "uniforms": (seed, 0, n, 4, 0),
        "exp_gains": (seed, 0, n, np.ones(4)),
        "sic_rates": (g4, np.array([0.1, 0.2, 0.3, 0.4]), 100.0, 1.0, 1.0),
        "oma_rates": (g4, np.array([0.1, 0.2, 0.3, 0.4]), 100.0, 4.0, 1.0, 1.0),
        "paired_rates": (g4, idx, table, 0.2, 0.8, 100.0, True),
        "heuristic_choice": (g4, partners, 0.2, 0.8, 100.0, 2),
        "batch_lme": (rates, -5.0, 100),
    }


def bench_kernels(n, repeat):
    print(f"kernels on {n} blocks (best of {repeat}, seconds)")
    print(f"{'kernel':18s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, args in kernel_cases(n).items():
        fast = getattr(_accel, f"{name}_numba")
        slow = getattr(_accel, f"{name}_numpy")
        fast(*args)  # compile
        a, b = slow(*args), fast(*args)
        same = all(np.allclose(x, y, rtol=1e-12, atol=0) for x, y in
                   zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)))
        t_np = min(timeit.repeat(lambda: slow(*args), number=1, repeat=repeat))
        t_nb = min(timeit.repeat(lambda: fast(*args), number=1, repeat=repeat))
        flag = "" if same else "  MISMATCH"
        print(f"{name:18s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x{flag}")


def bench_sweep(blocks):
    print(f"\nfig2 sweep, {blocks} blocks, full process wall time")
    code = ("import time; from nomaec.scenarios import preset, run_scenario;"
            f"c = preset('fig2', n_blocks={blocks}); run_scenario(c.replace(n_blocks=1000));"
            "t = time.perf_counter(); run_scenario(c); print(time.perf_counter() - t)")
    for backend in ("numpy", "numba"):
        env = dict(os.environ, NOMAEC_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                             text=True, check=True).stdout
        print(f"{backend:6s} {float(out):8.2f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--blocks", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-sweep", action="store_true", help="skip the end-to-end sweep timing")
    args = ap.parse_args()
    bench_kernels(args.blocks, args.repeat)
    if not args.no_sweep:
        bench_sweep(args.blocks)


if __name__ == "__main__":
    main()
