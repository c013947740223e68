"""Compare the compiled and numpy kernels on the time-stepping loop.

    python3 benchmarks/bench_kernels.py [--npts 2048] [--steps 1000]
"""

import argparse
import time

import numpy as np

from nlkg import _kernels_py
from nlkg.core import RadialGrid

try:
    from nlkg import _ckernels
except ImportError:
    _ckernels = None


def initial(grid):
    r = grid.r
    u1 = (2.0 * np.exp(-r**2 / 2)).astype(complex)
    u2 = (1.0 * np.exp(-r**2)).astype(complex)
    v1 = 0.5j * u1
    v2 = 1.0j * u2
    for a in (u1, u2, v1, v2):
        a[-1] = 0
    return u1, u2, v1, v2


def run(mod, grid, steps, dt=0.01):
    u1, u2, v1, v2 = initial(grid)
    a1 = np.empty_like(u1)
    a2 = np.empty_like(u1)
    c = grid.stencil
    mod.accelerations(c, u1, u2, 1.0, 4.0, 1.0, a1, a2)
    t0 = time.perf_counter()
    mod.verlet_steps(u1, u2, v1, v2, a1, a2, c, dt, 1.0, 4.0, 1.0, steps)
    return time.perf_counter() - t0, u1


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--npts", type=int, default=2048)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    grid = RadialGrid(2, 60.0, args.npts)

    t_py = min(run(_kernels_py, grid, args.steps)[0] for _ in range(args.repeat))
    print(f"numpy   : {t_py * 1e6 / args.steps:9.2f} us/step")
    if _ckernels is None:
        print("cython  : extension not built")
        return
    t_c = min(run(_ckernels, grid, args.steps)[0] for _ in range(args.repeat))
    print(f"cython  : {t_c * 1e6 / args.steps:9.2f} us/step")
    print(f"speedup : {t_py / t_c:9.2f}x")
    _, a = run(_kernels_py, grid, args.steps)
    _, b = run(_ckernels, grid, args.steps)
    print(f"max |difference| after {args.steps} steps: {np.abs(a - b).max():.3e}")


if __name__ == "__main__":
    main()
