"""Time the compiled mesh kernels against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 16 64 256] [--repeat 200]
"""
import argparse
import timeit

import numpy as np

from dscstab import TimeGrid, run_dsc
from dscstab import kernels
from dscstab.models import ShuntNodeMesh, build_mesh_maps, model


def bench_kernel(mod, n, repeat, rng):
    a = rng.normal(size=(4, n, n))
    out = np.empty_like(a)
    t_scatter = min(timeit.repeat(lambda: mod.shunt_scatter(a, out), number=repeat, repeat=3)) / repeat
    t_connect = min(timeit.repeat(lambda: mod.mesh_connect(a, 0.5, out), number=repeat, repeat=3)) / repeat
    return t_scatter, t_connect


def bench_run(backend, n, steps):
    mesh = ShuntNodeMesh(n, n, 0.5)
    maps = build_mesh_maps(mesh, backend)
    e = model("shunt16_lossy", width=n, height=n).excitation(TimeGrid(1.0))
    return min(timeit.repeat(lambda: run_dsc(maps, e, 2 * steps), number=1, repeat=3))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 256])
    parser.add_argument("--repeat", type=int, default=200)
    parser.add_argument("--steps", type=int, default=500, help="full steps for the end-to-end run")
    args = parser.parse_args()

    backends = kernels.available()
    rng = np.random.default_rng(0)
    print(f"backends: {', '.join(backends)}")
    print(f"{'n':>5} {'backend':>8} {'scatter us':>11} {'connect us':>11}")
    for n in args.sizes:
        for name in backends:
            ts, tc = bench_kernel(kernels.load(name), n, args.repeat, rng)
            print(f"{n:>5} {name:>8} {ts * 1e6:>11.2f} {tc * 1e6:>11.2f}")
    print()
    print(f"end-to-end run_dsc, {args.steps} steps")
    for n in args.sizes[:2]:
        for name in backends:
            print(f"{n:>5} {name:>8} {bench_run(name, n, args.steps):>9.3f} s")


if __name__ == "__main__":
    main()
