"""Compare the compiled and NumPy kernel backends.

Times long walks (the growth-rate workload) and dense eigen-decompositions
(the open-chain spectrum workload). ``numpy.linalg.eig`` is listed as an
outside reference for the eigensolver.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import math
import timeit

import numpy as np

from nhqw import available_backends, use_backend
from nhqw.core import Boundary, InitialState, WalkParams, evolve
from nhqw.linalg import eig_dense
from nhqw.spectral import dense_walk_matrix


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    params = WalkParams(math.radians(45), 0.1)
    cases = [
        (f"evolve t={t}", lambda t=t: evolve(InitialState.horizontal(), params, t))
        for t in (200, 2000)
    ]
    for n in (25, 50, 100):
        M = dense_walk_matrix(WalkParams(math.radians(45), 0.1, Boundary.open(n)))
        cases.append((f"eig_dense 2N={2 * n}", lambda M=M: eig_dense(M)))
        cases.append((f"numpy.linalg.eig 2N={2 * n}", lambda M=M: np.linalg.eig(M)))

    backends = available_backends()
    print(f"{'case':28s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}")
    for name, fn in cases:
        if name.startswith("numpy"):
            t = best_of(fn, args.repeat)
            print(f"{name:28s}{t * 1e3:11.2f}ms" + " " * (12 * (len(backends) - 1) + 10))
            continue
        times = []
        for b in backends:
            with use_backend(b):
                fn()  # warm-up
                times.append(best_of(fn, args.repeat))
        speed = f"{times[-1] / times[0]:9.1f}x" if len(times) > 1 else ""
        print(f"{name:28s}" + "".join(f"{t * 1e3:11.2f}ms" for t in times) + f"{speed:>10s}")


if __name__ == "__main__":
    main()
