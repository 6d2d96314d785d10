"""Time the compiled traversal kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--n 20000] [--d 3] [--radius 2] [--repeat 3]
"""
import argparse
import time

import numpy as np

from graphldp import _pykernels
from graphldp.ensembles import sample_er
from graphldp.rng import make_rng

try:
    from graphldp import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--d", type=float, default=3.0)
    ap.add_argument("--radius", type=int, default=2)
    ap.add_argument("--cap", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    g = sample_er(args.n, args.d, make_rng(1))
    indptr, indices = g.csr()
    print(f"graph: n={g.n} edges={g.num_edges} radius={args.radius} cap={args.cap}")
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    results = {}
    for name, mod in backends:
        t_sizes, sizes = best_of(lambda: mod.ball_sizes(indptr, indices, args.radius, args.cap), args.repeat)
        t_balls, _ = best_of(lambda: [mod.bfs_ball(indptr, indices, v, args.radius) for v in range(0, g.n, 10)],
                             args.repeat)
        results[name] = (t_sizes, t_balls, np.asarray(sizes))
        print(f"{name:>7}: ball_sizes {t_sizes * 1e3:9.2f} ms   bfs_ball x{len(range(0, g.n, 10))} {t_balls * 1e3:9.2f} ms")
    if "cython" in results:
        py, cy = results["python"], results["cython"]
        assert np.array_equal(py[2], cy[2]), "backends disagree"
        print(f"speedup: ball_sizes {py[0] / cy[0]:.1f}x   bfs_ball {py[1] / cy[1]:.1f}x")
    else:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
