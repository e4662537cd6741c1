"""Compare the numba and numpy implementations of the hot kernels.

Run directly: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from chamberopt.kernels import (_matern52_cross_np, _mc_batch_improvement_np,
                                USING_NUMBA)


def _time(fn, *args, repeat=50):
    fn(*args)                      # warmup / jit compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    rng = np.random.default_rng(0)
    print(f"numba active: {USING_NUMBA}")

    cases = [(50, 5, 3), (200, 5, 6), (500, 50, 6)]
    print("\nmatern52_cross  (n x m, d)        numpy        numba      speedup")
    for n, m, d in cases:
        A, B = rng.uniform(size=(n, d)), rng.uniform(size=(m, d))
        ls = rng.uniform(0.1, 1.0, d)
        t_np = _time(_matern52_cross_np, A, B, ls, 1.0)
        if USING_NUMBA:
            from chamberopt.kernels import _matern52_cross_nb
            t_nb = _time(_matern52_cross_nb, A, B, ls, 1.0)
            print(f"  {n:4d} x {m:3d}, d={d}         {t_np*1e6:9.1f}us {t_nb*1e6:9.1f}us   {t_np/t_nb:6.2f}x")
        else:
            print(f"  {n:4d} x {m:3d}, d={d}         {t_np*1e6:9.1f}us      (numba off)")

    print("\nmc_batch_improvement (samples x q)  numpy        numba      speedup")
    for s, q in [(1024, 5), (10000, 5), (100000, 5)]:
        ks = rng.normal(1.0, 0.5, (s, q))
        vs = rng.normal(24.0, 2.0, (s, q))
        t_np = _time(_mc_batch_improvement_np, ks.copy(), vs, 0.5, 25.0, repeat=20)
        if USING_NUMBA:
            from chamberopt.kernels import _mc_batch_improvement_nb
            t_nb = _time(_mc_batch_improvement_nb, ks, vs, 0.5, 25.0, repeat=20)
            print(f"  {s:6d} x {q}            {t_np*1e6:9.1f}us {t_nb*1e6:9.1f}us   {t_np/t_nb:6.2f}x")
        else:
            print(f"  {s:6d} x {q}            {t_np*1e6:9.1f}us      (numba off)")


if __name__ == "__main__":
    main()
