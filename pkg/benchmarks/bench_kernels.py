"""Compare the numba and pure-numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat 5]

Both implementations are called directly, so the environment flag does not
matter here. The first numba call (compilation or cache load) is excluded.
"""

import argparse
import time

import numpy as np

from imbalance_landscape import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.HAS_NUMBA:
        print("numba unavailable or disabled: only the numpy path would run; nothing to compare")
        return

    rng = np.random.default_rng(0)
    z = rng.standard_normal(200_000) * 4
    scores = rng.standard_normal(1_000_000)
    train = rng.standard_normal((800, 50))
    votes = (rng.random(800) < 0.5).astype(np.int64)
    test = rng.standard_normal((2000, 50))

    cases = [
        ("normal_cdf (2e5)", lambda f: f(z), kernels._normal_cdf_numpy, kernels._normal_cdf_numba),
        ("count_at_or_above (1e6)", lambda f: f(scores, 0.3),
         kernels._count_at_or_above_numpy, kernels._count_at_or_above_numba),
        ("knn k=5 (800 x 2000, p=50)", lambda f: f(train, votes, test, 5),
         kernels._knn_minority_fraction_numpy, kernels._knn_minority_fraction_numba),
    ]
    print(f"{'kernel':<30}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  agree")
    for name, call, np_fn, nb_fn in cases:
        call(nb_fn)  # warm-up
        a, b = call(np_fn), call(nb_fn)
        agree = np.allclose(a, b, rtol=0, atol=1e-15)
        t_np = best_of(lambda: call(np_fn), args.repeat)
        t_nb = best_of(lambda: call(nb_fn), args.repeat)
        print(f"{name:<30}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
