"""Compiled kernels vs the NumPy fallback.

Times each acceptance kernel on a fixed batch of simplex proposals, then a
full sphere-IS estimate per scenario with each backend swapped in.

    python3 benchmarks/bench_backends.py [--samples 1e6] [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

import rarefall.estimators as est_mod
import rarefall.sphere_sampler as ss_mod
from rarefall import _backend
from rarefall.scenarios import ExpCorrRayleigh, IidRice, InidRayleigh, OrderedInidRayleigh, ThresholdSpec, db_to_linear

SCENARIOS = (
    InidRayleigh((10.0,) * 4),
    ExpCorrRayleigh(math.sqrt(5.0), 0.5, 4),
    IidRice(3.0, 10.0, 4),
    OrderedInidRayleigh(tuple(float(w) for w in db_to_linear([5, 5, 8, 8])), 2),
)


def kernel_cases(n, L=4):
    rng = np.random.default_rng(0)
    u = rng.dirichlet(np.ones(L), size=n)
    w = rng.uniform(0, 5, size=L)
    wr = rng.uniform(0, 5, size=(n, L))
    return {
        "log_accept_linear": (u, w),
        "log_accept_rows": (u, wr),
        "log_accept_corr": (u, w, 3.0),
        "log_accept_rice": (u, 2.0, 4.0),
        "ordered_gains": (u, np.arange(1.0, L + 1)),
        "count_sqrt_sum_le": (u, L, 1.0),
    }


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def use(backend):
    ss_mod.kernels = backend
    est_mod.kernels = backend


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=lambda s: int(float(s)), default=10**6)
    ap.add_argument("--kernel-rows", type=lambda s: int(float(s)), default=10**5)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    fallback = _backend.load("python")
    try:
        compiled = _backend.load("cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run pip install -e . --no-build-isolation")

    print("kernel,rows,cython_s,python_s,speedup")
    for name, case in kernel_cases(args.kernel_rows).items():
        tc = best_of(lambda: getattr(compiled, name)(*case), args.repeat)
        tp = best_of(lambda: getattr(fallback, name)(*case), args.repeat)
        print(f"{name},{args.kernel_rows},{tc:.4g},{tp:.4g},{tp / tc:.2f}")

    print()
    print("scenario,M,gamma_th_db,cython_s,python_s,speedup,p_hat_cython,p_hat_python")
    spec = ThresholdSpec(-9.0, 1.0)
    original = ss_mod.kernels
    try:
        for sc in SCENARIOS:
            times, p = {}, {}
            for label, backend in (("cython", compiled), ("python", fallback)):
                use(backend)
                times[label] = best_of(lambda: est_mod.estimate_sphere_is(sc, spec, args.samples, 1),
                                       max(1, args.repeat // 2))
                p[label] = est_mod.estimate_sphere_is(sc, spec, args.samples, 1).p_hat
            print(f"{sc.name},{args.samples},{spec.gamma_th_db:g},{times['cython']:.4g},{times['python']:.4g},"
                  f"{times['python'] / times['cython']:.2f},{p['cython']!r},{p['python']!r}")
    finally:
        use(original)


if __name__ == "__main__":
    main()
