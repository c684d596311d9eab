"""Time the compiled and pure-Python PAVA kernels on the same inputs.

    python benchmarks/bench_pava.py [--sizes 100 1000 10000] [--repeat 5]

Also times a full icv fit (n = 500 singletons) with each backend, the
workload that dominates the Monte Carlo runs.
"""

import argparse
import timeit

import numpy as np

from icvcdf import _pava_py
from icvcdf.distributions import get_setting, sample_covariates
from icvcdf.estimators import fit_icv, group_xy

try:
    from icvcdf import _pava as _compiled
except ImportError:
    _compiled = None


def _time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernels(sizes, repeat, rng):
    print(f"{'n':>8} {'python [s]':>12} {'compiled [s]':>13} {'speedup':>8}")
    for n in sizes:
        z = rng.normal(size=n).cumsum() * 0.1 + rng.normal(size=n)
        w = rng.uniform(0.5, 2.0, size=n)
        t_py = _time(lambda: _pava_py.pava(z, w, True), repeat)
        if _compiled is None:
            print(f"{n:8d} {t_py:12.6f} {'n/a':>13} {'n/a':>8}")
            continue
        t_c = _time(lambda: _compiled.pava(z, w, True), repeat)
        assert np.allclose(_pava_py.pava(z, w, True), _compiled.pava(z, w, True), atol=1e-12)
        print(f"{n:8d} {t_py:12.6f} {t_c:13.6f} {t_py / t_c:8.1f}")


def bench_fit(repeat, rng):
    from icvcdf import monotone

    st = get_setting("gamma")
    x = sample_covariates(500, rng)
    sample = group_xy(x, st.sample(x, rng))
    backends = [("python", _pava_py)] + ([("compiled", _compiled)] if _compiled else [])
    saved = monotone._kernels
    try:
        for name, kernels in backends:
            monotone._kernels = kernels
            print(f"fit_icv n=500 [{name}]: {_time(lambda: fit_icv(sample), repeat):.4f} s")
    finally:
        monotone._kernels = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 1000, 10000])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    bench_kernels(args.sizes, args.repeat, rng)
    bench_fit(max(1, args.repeat // 2), rng)


if __name__ == "__main__":
    main()
