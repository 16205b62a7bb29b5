"""Compare the compiled and pure-Python pump-matrix backends.

Run with ``python3 benchmarks/bench_kernels.py``; add ``--quick`` for a
short run. Both backends are checked for agreement before timing.
"""

import argparse
import timeit

import numpy as np

from mqpgsim import kernels
from mqpgsim.config import experiment_config, preset
from mqpgsim.experiment import Experiment


def case(n_out, n_in, n_mu=8192, seed=0):
    r = np.random.default_rng(seed)
    alpha = r.normal(size=n_mu) + 1j * r.normal(size=n_mu)
    nu_in = np.linspace(-1.5, 1.5, n_in)
    nu_out = np.linspace(0.0, 3.0, n_out)
    return alpha, -3.0, 6.0 / (n_mu - 1), nu_out, nu_in


def time_backend(backend, args, repeat):
    return min(timeit.repeat(lambda: kernels.pump_matrix(*args, backend=backend),
                             number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if kernels.BACKEND != "cython":
        print("compiled backend not built; only the numpy fallback is available")
        return 1
    sizes = [(256, 128), (1024, 512)] if args.quick else [(256, 128), (1024, 512), (2048, 1024)]
    print(f"{'n_out x n_in':>14} {'cython [ms]':>12} {'python [ms]':>12} {'speedup':>8}")
    for n_out, n_in in sizes:
        a = case(n_out, n_in)
        p_cy = kernels.pump_matrix(*a, backend="cython")
        p_py = kernels.pump_matrix(*a, backend="python")
        assert np.allclose(p_cy, p_py, atol=1e-13)
        t_cy = time_backend("cython", a, args.repeat)
        t_py = time_backend("python", a, args.repeat)
        print(f"{n_out:>6} x {n_in:<6} {1e3 * t_cy:12.2f} {1e3 * t_py:12.2f} {t_py / t_cy:8.1f}")

    # end to end: one full tomography of the d=5 FFB preset
    cfg = experiment_config(preset("table1-d5-ffb"))
    for backend in ("cython", "python"):
        t = min(timeit.repeat(lambda: Experiment(cfg, backend=backend).full_tomography(),
                              number=1, repeat=1 if args.quick else 2))
        print(f"table1-d5-ffb tomography, {backend:>6}: {t:.2f} s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
