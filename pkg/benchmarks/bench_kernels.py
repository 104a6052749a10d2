"""Time the compiled kernels against the numpy fallback on identical inputs.

    python benchmarks/bench_kernels.py [--scale 0.2] [--repeat 3]

Prints one line per kernel with both timings, the speedup and the largest
relative difference between the two results.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from gwtails import kernels
from gwtails.mc import _table, SimulationConfig
from gwtails.pgf import _polyder
from gwtails.presets import get_preset


def _best(f, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t = time.perf_counter()
        out = f()
        best = min(best, time.perf_counter() - t)
    return best, out


def _rel(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def cases(scale):
    model = get_preset("example1").model()
    rng = np.random.default_rng(1)
    n = max(1000, int(1_000_000 * scale))
    z = 1j * rng.uniform(0, 2e4, n)
    num, den = model.g1_num, model.g1_den
    dnum, dden = _polyder(num), _polyder(den)
    skip = abs(num[0] / den[0]) + 1.0

    def cascade(k, deriv):
        return lambda: k.pi_cascade(z, num, den, dnum, dden, model.E, 150, deriv, skip)[:2]

    zp = np.ascontiguousarray(0.3 * (rng.standard_normal(n // 4) + 1j * rng.standard_normal(n // 4)))
    zj = np.ascontiguousarray(1 + 0.02 * (rng.standard_normal(n // 10) + 1j * rng.standard_normal(n // 10)))
    vals = np.ascontiguousarray(np.exp(-1j * np.linspace(0, 50, n)) / (1 + np.linspace(0, 50, n)))
    x = np.linspace(0.1, 3.0, 30)
    tab = _table(model, SimulationConfig())
    sigma = math.sqrt(model.variance)
    paths = max(1000, int(200_000 * scale))
    return [
        ("pi_cascade", cascade, (False,)),
        ("pi_cascade+deriv", cascade, (True,)),
        ("phi_iterate", lambda k: lambda: k.phi_iterate(zp, model.g0_num, model.g0_den, model.r,
                                                        600, 1e-15, 1e6)[0], ()),
        ("julia_status", lambda k: lambda: k.julia_status(zj, model.p_coeffs, model.q_coeffs,
                                                          500, 1e-3, 1e8)[0], ()),
        ("fourier_sum", lambda k: lambda: k.fourier_sum(vals, 0.02, x), ()),
        ("gw_simulate", lambda k: lambda: k.gw_simulate(0, paths, 7, tab.prob, tab.alias, model.E,
                                                        sigma, 25, 256, 1e8)[0], ()),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=0.2, help="problem size relative to the full size")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if "c" not in kernels.available_backends():
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    c, py = kernels.get_backend("c"), kernels.get_backend("python")
    print(f"{'kernel':<18}{'c [s]':>10}{'python [s]':>12}{'speedup':>9}{'max rel diff':>14}")
    for name, make, extra in cases(args.scale):
        tc, rc = _best(make(c, *extra), args.repeat)
        tp, rp = _best(make(py, *extra), args.repeat)
        if isinstance(rc, tuple):
            diff = max(_rel(a, b) for a, b in zip(rc, rp) if a is not None)
        else:
            diff = _rel(rc, rp)
        print(f"{name:<18}{tc:>10.3f}{tp:>12.3f}{tp / tc:>9.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
