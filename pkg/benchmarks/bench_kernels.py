"""Compiled vs pure-Python kernels.

Times three workloads on each available backend:

* ``step``: raw DOPRI5 steps of the phase system,
* ``classify``: a grid of shooting classifications for (4, 4, 5),
* ``crossings``: the self-intersection scan of a closed profile polyline.

Usage::

    python benchmarks/bench_kernels.py [--points 40] [--repeat 3]
"""
import argparse
import time

import numpy as np

from isoprofile import _backend
from isoprofile.model import CmcField, make_params
from isoprofile.shooting import assemble_closed_profile, classify


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(points):
    params = make_params(4, 4, 5)
    deltas = np.linspace(0.01, params.theta_star - 0.01, points)
    prof = assemble_closed_profile(params, 0.3420189518514263, n_samples=2001)
    x = np.ascontiguousarray(prof.phase[:, 0])
    y = np.ascontiguousarray(prof.phase[:, 1])
    field = CmcField(params)
    y0 = np.array([0.1, 0.3, 0.2])
    f0 = np.asarray(field(0.0, y0), dtype=float)
    K = np.empty((7, 3))
    y_new = np.empty(3)

    def steps():
        for _ in range(20000):
            field.dopri_step(y0, f0, 0.01, 1e-10, 1e-12, K, y_new)

    def grid():
        for d in deltas:
            classify(params, float(d))

    def crossings():
        _backend.kernels.polyline_crossings(x, y, True)

    return {"step (20k)": steps, f"classify ({points})": grid, "crossings (N=2001)": crossings}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    names = _backend.available()
    results = {}
    for name in names:
        _backend.set_backend(name)
        for label, fn in workloads(args.points).items():
            results[(label, name)] = best_of(fn, args.repeat)

    labels = list(dict.fromkeys(label for label, _ in results))
    print(f"{'workload':<20}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}")
    for label in labels:
        row = [results[(label, n)] for n in names]
        speed = ""
        if len(names) == 2:
            speed = f"{results[(label, 'python')] / results[(label, 'compiled')]:>9.1f}x"
        print(f"{label:<20}" + "".join(f"{t * 1e3:>10.1f}ms" for t in row) + speed)
    if "compiled" not in names:
        print("compiled backend unavailable; build with `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
