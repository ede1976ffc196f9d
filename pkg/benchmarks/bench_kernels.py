"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Times each kernel on representative inputs, then the full legibility
optimization on the two-cup scene, under every available backend.
"""

import argparse
import contextlib
import statistics
import time

import numpy as np

from shadowcast import kernels
from shadowcast.geometry import GripperPose
from shadowcast.legibility import ObserverModel, optimize_legible
from shadowcast.trajectory import Scene

KERNELS = ("prefix_posteriors", "polyline_sqdist", "rate_clamp", "first_order_filter", "knot_legibility")


@contextlib.contextmanager
def use_backend(impl):
    saved = {name: getattr(kernels, name) for name in KERNELS}
    try:
        for name in KERNELS:
            setattr(kernels, name, getattr(impl, name))
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def workloads():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-20, 40, (101, 3))
    goals = np.array([[11.5, 0, 5], [-11.5, 0, 5.0]])
    vec = rng.normal(size=(2000, 3))
    vec[:, 2] = np.abs(vec[:, 2]) + 0.1
    vec /= np.linalg.norm(vec, axis=1)[:, None]
    shadow = rng.uniform(-10, 10, (5000, 2))
    ref = np.linspace([0, 40, 20], [11.5, 0, 5], 101)
    knot_t = np.linspace(0.0, 10.0, 11)
    sample_t = np.linspace(0.0, 10.0, 101)
    return {
        "prefix_posteriors (101 x 2)": lambda k: k.prefix_posteriors(pts, pts[0].copy(), goals, np.log([0.5, 0.5]), 1.0),
        "polyline_sqdist (101 vs 101)": lambda k: k.polyline_sqdist(pts, ref),
        "rate_clamp (2000 steps)": lambda k: k.rate_clamp(vec, np.full(1999, 0.5)),
        "first_order_filter (5000 x 2)": lambda k: k.first_order_filter(shadow, 0.3),
        "knot_legibility (10 knots, 101)": lambda k: k.knot_legibility(
            knot_t, ref[::10].copy(), sample_t, 10.0 - sample_t, ref[0].copy(), goals, np.log([0.5, 0.5]), 1.0, 0
        ),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=50)
    args = parser.parse_args()

    backends = kernels.backends()
    names = sorted(backends)
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'workload':34s}" + "".join(f"{n:>14s}" for n in names) + ("   speedup" if len(names) > 1 else ""))

    rows = {label: [best_of(lambda: job(backends[n]), args.repeat)[0] for n in names] for label, job in workloads().items()}

    scene = Scene(
        GripperPose(0.0, 40.0, 20.0),
        {"right": GripperPose(11.5, 0.0, 5.0), "left": GripperPose(-11.5, 0.0, 5.0)},
        5.0,
        10.0,
        "right",
    )
    opt = []
    for n in names:
        with use_backend(backends[n]):
            opt.append(best_of(lambda: optimize_legible(scene, "right", ObserverModel()), max(1, args.repeat // 10))[0])
    rows["optimize_legible (two cups)"] = opt

    for label, vals in rows.items():
        line = f"{label:34s}" + "".join(f"{v * 1e3:11.3f} ms" for v in vals)
        if len(vals) > 1:
            line += f"  {vals[names.index('python')] / vals[names.index('cython')]:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
