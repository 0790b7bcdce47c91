"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3]

Each workload runs single-threaded on both backends; the script prints the
best wall time of each and the speedup, and checks that the outputs agree.
"""

import argparse
import time

import numpy as np

from echo_lab import kernels
from echo_lab.kicked_rotor import KickOrder
from echo_lab.oscillator import DriveSpec, OscillatorParams, PDensitySpec
from echo_lab.oscillator.model import run_orbits
from echo_lab.standard_map import ensemble_stats, lyapunov, make_ensemble
from echo_lab.torus import REFERENCE_REGION


def best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads():
    ens = make_ensemble(REFERENCE_REGION, 200_000, 0)
    a0 = PDensitySpec(n_samples=20_000).sample()
    kicked = OscillatorParams()
    smooth = OscillatorParams(drive=DriveSpec(modes=((1, 0.5, 0.1),), kick=0.3), dt=1e-2)
    close = lambda a, b: np.allclose(a, b, rtol=1e-9, atol=1e-11)
    # (workload, comparison of compiled vs python output)
    return {
        "std_map_stats (2e5 points, 20 steps)":
            (lambda b: ensemble_stats(ens, 10.0, 2.0, 20, threads=1, backend=b).correlation, close),
        "lyapunov_tangent (16 points, 1e5 steps)":
            (lambda b: lyapunov(10.0, order=KickOrder.KICK_THEN_DRIFT, backend=b).per_point,
             lambda a, b: abs(a.mean() - b.mean()) < 0.02),
        "osc_orbits kicked (2e4 orbits, 40 periods)":
            (lambda b: run_orbits(a0, kicked, 40, 1, threads=1, backend=b)[1],
             lambda a, b: close(a[:, :6], b[:, :6])),
        "osc_orbits RK4 (2e3 orbits, 5 periods)":
            (lambda b: run_orbits(a0[:2000], smooth, 5, 1, threads=1, backend=b)[1], close),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        kernels.get_backend("compiled")
    except ImportError:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1
    print(f"{'workload':45s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}  agree")
    for name, (fn, same) in workloads().items():
        tc, oc = best_time(lambda: fn("compiled"), args.repeat)
        tp, op = best_time(lambda: fn("python"), args.repeat)
        agree = bool(same(oc, op))
        print(f"{name:45s} {tc:9.3f}s {tp:9.3f}s {tp / tc:7.1f}x  {agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
