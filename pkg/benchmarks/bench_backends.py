"""Compare the compiled and numpy kernels on single steps and whole sequences.

Usage: python benchmarks/bench_backends.py [--sizes 200 1000] [--fan-in 20] [--steps 2000]
"""

import argparse
import time

import numpy as np

from spikelsm import FeatureMode, ReservoirState, default_config, generate_reservoir, run_sequence
from spikelsm import _backend
from spikelsm.reservoir import dense_reference_step, densify, reservoir_step


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def step_loop(res, xs, kernels):
    state = ReservoirState.zeros(res.n_neurons)
    for x in xs:
        state = reservoir_step(res, state, x, kernels=kernels)


def dense_loop(res, xs, dense):
    state = ReservoirState.zeros(res.n_neurons)
    for x in xs:
        state = dense_reference_step(res, state, x, dense)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[200, 1000])
    parser.add_argument("--fan-in", type=int, default=20)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)

    backends = _backend.available()
    if "cython" not in backends:
        print("note: compiled kernels not built; numpy backend only")
    mode = FeatureMode("both", 0.5)
    print(f"{'N':>6} {'K':>4} {'path':<16} {'steps/s':>12}")
    for n in args.sizes:
        res = generate_reservoir(default_config(0).replace(n_neurons=n, fan_in=min(args.fan_in, n - 1)))
        xs = np.random.default_rng(0).uniform(0.0, 1.0, size=(args.steps, 1))
        rows = []
        for name in backends:
            kern = _backend.get(name)
            zero = ReservoirState.zeros(n)
            # Warm the plan cache so setup cost stays out of the timing.
            run_sequence(res, zero, xs[:2], mode, kernels=kern)
            t = best_of(lambda: run_sequence(res, zero, xs, mode, kernels=kern), args.repeats)
            rows.append((f"{name} run", args.steps / t))
            t = best_of(lambda: step_loop(res, xs, kern), args.repeats)
            rows.append((f"{name} step", args.steps / t))
        dense = densify(res)
        short = xs[: max(1, args.steps // 10)]
        t = best_of(lambda: dense_loop(res, short, dense), args.repeats)
        rows.append(("dense step", short.shape[0] / t))
        for label, sps in rows:
            print(f"{n:>6} {res.config.fan_in:>4} {label:<16} {sps:>12.0f}")


if __name__ == "__main__":
    main()
