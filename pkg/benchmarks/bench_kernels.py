"""Benchmark the direction-risk kernels: compiled extension vs NumPy fallback.

Builds a realistic workload (uncertain-variance densities, call/put payoff
basis, a batch of unit directions) and times both backends on identical
inputs. Run from the repo root after installing the package:

    python3 benchmarks/bench_kernels.py --directions 16200 --repeats 5
"""

import argparse
import math
import time

import numpy as np

from derexpo import (
    ExposureProblem,
    MarketEnv,
    Payoff,
    ReturnModel,
    VarianceBelief,
    available_backends,
    price_density_grid,
)
from derexpo.exposure import _unit_vectors, angle_grids
from derexpo.kernels import direction_risks


def build_workload(n_instruments: int, n_directions: int):
    env = MarketEnv(r=0.03, t=1.0)
    implied = ReturnModel(mu=math.exp(0.03), belief=VarianceBelief(0.04, 0.3))
    subjective = ReturnModel(mu=1.10, belief=VarianceBelief(0.04, 0.3))
    payoffs = [Payoff.put(1.0), Payoff.call(1.0), Payoff.put(0.8), Payoff.call(1.2)]
    payoffs = payoffs[:n_instruments]
    problem = ExposureProblem.from_densities(
        price_density_grid(implied), price_density_grid(subjective), payoffs, env
    )
    n_angles = n_instruments - 1
    per_angle = max(8, int(round(n_directions ** (1.0 / n_angles))))
    grids = angle_grids(n_instruments, per_angle)
    mesh = np.meshgrid(*grids, indexing="ij")
    angles = np.stack([m.ravel() for m in mesh], axis=1)
    quantities = _unit_vectors(angles)
    model = problem.loss_model
    return model.loss_basis, model.node_weights, quantities


def time_backend(backend, basis, weights, quantities, orders, repeats):
    best = math.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = direction_risks(basis, weights, quantities, orders, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--directions", type=int, default=16200, help="approximate batch size")
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats (best-of)")
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    orders = np.array([0, 1, 2], dtype=np.int64)

    for n_inst in (2, 3, 4):
        basis, weights, quantities = build_workload(n_inst, args.directions)
        n_dir = quantities.shape[0]
        print(
            f"\nN={n_inst} instruments, {n_dir} directions, "
            f"{basis.shape[1]} price nodes, orders {orders.tolist()}"
        )
        timings = {}
        results = {}
        for backend in backends:
            elapsed, res = time_backend(backend, basis, weights, quantities, orders, args.repeats)
            timings[backend] = elapsed
            results[backend] = res
            rate = n_dir / elapsed
            print(f"  {backend:>8}: {elapsed * 1e3:8.2f} ms  ({rate:,.0f} directions/s)")
        if len(backends) == 2:
            a, b = backends
            diff = float(np.max(np.abs(results[a] - results[b])))
            print(f"  speedup {timings[b] / timings[a]:.2f}x ({a} vs {b}), max |diff| = {diff:.3g}")


if __name__ == "__main__":
    main()
