"""Time the compiled and numpy kernel backends on the hot paths.

    python benchmarks/bench_kernels.py [--repeat N] [--batch N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from jointreality import kernels, runner
from jointreality.bloch import dephase, ensemble_quartet
from jointreality.criteria import _SIGN_ARRAY
from jointreality.gpt import find_secondaries, ideal_states
from jointreality.sampler import perturb_states, preparation_states


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def workloads(batch: int):
    rng = np.random.default_rng(0)
    quartets = rng.uniform(-1, 1, size=(batch, 8))
    instances, _ = runner.generate_instances(200, seed=1)
    states = perturb_states(preparation_states(ensemble_quartet(np.pi / 3)), 0.01, rng)
    primaries = ideal_states([dephase(s, 0.014) for s in states.values()])
    return {
        f"tau_batch ({batch} quartets)": lambda: kernels.tau_batch(quartets, _SIGN_ARRAY),
        f"ell_batch ({batch} quartets)": lambda: kernels.ell_batch(quartets),
        "oracle LPs (200 instances)": lambda: runner.run_oracle(instances),
        "secondary t-scan (101 LPs)": lambda: find_secondaries(primaries),
    }


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--batch", type=int, default=200_000)
    args = parser.parse_args(argv)

    backends = kernels.available_backends()
    jobs = workloads(args.batch)
    results = {}
    for name in backends:
        previous = kernels.set_backend(name)
        try:
            results[name] = {label: best_of(fn, args.repeat) for label, fn in jobs.items()}
        finally:
            kernels.set_backend(previous)

    width = max(len(label) for label in jobs)
    header = f"{'workload':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    if len(backends) > 1:
        header += f"  {'speedup':>8}"
    print(header)
    for label in jobs:
        row = f"{label:<{width}}  " + "  ".join(f"{results[b][label] * 1e3:>8.2f}ms" for b in backends)
        if len(backends) > 1:
            row += f"  {results['python'][label] / results['cython'][label]:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
