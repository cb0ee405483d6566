"""Time every hot kernel under the numba and numpy backends.

    python3 benchmarks/bench_kernels.py [--scale 1.0] [--repeat 3]

Each case runs once untimed per backend (numba compiles or loads its cache
there), then the best of ``--repeat`` runs is reported.  Results are checked
for equality across backends so a speedup never hides a divergence.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from forge import collatz, gilbreath, goldbach
from forge.accel import backend
from forge.primes import build_table


def _cases(scale: float):
    n = lambda x: max(1000, int(x * scale))  # noqa: E731
    table = build_table(n(10**7))
    return [
        ("sieve build", lambda: build_table(n(10**8)).pi_bound),
        ("collatz verify_interval", lambda: collatz.verify_interval(2, n(10**7)).worst_excursion),
        ("collatz batch_stats", lambda: collatz.batch_stats(1, n(10**6))["excursion"].sum()),
        ("gilbreath verify_depth", lambda: gilbreath.verify_depth(table, min(table.pi_bound, n(63419))).depth_guaranteed),
        ("goldbach minimal_partitions", lambda: goldbach.minimal_partitions(4, n(10**7), table)[1].sum()),
        ("goldbach partition_counts", lambda: goldbach.partition_counts(np.arange(10**6, 10**6 + n(2000), 2), table).sum()),
    ]


def _best(fn, repeat: int) -> tuple[float, object]:
    result = fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="multiply problem sizes")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    print(f"{'kernel':32} {'numba s':>10} {'numpy s':>10} {'speedup':>8}  same")
    for name, fn in _cases(args.scale):
        with backend("numba"):
            t_nb, r_nb = _best(fn, args.repeat)
        with backend("numpy"):
            t_np, r_np = _best(fn, args.repeat)
        same = "yes" if r_nb == r_np else "NO"
        print(f"{name:32} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}x  {same}")


if __name__ == "__main__":
    main()
