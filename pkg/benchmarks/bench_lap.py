"""Compiled vs pure-Python LAP backend timings.

    python benchmarks/bench_lap.py --sizes 10,50,100,200 --repeats 5 --out bench.csv

Each size runs both backends on the same HMA-shaped weight matrices
(LAP weights of a real fitness tensor) and on uniform random matrices,
checks that both return the same assignment, and reports the median time.
"""
from __future__ import annotations

import argparse
import csv
import statistics
import sys
import time

import numpy as np

from hmasim import assignment
from hmasim.assignment import solve_lap_jv
from hmasim.channel import compute_channel_state, generate_deployment
from hmasim.config import ScenarioConfig
from hmasim.engine import build_fitness_tensor, lap_weights, reduce_topologies


def hma_weights(m: int, seed: int) -> np.ndarray:
    cfg = ScenarioConfig().with_ues(m)
    chan = compute_channel_state(generate_deployment(cfg, seed=seed), cfg)
    best, _ = reduce_topologies(build_fitness_tensor(chan, cfg))
    return lap_weights(best)


def random_weights(m: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).random((m, m))


def time_backend(w: np.ndarray, backend: str, repeats: int):
    times, res = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = solve_lap_jv(w, "maximize", backend=backend)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), res


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="10,50,100,200,400")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="optional CSV output path")
    args = p.parse_args(argv)

    if assignment.BACKEND != "cython":
        print("compiled backend not available; build with `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1

    rows = []
    for m in (int(x) for x in args.sizes.split(",")):
        for kind, make in (("hma", hma_weights), ("uniform", random_weights)):
            w = make(m, args.seed)
            t_c, r_c = time_backend(w, "cython", args.repeats)
            t_p, r_p = time_backend(w, "python", max(1, args.repeats // 2))
            if r_c.row_to_col != r_p.row_to_col:
                print(f"backends disagree at M={m} ({kind})", file=sys.stderr)
                return 1
            rows.append(dict(size=m, matrix=kind, cython_s=t_c, python_s=t_p, speedup=t_p / t_c))

    print(f"{'size':>6} {'matrix':>8} {'cython [ms]':>12} {'python [ms]':>12} {'speedup':>8}")
    for r in rows:
        print(f"{r['size']:>6} {r['matrix']:>8} {1e3 * r['cython_s']:>12.3f} {1e3 * r['python_s']:>12.3f} {r['speedup']:>8.1f}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
