"""Compiled kernels vs the numpy fallback, and both engines on each backend.

    python benchmarks/bench_kernels.py --out bench.csv

Writes one CSV row per (case, backend) with the best-of-N wall time.
"""

import argparse
import csv
import sys
import timeit
from array import array

import numpy as np

from fastibl import kernels
from fastibl.harness import ExperimentConfig, run_experiment


def kernel_cases(k, n):
    rng = np.random.default_rng(0)
    stamps = np.sort(rng.choice(4 * n, n, replace=False)).astype(np.int64)
    arrays = [stamps[: n // 2].copy(), stamps[n // 2:].copy()]
    counts = [len(a) for a in arrays]
    outcomes = np.array([3.0, 4.0])
    t = 4 * n + 1
    table = k.decay_table(t + 1, 0.5)
    h0 = array("Q", rng.integers(0, 2, n).tolist())
    h1 = array("Q", [1] * n)
    act = array("q", rng.integers(0, 2, n).tolist())
    out = array("d", rng.choice([0.0, 3.0, 4.0], n).tolist())
    ts = array("q", stamps.tolist())
    return {
        f"blend_option n={n}": lambda: k.blend_option(arrays, counts, outcomes, t, table,
                                                      0.25, 0.3536, 11),
        f"noise_logits n={n}": lambda: k.noise_logits(11, n),
        f"baseline_query n={n}": lambda: k.baseline_query(h0, h1, act, out, ts, n, 1, 1, 1, t,
                                                          0.5, 0.25, 0.3536, 11),
    }


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="bench_kernels.csv")
    p.add_argument("--sizes", type=int, nargs="+", default=[100, 1000, 10000])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--trials", type=int, default=2000, help="binary-choice trials per engine run")
    args = p.parse_args(argv)

    backends = {"python": kernels.python}
    if kernels.compiled is not None:
        backends["compiled"] = kernels.compiled
    else:
        print("compiled kernels not built; timing the fallback only", file=sys.stderr)

    rows = []
    for n in args.sizes:
        for name, k in backends.items():
            for case, fn in kernel_cases(k, n).items():
                number = 20 if (name == "python" and "baseline" in case) else 200
                rows.append((case, name, best_of(fn, args.repeat, number)))
    for engine in ("baseline", "speedy"):
        for name in backends:
            config = ExperimentConfig(task="binary", engine=engine, episodes=args.trials,
                                      backend=name)
            secs = run_experiment(config).total_seconds
            rows.append((f"binary {args.trials} trials, {engine}", name, secs))

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case", "backend", "seconds"])
        w.writerows(rows)
    width = max(len(r[0]) for r in rows)
    for case, name, secs in rows:
        print(f"{case:<{width}}  {name:<8}  {secs * 1e6:12.1f} us")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
