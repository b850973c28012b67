"""Wall time of the fast maximal operators against grid size (1D, DYADIC and ALL families)."""

import argparse
import csv
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from morreylip.grid import Grid, GridFunction, enumerate_cubes
from morreylip.operators import hl_maximal, sharp_maximal


@dataclass
class TimingConfig:
    log2_sizes: list = field(default_factory=lambda: [6, 8, 10, 12, 14, 16, 18, 20])
    all_family_max_log2: int = 8  # ALL-family cost grows at least quadratically
    repeats: int = 3
    seed: int = 0


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(cfg: TimingConfig, out):
    rng = np.random.default_rng(cfg.seed)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["log2_n", "family", "operator", "seconds"])
    for k in cfg.log2_sizes:
        g = Grid(1, 2**k, spacing=2.0 / 2**k, origin=-1.0)
        f = GridFunction(g, rng.standard_normal(g.shape))
        for pol in ("dyadic", "all"):
            if pol == "all" and k > cfg.all_family_max_log2:
                continue
            cubes = enumerate_cubes(g, pol)
            for name, op in (("M", hl_maximal), ("sharp", sharp_maximal)):
                w.writerow([k, pol, name, f"{best_of(lambda: op(f, cubes), cfg.repeats):.4f}"])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-log2", type=int, default=20)
    args = ap.parse_args()
    run(TimingConfig([k for k in TimingConfig().log2_sizes if k <= args.max_log2]), sys.stdout)
