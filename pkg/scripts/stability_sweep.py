"""Empirical constants of the Lipschitz symbol across grid refinements.

Writes one CSV row per (weight, constant, extent) with the drift from the
previous extent.  Plot-ready; no plotting here.
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

from morreylip.functionals import ExponentConfig
from morreylip.grid import Grid, enumerate_cubes
from morreylip.verify import drift, make_symbol, make_testfns, make_weight, stability_constants


@dataclass
class SweepConfig:
    dim: int = 1
    alphas: list = field(default_factory=lambda: [0.0, -0.25, -0.5])
    extents: list = field(default_factory=lambda: [16, 32, 64])
    policy: str = "all"
    seed: int = 0


def run(cfg: SweepConfig, out):
    exps = ExponentConfig.default(cfg.dim)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["alpha", "constant", "extent", "value", "drift"])
    for alpha in cfg.alphas:
        series = {}
        for E in cfg.extents:
            g = Grid.over(cfg.dim, E)
            mu = make_weight(g, {"kind": "power", "alpha": alpha})
            b = make_symbol(g, mu, exps.beta, {"kind": "lip"})
            consts = stability_constants(b, mu, exps, enumerate_cubes(g, cfg.policy), make_testfns(g, {}, cfg.seed))
            for k, (v, _) in consts.items():
                series.setdefault(k, []).append(v)
        for k, vals in sorted(series.items()):
            for i, (E, v) in enumerate(zip(cfg.extents, vals)):
                w.writerow([alpha, k, E, repr(v), "" if i == 0 else repr(drift(vals[i - 1:i + 1]))])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--extents", default="16,32,64")
    ap.add_argument("--alphas", default="0,-0.25,-0.5")
    args = ap.parse_args()
    run(SweepConfig(args.dim, [float(a) for a in args.alphas.split(",")],
                    [int(e) for e in args.extents.split(",")]), sys.stdout)
