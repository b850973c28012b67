"""Characterization functionals for compliant and violating symbols under refinement.

Violators (negative constant, sign-changing step) should grow with the extent;
the nonnegative Lipschitz symbol should stay put once divided by its seminorm.
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

from morreylip.functionals import ExponentConfig, char_functional_M, char_functional_sharp, lipschitz_norm
from morreylip.grid import Grid, enumerate_cubes
from morreylip.verify import make_symbol, make_weight, symbol_label

SYMBOLS = [{"kind": "lip"}, {"kind": "constant", "c": -1.0}, {"kind": "step"}]


@dataclass
class BlowupConfig:
    alpha: float = -0.5
    extents: list = field(default_factory=lambda: [16, 32, 64, 128])
    s_values: list = field(default_factory=lambda: [None, 1.0])


def run(cfg: BlowupConfig, out):
    exps = ExponentConfig.default(1)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["symbol", "s", "extent", "char_M", "char_sharp", "lip1"])
    for spec in SYMBOLS:
        for E in cfg.extents:
            g = Grid.over(1, E)
            cubes = enumerate_cubes(g)
            mu = make_weight(g, {"kind": "power", "alpha": cfg.alpha})
            b = make_symbol(g, mu, exps.beta, spec)
            lip = lipschitz_norm(b, mu, exps.beta, 1.0, cubes).value
            for s in cfg.s_values:
                m = char_functional_M(b, mu, exps, s, cubes).value
                sh = char_functional_sharp(b, mu, exps, s, cubes).value
                w.writerow([symbol_label(spec), "q" if s is None else s, E, repr(m), repr(sh), repr(lip)])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=-0.5)
    ap.add_argument("--extents", default="16,32,64,128")
    args = ap.parse_args()
    run(BlowupConfig(args.alpha, [int(e) for e in args.extents.split(",")]), sys.stdout)
