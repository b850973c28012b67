"""Command-line front-end.

Exit codes: 0 success, 1 a check failed, 2 usage or validation error.
Every subcommand accepts ``--config FILE`` (JSON); explicit flags win over
file values.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
from pathlib import Path

from . import io
from .functionals import (
    ExponentConfig,
    char_functional_M,
    char_functional_sharp,
    lebesgue_norm,
    lemma22_constant,
    lip1_proof_functional,
    lipschitz_norm,
    morrey_norm,
)
from .grid import Cube, Grid, GridFunction, Policy, check_same_grid, enumerate_cubes
from .operators import (
    OPERATORS,
    commutator_M,
    commutator_sharp,
    fractional_maximal,
    hl_maximal,
    local_maximal,
    maximal_commutator,
    sharp_maximal,
)
from .verify import (
    TestSuiteConfig,
    drift,
    make_symbol,
    make_testfns,
    make_weight,
    operator_norm_lower_bound,
    reports_to_json,
    run_suite,
    suite_passes,
)
from .weights import a1_constant, ap_constant, constant_weight

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _merge_config(args, defaults: dict) -> argparse.Namespace:
    """Fill unset flags (``None``) from the JSON config file, then from ``defaults``."""
    file_cfg = {}
    if getattr(args, "config", None):
        file_cfg = json.loads(Path(args.config).read_text())
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
    for key, value in {**defaults, **file_cfg}.items():
        key = key.replace("-", "_")
        if getattr(args, key, None) is None:
            setattr(args, key, value if key in file_cfg else defaults.get(key))
    return args


def _exponents(args, dim: int) -> ExponentConfig:
    base = ExponentConfig.default(dim)
    beta = base.beta if args.beta is None else float(args.beta)
    p = base.p if args.p is None else float(args.p)
    return ExponentConfig(dim, beta, p, args.kappa, args.r)


def _weight(path, grid: Grid):
    if path is None:
        return constant_weight(grid, 1.0)
    mu = io.read_weight(path)
    check_same_grid(mu.base, GridFunction.constant(grid, 0.0))
    return mu


def _parse_cube(text: str, dim: int) -> Cube:
    """``side:low0[,low1]``."""
    try:
        side, low = text.split(":")
        cube = Cube(int(side), tuple(int(x) for x in low.split(",")))
    except ValueError as exc:
        raise UsageError(f"cube must look like 'side:low0[,low1]', got {text!r}") from exc
    if len(cube.low) != dim:
        raise UsageError(f"cube {text!r} does not have {dim} coordinates")
    return cube


# -- field -------------------------------------------------------------------------------


def cmd_field(args) -> int:
    _merge_config(args, {"family": "all", "beta": None, "r": None})
    if args.op not in OPERATORS:
        raise UsageError(f"unknown operator {args.op!r}; choose from {', '.join(OPERATORS)}")
    needs_b = args.op in ("Mb", "commutator_M", "commutator_sharp")
    if args.f is None or (needs_b and args.b is None):
        raise UsageError(f"--op {args.op} needs --f" + (" and --b" if needs_b else ""))
    f = io.read_grid_function(args.f)
    b = io.read_grid_function(args.b) if needs_b else None
    if b is not None:
        check_same_grid(b, f)
    cubes = enumerate_cubes(f.grid, Policy(args.family))
    if args.op == "M":
        out = hl_maximal(f, cubes)
    elif args.op == "local":
        if args.q0 is None:
            raise UsageError("--op local needs --q0 side:low")
        out = local_maximal(f, _parse_cube(args.q0, f.grid.dim), cubes)
    elif args.op == "sharp":
        out = sharp_maximal(f, cubes)
    elif args.op == "Mb":
        out = maximal_commutator(b, f, cubes)
    elif args.op == "commutator_M":
        out = commutator_M(b, f, cubes)
    elif args.op == "commutator_sharp":
        out = commutator_sharp(b, f, cubes)
    else:
        mu = _weight(args.weight, f.grid)
        cfg = ExponentConfig.default(f.grid.dim)
        beta = cfg.beta if args.beta is None else float(args.beta)
        r = cfg.r if args.r is None else float(args.r)
        if r < 1:
            raise UsageError(f"fractional maximal needs r >= 1, got r={r}")
        out = fractional_maximal(f, mu, beta, r, cubes)
    field = GridFunction(f.grid, out.values)
    if args.out:
        io.write_grid_function(field, args.out)
    else:
        sys.stdout.write(io.format_grid_function(field))
    if args.witness:
        io.write_json(out.witness_records(), args.witness)
    return EXIT_OK


# -- norm --------------------------------------------------------------------------------

NORMS = ("lebesgue", "morrey", "lipschitz", "lip1_proof", "lemma22", "char_M", "char_sharp")


def cmd_norm(args) -> int:
    _merge_config(args, {"family": "all"})
    if args.kind not in NORMS:
        raise UsageError(f"unknown norm {args.kind!r}; choose from {', '.join(NORMS)}")
    if args.f is None:
        raise UsageError("--f is required (the function or symbol to measure)")
    f = io.read_grid_function(args.f)
    g = f.grid
    cubes = enumerate_cubes(g, Policy(args.family))
    mu = _weight(args.weight, g)
    cfg = _exponents(args, g.dim)
    p = cfg.p if args.p is None else float(args.p)
    if args.kind == "lebesgue":
        val = lebesgue_norm(f, mu, p)
    elif args.kind == "morrey":
        u = mu if args.u is None else _weight(args.u, g)
        v = mu if args.v is None else _weight(args.v, g)
        val = morrey_norm(f, u, v, p, cfg.kappa, cubes)
    elif args.kind == "lipschitz":
        val = lipschitz_norm(f, mu, cfg.beta, math.inf if args.lip_p == "inf" else float(args.lip_p or 1), cubes)
    elif args.kind == "lip1_proof":
        val = lip1_proof_functional(f, mu, cfg.beta, cubes)
    elif args.kind == "lemma22":
        val = None
        result = {"kind": "lemma22", "value": lemma22_constant(f, mu, cfg.beta, cubes)}
    elif args.kind == "char_M":
        val = char_functional_M(f, mu, cfg, args.s, cubes)
    else:
        val = char_functional_sharp(f, mu, cfg, args.s, cubes)
    if val is not None:
        result = {"kind": args.kind, **val.to_json()}
    result["exponents"] = cfg.to_json()
    text = io.dumps(result)
    if args.out:
        io.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- apcheck -----------------------------------------------------------------------------


def cmd_apcheck(args) -> int:
    _merge_config(args, {"family": "all", "p": 2.0})
    if args.weight is not None:
        mu = io.read_weight(args.weight)
    elif args.alpha is not None:
        if args.dim is None or args.extent is None:
            raise UsageError("--alpha needs --dim and --extent")
        mu = make_weight(Grid.over(int(args.dim), int(args.extent)), {"kind": "power", "alpha": float(args.alpha)})
    else:
        raise UsageError("give --weight FILE or --alpha with --dim/--extent")
    cubes = enumerate_cubes(mu.grid, Policy(args.family))
    result = {"A_p": ap_constant(mu, float(args.p), cubes).to_json(), "A_1": a1_constant(mu, cubes).to_json()}
    text = io.dumps(result)
    if args.out:
        io.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- verify ------------------------------------------------------------------------------


def _suite_configs(args) -> list[TestSuiteConfig]:
    seed = 0 if args.seed is None else int(args.seed)
    if args.default:
        return [TestSuiteConfig.default(1, seed), TestSuiteConfig.default(2, seed)]
    if args.config is None:
        raise UsageError("verify needs --default or --config FILE")
    raw = json.loads(Path(args.config).read_text())
    suites = raw.get("suites", [raw]) if isinstance(raw, dict) else raw
    out = []
    for d in suites:
        if not isinstance(d, dict):
            raise UsageError("each suite config must be a JSON object")
        if args.seed is not None:
            d = {**d, "seed": seed}
        out.append(TestSuiteConfig.from_dict(d))
    return out


def cmd_verify(args) -> int:
    configs = _suite_configs(args)
    reports = []
    for c in configs:
        reports += run_suite(c)
    payload = reports_to_json(reports)
    text = io.dumps(payload)
    out = args.out or "verify_report.json"
    io.atomic_write(out, text)
    failed = [r for r in reports if r.status == "fail"]
    print(f"{len(reports)} checks, {len(failed)} failed; report written to {out}")
    for r in failed:
        print(f"FAIL {r.check_id}", file=sys.stderr)
    return EXIT_OK if suite_passes(reports) else EXIT_FAIL


# -- sweep -------------------------------------------------------------------------------

SWEEP_FUNCTIONALS = (
    "lipschitz_norm", "lemma22", "char_M", "char_sharp",
    "opnorm/M_b", "opnorm/commutator_M", "opnorm/commutator_sharp",
)


def _sweep_value(name: str, b, mu, cfg, cubes, seed: int) -> float:
    if name == "lipschitz_norm":
        return lipschitz_norm(b, mu, cfg.beta, 1.0, cubes).value
    if name == "lemma22":
        return lemma22_constant(b, mu, cfg.beta, cubes)
    if name == "char_M":
        return char_functional_M(b, mu, cfg, None, cubes).value
    if name == "char_sharp":
        return char_functional_sharp(b, mu, cfg, None, cubes).value
    op = name.split("/", 1)[1]
    return operator_norm_lower_bound(op, b, mu, cfg, make_testfns(b.grid, {}, seed), cubes).empirical_constant


def cmd_sweep(args) -> int:
    _merge_config(args, {"family": "all", "dim": 1, "functional": "lipschitz_norm",
                         "symbol": {"kind": "lip"}, "weight": {"kind": "power", "alpha": 0.0}})
    extents = args.extents
    if isinstance(extents, str):
        extents = [int(x) for x in extents.split(",") if x.strip()]
    if not extents or len(extents) < 2:
        raise UsageError("sweep needs at least two extents")
    if any(a >= c for a, c in zip(extents, extents[1:])):
        raise UsageError("extents must be strictly increasing")
    names = args.functional if isinstance(args.functional, list) else args.functional.split(",")
    for n in names:
        if n not in SWEEP_FUNCTIONALS:
            raise UsageError(f"unknown functional {n!r}; choose from {', '.join(SWEEP_FUNCTIONALS)}")
    symbol = json.loads(args.symbol) if isinstance(args.symbol, str) else args.symbol
    wspec = json.loads(args.weight) if isinstance(args.weight, str) else args.weight
    dim = int(args.dim)
    cfg = _exponents(args, dim)
    seed = 0 if args.seed is None else int(args.seed)
    rows = []
    for name in names:
        prev = None
        for E in extents:
            g = Grid.over(dim, int(E))
            cubes = enumerate_cubes(g, Policy(args.family))
            mu = make_weight(g, wspec)
            b = make_symbol(g, mu, cfg.beta, symbol)
            v = _sweep_value(name, b, mu, cfg, cubes, seed)
            d = "" if prev is None else repr(drift([prev, v]))
            rows.append([E, name, repr(v), d])
            prev = v
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["extent", "functional", "value", "drift"])
    w.writerows(rows)
    if args.out:
        io.atomic_write(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="morreylip", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON file with default values for the flags")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
        p.add_argument("--out", help="output path (stdout when absent)")
        p.add_argument("--family", choices=[x.value for x in Policy], default=None)

    def exps(p):
        p.add_argument("--beta", type=float)
        p.add_argument("--p", type=float)
        p.add_argument("--kappa", type=float)
        p.add_argument("--r", type=float)

    p = sub.add_parser("field", help="evaluate one operator on grid-function CSVs")
    common(p)
    p.add_argument("--op", required=True)
    p.add_argument("--f")
    p.add_argument("--b")
    p.add_argument("--weight", help="weight CSV for --op fractional (default 1)")
    p.add_argument("--q0", help="restricting cube for --op local, 'side:low0[,low1]'")
    p.add_argument("--beta", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--witness", help="write per-point witness cubes as JSON")
    p.set_defaults(run=cmd_field)

    p = sub.add_parser("norm", help="evaluate a norm or functional")
    common(p)
    exps(p)
    p.add_argument("--kind", required=True)
    p.add_argument("--f")
    p.add_argument("--weight")
    p.add_argument("--u")
    p.add_argument("--v")
    p.add_argument("--lip-p", dest="lip_p", help="exponent for --kind lipschitz (number or 'inf')")
    p.add_argument("--s", type=float, help="outer exponent of the characterization functionals")
    p.set_defaults(run=cmd_norm)

    p = sub.add_parser("apcheck", help="A_p and A_1 constants of a weight")
    common(p)
    p.add_argument("--weight")
    p.add_argument("--alpha", type=float, help="power weight |x|^alpha on [-1,1]^dim")
    p.add_argument("--dim", type=int)
    p.add_argument("--extent", type=int)
    p.add_argument("--p", type=float)
    p.set_defaults(run=cmd_apcheck)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--config")
    p.add_argument("--default", action="store_true", help="run the shipped 1D and 2D suites")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="report path (default verify_report.json)")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("sweep", help="track functionals across grid extents")
    common(p)
    exps(p)
    p.add_argument("--functional", help=f"comma list from {', '.join(SWEEP_FUNCTIONALS)}")
    p.add_argument("--extents", help="comma list, strictly increasing")
    p.add_argument("--dim", type=int)
    p.add_argument("--symbol", help='JSON symbol spec, e.g. \'{"kind": "constant", "c": -1}\'')
    p.add_argument("--weight", help='JSON weight spec, e.g. \'{"kind": "power", "alpha": -0.5}\'')
    p.set_defaults(run=cmd_sweep)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        # ConfigurationError and grid mismatches are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
