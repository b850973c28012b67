"""Theorem-level checks: identities, pointwise dominations, norm ratios, blow-up.

Each check produces a :class:`VerifyReport`.  Zero-tolerance checks compare
floats with ``<=`` / ``==`` directly; empirical-constant checks record the
constant at every extent of a sweep over one fixed physical box and the
largest relative change between consecutive extents (the drift).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .functionals import (
    ExponentConfig,
    char_functional_M,
    char_functional_sharp,
    lemma22_constant,
    lip1_proof_functional,
    lipschitz_norm,
    local_maximal_fields,
    morrey_norm,
    sharp_indicator_fields,
)
from ._adjudicate import CommutatorAdjudicator, holder_chain_holds, indicator_norm_holds
from .grid import (
    Cube,
    CubeFamily,
    Grid,
    GridFunction,
    Policy,
    check_same_grid,
    cube_axes,
    enumerate_cubes,
    indicator,
    window_means,
    windows,
)
from .operators import (
    commutator_M,
    commutator_sharp,
    fractional_maximal,
    hl_maximal,
    local_maximal,
    maximal_commutator,
    sharp_maximal,
)
from .weights import Weight, constant_weight, measures, power_weight


class ConfigurationError(ValueError):
    """A check was asked to run outside its preconditions."""


PASS, FAIL, FLAGGED = "pass", "fail", "flagged"


@dataclass
class VerifyReport:
    check_id: str
    status: str
    empirical_constant: float | None = None
    worst_witness: dict | None = None
    resolution_drift: float | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == FAIL and self.worst_witness is None:
            self.worst_witness = {}

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def to_json(self) -> dict:
        return asdict(self)


# -- families of weights, symbols and test functions ---------------------------


def make_weight(grid: Grid, spec: dict) -> Weight:
    kind = spec["kind"]
    if kind == "power":
        return power_weight(grid, float(spec["alpha"]))
    if kind == "constant":
        return constant_weight(grid, float(spec.get("c", 1.0)))
    raise ConfigurationError(f"unknown weight kind {kind!r}")


def weight_label(spec: dict) -> str:
    if spec["kind"] == "power":
        return f"power({spec['alpha']:g})"
    return f"constant({spec.get('c', 1.0):g})"


def build_lip_symbol(mu: Weight, beta: float, grid: Grid | None = None) -> GridFunction:
    """Nonnegative member of the weighted Lipschitz class built from ``mu``.

    ``b(x) = mu(R_x)**(beta/n)`` with ``R_x`` the coordinate box from the low
    corner of the domain to the center of ``x`` (half of the own cell counted
    along each axis).
    """
    g = mu.grid if grid is None else grid
    check_same_grid(mu.base, GridFunction.constant(g, 0.0))
    acc = mu.values
    for ax in range(g.dim):
        acc = np.cumsum(acc, axis=ax) - 0.5 * acc
    return GridFunction(g, np.maximum(acc * g.cell_volume, 0.0) ** (beta / g.dim))


def make_symbol(grid: Grid, mu: Weight, beta: float, spec: dict) -> GridFunction:
    kind = spec["kind"]
    x = grid.centers()
    if kind == "lip":
        return build_lip_symbol(mu, beta)
    if kind == "constant":
        return GridFunction.constant(grid, float(spec["c"]))
    if kind == "ramp":
        return GridFunction(grid, 1.0 + x[..., 0])
    if kind == "bump":
        return GridFunction(grid, np.linalg.norm(x, axis=-1) ** beta)
    if kind == "step":
        lo, hi = float(spec.get("low", -1.0)), float(spec.get("high", 1.0))
        return GridFunction(grid, np.where(x[..., 0] < 0, lo, hi))
    raise ConfigurationError(f"unknown symbol kind {kind!r}")


def symbol_label(spec: dict) -> str:
    extra = ",".join(f"{k}={spec[k]:g}" for k in sorted(spec) if k not in ("kind", "role"))
    return f"{spec['kind']}({extra})" if extra else spec["kind"]


def make_testfns(grid: Grid, spec: dict, seed: int) -> list[tuple[str, GridFunction]]:
    """Test functions defined on the physical box ``[-1, 1]^dim``.

    Indicators of fixed physical cubes, random signs on a fixed coarse block
    partition, and tent bumps.  None depend on resolution beyond sampling.
    """
    x = grid.centers()
    out = []
    for lo, hi in spec.get("indicators", [(-1, 1), (-0.5, 0.5), (0, 0.5), (-0.25, 0), (0.5, 1)]):
        m = np.all((x >= lo) & (x < hi), axis=-1)
        if m.any():
            out.append((f"chi[{lo:g},{hi:g})", GridFunction(grid, m.astype(float))))
    blocks = int(spec.get("blocks", 8))
    rng = np.random.default_rng(seed)
    idx = np.clip(((x + 1.0) / 2.0 * blocks).astype(int), 0, blocks - 1)
    for t in range(int(spec.get("random_fields", 3))):
        signs = rng.choice([-1.0, 1.0], size=(blocks,) * grid.dim)
        out.append((f"signs#{t}", GridFunction(grid, signs[tuple(idx[..., j] for j in range(grid.dim))])))
    for c in spec.get("bumps", [-0.5, 0.1, 0.6]):
        r = np.linalg.norm(x - c, axis=-1)
        out.append((f"bump@{c:g}", GridFunction(grid, np.maximum(0.0, 1.0 - 4.0 * r))))
    return out


def random_field(grid: Grid, rng: np.random.Generator, nonneg: bool = False) -> GridFunction:
    v = rng.random(grid.shape) if nonneg else rng.standard_normal(grid.shape)
    return GridFunction(grid, v)


def margin_cubes(grid: Grid, n: int, rng: np.random.Generator) -> list[Cube]:
    """Random cubes of even side with at least ``side/2`` cells of margin on every side."""
    E = grid.extent
    sides = [m for m in range(2, E // 2 + 1, 2) if E - 2 * m >= 0]
    if not sides:
        raise ConfigurationError(f"extent {E} leaves no room for a margin-compliant cube")
    out = []
    for _ in range(n):
        m = int(rng.choice(sides))
        low = tuple(int(rng.integers(m // 2, E - m - m // 2 + 1)) for _ in range(grid.dim))
        out.append(Cube(m, low))
    return out


def _check_margin(grid: Grid, q: Cube):
    if q.side % 2 or any(a < q.side // 2 or a + q.side + q.side // 2 > grid.extent for a in q.low):
        raise ConfigurationError(f"{q} needs even side and side/2 cells of margin")


# -- report helpers -------------------------------------------------------------------


def _point_witness(idx, **extra) -> dict:
    return {"point": [int(i) for i in idx], **extra}


def _exact_le(check_id: str, lhs: np.ndarray, rhs: np.ndarray, adjudicate=None, detail=None) -> VerifyReport:
    """Pass iff ``lhs <= rhs`` at every cell; constant = max lhs/rhs where rhs > 0.

    Cells rejected by the float comparison are passed to ``adjudicate(idx)``,
    which returns the exact verdict for that cell.
    """
    pos = rhs > 0
    const = float(np.max(lhs[pos] / rhs[pos])) if pos.any() else 0.0
    rejected = [tuple(int(i) for i in k) for k in np.argwhere(lhs > rhs)]
    bad = [k for k in rejected if adjudicate is None or not adjudicate(k)]
    detail = {**(detail or {}), "float_rejected": len(rejected), "exact_failures": len(bad)}
    if not bad:
        return VerifyReport(check_id, PASS, const, None, None, detail)
    k = max(bad, key=lambda k: lhs[k] - rhs[k])
    wit = _point_witness(k, lhs=float(lhs[k]), rhs=float(rhs[k]))
    return VerifyReport(check_id, FAIL, const, wit, None, detail)


def _merge(check_id: str, reports: list[VerifyReport]) -> VerifyReport:
    bad = [r for r in reports if r.status == FAIL]
    consts = [r.empirical_constant for r in reports if r.empirical_constant is not None]
    head = bad[0] if bad else None
    return VerifyReport(
        check_id,
        FAIL if bad else PASS,
        max(consts) if consts else None,
        None if head is None else {"case": head.check_id, **(head.worst_witness or {})},
        None,
        {"cases": len(reports), "failed": len(bad)},
    )


# -- operations -----------------------------------------------------------------------

OPS = {
    "M_b": maximal_commutator,
    "commutator_M": commutator_M,
    "commutator_sharp": commutator_sharp,
}


def operator_norm_lower_bound(
    op_id: str,
    b: GridFunction,
    mu: Weight,
    cfg: ExponentConfig,
    testfns,
    cubes: CubeFamily,
    lip: float | None = None,
) -> VerifyReport:
    """Largest ``||op(b,f)||_{L^{q,kq/p}(mu^{1-q},mu)} / ||f||_{L^{p,k}(mu)}`` over ``testfns``.

    ``empirical_constant`` is that ratio divided by ``||b||_Lip`` (or the raw
    ratio when the seminorm vanishes).
    """
    if op_id not in OPS:
        raise ConfigurationError(f"unknown operator {op_id!r}")
    op = OPS[op_id]
    g = check_same_grid(b, mu.base)
    u = Weight(mu.power(1.0 - cfg.q))
    lip = lipschitz_norm(b, mu, cfg.beta, 1.0, cubes).value if lip is None else lip
    best, best_name, best_cube = 0.0, None, None
    for name, f in _named(testfns):
        den = morrey_norm(f, mu, mu, cfg.p, cfg.kappa, cubes).value
        if den == 0.0:
            continue
        num = morrey_norm(GridFunction(g, op(b, f, cubes).values), u, mu, cfg.q, cfg.target_kappa, cubes)
        ratio = num.value / den
        if ratio > best or best_name is None:
            best, best_name, best_cube = ratio, name, num.witness
    const = best / lip if lip > 0 else best
    wit = {"testfn": best_name, **(best_cube.to_json() if best_cube else {})}
    return VerifyReport(f"opnorm/{op_id}", PASS, const, wit, None, {"ratio": best, "lip": lip})


def _named(testfns):
    for i, f in enumerate(testfns):
        yield (f if isinstance(f, tuple) else (f"f{i}", f))


def converse_chain_check(b, mu, cfg, cubes, qs, rtol=1e-9) -> VerifyReport:
    """Per cube: ``lip1 term(Q) <= mu(Q)^{-(1-k)/p} ||M_b chi_Q||`` and ``||chi_Q|| <= mu(Q)^{(1-k)/p}``."""
    g = b.grid
    u = Weight(mu.power(1.0 - cfg.q))
    worst, wit = -math.inf, None
    for q in qs:
        chi = indicator(g, q)
        mq = float(measures(mu, q.side)[q.low])
        dev = np.abs(b.values[q.slices] - window_means(b, q.side)[q.low])
        term = mq ** (-1.0 - cfg.beta / g.dim) * float(np.sum(dev)) * g.cell_volume
        mb = morrey_norm(GridFunction(g, maximal_commutator(b, chi, cubes).values), u, mu, cfg.q, cfg.target_kappa, cubes).value
        bound = mq ** (-(1.0 - cfg.kappa) / cfg.p) * mb
        gap = term / bound - 1.0 if bound > 0 else (0.0 if term == 0 else math.inf)
        if gap > worst:
            worst, wit = gap, {**q.to_json(), "term": term, "bound": bound}
    ok = worst <= rtol
    return VerifyReport("converse_chain", PASS if ok else FAIL, worst + 1.0, wit, None, {"rtol": rtol})


def _window_min(values: np.ndarray, side: int) -> np.ndarray:
    return windows(values, side).min(axis=cube_axes(values.ndim))


def check_pointwise_domination(kind: str, b, f, cubes: CubeFamily, mu: Weight | None = None,
                               cfg: ExponentConfig | None = None, lip: float | None = None) -> VerifyReport:
    """Pointwise inequalities between operators.

    ``commM_vs_Mb`` and ``commSharp_vs_2Mb`` are asserted at every cell and need
    ``b >= 0``.  ``Mb_vs_fractional``, ``lemma26_1`` and ``lemma26_2`` record
    the best constant ``C`` instead.
    """
    g = check_same_grid(b, f)
    if kind in ("commM_vs_Mb", "commSharp_vs_2Mb"):
        if np.any(b.values < 0):
            raise ConfigurationError("pointwise commutator domination needs b >= 0")
        mb = maximal_commutator(b, f, cubes).values
        if kind == "commM_vs_Mb":
            lhs, rhs = np.abs(commutator_M(b, f, cubes).values), mb
        else:
            lhs, rhs = np.abs(commutator_sharp(b, f, cubes).values), 2.0 * mb

        judge = None

        def exact(idx):
            nonlocal judge
            judge = judge or CommutatorAdjudicator(b, f, cubes)
            left, right = judge(kind, idx)
            return left <= right

        return _exact_le(kind, lhs, rhs, exact)
    if mu is None or cfg is None:
        raise ConfigurationError(f"{kind} needs a weight and exponents")
    dim = g.dim
    frac = fractional_maximal(f, mu, cfg.beta, cfg.r, cubes).values
    if kind == "lemma26_1":
        best, wit = 0.0, None
        af = f.map(np.abs)
        for s in cubes.sides():
            mask = cubes.offset_mask(s)
            avg = window_means(af, s)
            lo = _window_min(frac, s)
            c = np.where(mask & (avg > 0), avg * measures(mu, s) ** (cfg.beta / dim) / np.where(lo > 0, lo, np.inf), 0.0)
            k = np.unravel_index(int(np.argmax(c)), c.shape)
            if c[k] > best:
                best, wit = float(c[k]), Cube(s, k).to_json()
        return VerifyReport(kind, PASS if math.isfinite(best) else FAIL, best, wit)
    lip = lipschitz_norm(b, mu, cfg.beta, 1.0, cubes).value if lip is None else lip
    if lip == 0.0:
        return VerifyReport(kind, FLAGGED, None, None, None, {"reason": "zero Lipschitz seminorm"})
    if kind == "Mb_vs_fractional":
        mb = maximal_commutator(b, f, cubes).values
        den = lip * mu.values * frac
        c = np.where(mb > 0, mb / np.where(den > 0, den, np.inf), 0.0)
        k = np.unravel_index(int(np.argmax(c)), c.shape)
        best = float(c[k])
        return VerifyReport(kind, PASS if math.isfinite(best) else FAIL, best, _point_witness(k))
    if kind == "lemma26_2":
        best, wit = 0.0, None
        axes = cube_axes(dim)
        for s in cubes.sides():
            mask = cubes.offset_mask(s)
            bq = window_means(b, s)
            num = np.mean(np.abs(windows(b.values, s) - bq[(...,) + (None,) * dim]) * np.abs(windows(f.values, s)), axis=axes)
            lo = _window_min(mu.values * frac, s) * lip
            c = np.where(mask & (num > 0), num / np.where(lo > 0, lo, np.inf), 0.0)
            k = np.unravel_index(int(np.argmax(c)), c.shape)
            if c[k] > best:
                best, wit = float(c[k]), Cube(s, k).to_json()
        return VerifyReport(kind, PASS if math.isfinite(best) else FAIL, best, wit)
    raise ConfigurationError(f"unknown domination kind {kind!r}")


def check_exact_identities(grid: Grid, cubes: CubeFamily, qs=None, bs=None, n_q: int = 10,
                           n_b: int = 10, seed: int = 0) -> VerifyReport:
    """``M(chi_Q) = 1`` on ``Q`` and ``< 1`` off it, ``M(b chi_Q) = M_Q(b)`` on ``Q``
    for ``b >= 0``, and ``M#(chi_Q) = 1/2`` on ``Q``; all with ``==``.
    """
    if cubes.policy is not Policy.ALL:
        raise ConfigurationError("exact identities need the ALL cube family")
    rng = np.random.default_rng(seed)
    qs = margin_cubes(grid, n_q, rng) if qs is None else list(qs)
    for q in qs:
        _check_margin(grid, q)
    bs = [random_field(grid, rng, nonneg=True) for _ in range(n_b)] if bs is None else list(bs)
    failures = []
    for q in qs:
        chi = indicator(grid, q)
        inq = chi.values == 1.0
        m = hl_maximal(chi, cubes).values
        if not np.all(m[inq] == 1.0):
            failures.append(("M(chi_Q)=1", q, _first(~(m == 1.0) & inq)))
        if not np.all(m[~inq] < 1.0):
            failures.append(("M(chi_Q)<1 off Q", q, _first((m >= 1.0) & ~inq)))
        sh = sharp_maximal(chi, cubes).values
        if not np.all(sh[inq] == 0.5):
            failures.append(("M#(chi_Q)=1/2", q, _first((sh != 0.5) & inq)))
        for j, b in enumerate(bs):
            if np.any(b.values < 0):
                raise ConfigurationError("M(b chi_Q) = M_Q(b) needs b >= 0")
            lhs = hl_maximal(GridFunction(grid, b.values * chi.values), cubes).values
            rhs = local_maximal(b, q, cubes).values
            if not np.array_equal(lhs[inq], rhs[inq]):
                failures.append((f"M(b chi_Q)=M_Q(b) [b#{j}]", q, _first((lhs != rhs) & inq)))
    wit = None
    if failures:
        name, q, pt = failures[0]
        wit = {"identity": name, **q.to_json(), "point": pt}
    return VerifyReport(
        f"identities/dim{grid.dim}/E{grid.extent}",
        FAIL if failures else PASS,
        None,
        wit,
        None,
        {"cubes": len(qs), "symbols": len(bs), "failures": len(failures)},
    )


def _first(mask: np.ndarray) -> list[int]:
    idx = np.argwhere(mask)
    return [int(i) for i in idx[0]] if len(idx) else []


def lemma24_check(mu: Weight, cfg: ExponentConfig, cubes: CubeFamily, check_id="lemma24") -> VerifyReport:
    """``||chi_Q||_{L^{p,k}(mu)} <= mu(Q)^{(1-k)/p}`` for every cube of the family.

    Cubes rejected by the float comparison are re-decided exactly.
    """
    g = mu.grid
    rejected, bad, n = 0, [], 0
    for q in cubes:
        lhs = morrey_norm(indicator(g, q), mu, mu, cfg.p, cfg.kappa, cubes).value
        rhs = float(measures(mu, q.side)[q.low]) ** ((1.0 - cfg.kappa) / cfg.p)
        n += 1
        if lhs > rhs:
            rejected += 1
            if not indicator_norm_holds(mu, cfg.kappa, q, cubes):
                bad.append({**q.to_json(), "lhs": lhs, "rhs": rhs})
    detail = {"cubes": n, "float_rejected": rejected, "exact_failures": len(bad)}
    return VerifyReport(check_id, FAIL if bad else PASS, None, bad[0] if bad else None, None, detail)


def holder_chain_check(b, mu, beta, cubes, check_id="holder_chain") -> VerifyReport:
    """``Lip^1 <= Lip^2 <= Lip^inf`` for one symbol and weight.

    A float rejection is re-decided exactly cube by cube.
    """
    l1 = lipschitz_norm(b, mu, beta, 1.0, cubes).value
    l2 = lipschitz_norm(b, mu, beta, 2.0, cubes).value
    li = lipschitz_norm(b, mu, beta, math.inf, cubes).value
    float_ok = l1 <= l2 <= li
    ok = float_ok or holder_chain_holds(b, mu, cubes)
    vals = {"lip1": l1, "lip2": l2, "lipinf": li, "float_rejected": int(not float_ok)}
    return VerifyReport(check_id, PASS if ok else FAIL, None, None if ok else vals, None, vals)


def lip1_identity_check(b, mu, beta, cubes, check_id="lip1_identity") -> VerifyReport:
    a = lip1_proof_functional(b, mu, beta, cubes).value
    c = lipschitz_norm(b, mu, beta, 1.0, cubes).value
    ok = a == c
    return VerifyReport(check_id, PASS if ok else FAIL, None, None if ok else {"proof": a, "lip1": c}, None)


def drift(values) -> float:
    """Largest ``|C(2N)/C(N) - 1|`` over consecutive entries."""
    out = 0.0
    for a, c in zip(values, values[1:]):
        if a == 0.0:
            out = max(out, 0.0 if c == 0.0 else math.inf)
        else:
            out = max(out, abs(c / a - 1.0))
    return out


def check_characterization_equivalence(
    b_specs, mu_spec: dict, cfg: ExponentConfig, extents, dim: int = 1, s_values=None,
    tol: float = 0.25, policy: Policy = Policy.ALL
) -> list[VerifyReport]:
    """Compliant symbols: both characterization functionals (over ``||b||_Lip``) stable.
    Violators (``"role": "violator"``): both functionals strictly increase with extent.
    """
    s_values = [None, 1.0] if s_values is None else s_values
    reports = []
    for spec in b_specs:
        role = spec.get("role", "compliant")
        series = {}
        for E in extents:
            g = Grid.over(dim, E)
            cubes = enumerate_cubes(g, policy)
            mu = make_weight(g, mu_spec)
            b = make_symbol(g, mu, cfg.beta, spec)
            lip = lipschitz_norm(b, mu, cfg.beta, 1.0, cubes).value
            lf = local_maximal_fields(b, cubes)
            sf = sharp_indicator_fields(b, cubes)
            for s in s_values:
                tag = "q" if s is None else f"{s:g}"
                for name, fn, fields in (("charM", char_functional_M, lf), ("charSharp", char_functional_sharp, sf)):
                    v = fn(b, mu, cfg, s, cubes, fields=fields)
                    norm = v.value / lip if role == "compliant" and lip > 0 else v.value
                    series.setdefault((name, tag), []).append((norm, v.witness))
        for (name, tag), vals in sorted(series.items()):
            xs = [v for v, _ in vals]
            wit = vals[-1][1].to_json() if vals[-1][1] else None
            cid = f"char/{weight_label(mu_spec)}/{symbol_label(spec)}/{name}/s={tag}"
            d = drift(xs)
            if role == "compliant":
                ok = all(math.isfinite(x) for x in xs) and d <= tol
            else:
                ok = all(a < c for a, c in zip(xs, xs[1:]))
            reports.append(VerifyReport(cid, PASS if ok else FAIL, xs[-1], None if ok else {"cube": wit, "series": xs},
                                        d, {"role": role, "series": xs, "extents": list(extents)}))
    return reports


# -- suite ------------------------------------------------------------------------------


@dataclass
class TestSuiteConfig:
    """Everything ``run_suite`` needs; JSON-compatible through ``from_dict``."""

    __test__ = False  # not a pytest class

    dim: int = 1
    cfg: ExponentConfig = field(default_factory=lambda: ExponentConfig.default(1))
    weight_family: list = field(default_factory=list)
    symbol_family: list = field(default_factory=list)
    testfn_family: dict = field(default_factory=dict)
    extents: list = field(default_factory=list)
    tolerances: dict = field(default_factory=lambda: {"drift": 0.25})
    seed: int = 0
    n_random: int = 5
    policy: str = "all"

    def __post_init__(self):
        if any(a >= c for a, c in zip(self.extents, self.extents[1:])):
            raise ConfigurationError("extents must be strictly increasing")
        if self.cfg.dim != self.dim:
            raise ConfigurationError("exponent dim differs from suite dim")

    @classmethod
    def default(cls, dim: int = 1, seed: int = 0) -> "TestSuiteConfig":
        if dim == 1:
            weights = [{"kind": "power", "alpha": a} for a in (0.0, -0.25, -0.5)]
            extents = [16, 32]
        else:
            weights = [{"kind": "power", "alpha": a} for a in (0.0, -0.5, -1.0)]
            extents = [16]
        symbols = [
            {"kind": "lip", "role": "compliant"},
            {"kind": "constant", "c": -1.0, "role": "violator"},
            {"kind": "step", "role": "violator"},
        ]
        return cls(dim, ExponentConfig.default(dim), weights, symbols, {}, extents, {"drift": 0.25}, seed)

    @classmethod
    def from_dict(cls, d: dict) -> "TestSuiteConfig":
        dim = int(d.get("dim", 1))
        base = cls.default(dim, int(d.get("seed", 0)))
        e = d.get("exponents", {})
        cfg = ExponentConfig(dim, float(e.get("beta", base.cfg.beta)), float(e.get("p", base.cfg.p)),
                             e.get("kappa"), e.get("r"))
        if "q" in e and not math.isclose(float(e["q"]), cfg.q, rel_tol=1e-12):
            raise ConfigurationError(f"constraint 1/q = 1/p - beta/n violated (q={e['q']}, expected {cfg.q})")
        return cls(
            dim,
            cfg,
            d.get("weight_family", base.weight_family),
            d.get("symbol_family", base.symbol_family),
            d.get("testfn_family", base.testfn_family),
            list(d.get("extents", base.extents)),
            {**base.tolerances, **d.get("tolerances", {})},
            int(d.get("seed", 0)),
            int(d.get("n_random", base.n_random)),
            d.get("policy", "all"),
        )

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "exponents": self.cfg.to_json(),
            "weight_family": self.weight_family,
            "symbol_family": self.symbol_family,
            "testfn_family": self.testfn_family,
            "extents": self.extents,
            "tolerances": self.tolerances,
            "seed": self.seed,
            "n_random": self.n_random,
            "policy": self.policy,
        }


def stability_constants(b: GridFunction, mu: Weight, cfg: ExponentConfig, cubes: CubeFamily,
                        testfns) -> dict[str, tuple[float, dict | None]]:
    """Every empirical constant tracked across resolutions for one (symbol, weight)."""
    lip = lipschitz_norm(b, mu, cfg.beta, 1.0, cubes).value
    out = {"lipschitz_norm": (lip, None), "lemma22": (lemma22_constant(b, mu, cfg.beta, cubes), None)}
    for kind in ("lemma26_1", "lemma26_2", "Mb_vs_fractional"):
        reps = [check_pointwise_domination(kind, b, f, cubes, mu, cfg, lip) for _, f in testfns]
        reps = [r for r in reps if r.empirical_constant is not None]
        best = max(reps, key=lambda r: r.empirical_constant)
        out[kind] = (best.empirical_constant, best.worst_witness)
    for op_id in OPS:
        r = operator_norm_lower_bound(op_id, b, mu, cfg, testfns, cubes, lip)
        out[f"opnorm/{op_id}"] = (r.empirical_constant, r.worst_witness)
    return out


def run_suite(config: TestSuiteConfig) -> list[VerifyReport]:
    """Run every check over the configured families; failures never abort the sweep."""
    reports: list[VerifyReport] = []
    if not config.symbol_family:
        return reports
    dim, cfg, tol = config.dim, config.cfg, float(config.tolerances.get("drift", 0.25))
    policy = Policy(config.policy)
    rng = np.random.default_rng(config.seed)
    compliant = [s for s in config.symbol_family if s.get("role", "compliant") == "compliant"]

    def guarded(check_id, fn):
        try:
            out = fn()
        except ConfigurationError:
            raise
        except Exception as exc:  # a crashing check is recorded, not fatal
            out = VerifyReport(check_id, FAIL, None, {"error": repr(exc)})
        return out if isinstance(out, list) else [out]

    for E in config.extents:
        g = Grid.over(dim, E)
        cubes = enumerate_cubes(g, policy)
        tag = f"dim{dim}/E{E}"
        if policy is Policy.ALL:
            reports += guarded(f"{tag}/identities", lambda: _retag(
                check_exact_identities(g, cubes, n_q=config.n_random, n_b=config.n_random,
                                       seed=int(rng.integers(2**31))), f"{tag}/identities"))
        pairs = [(random_field(g, rng, nonneg=True), random_field(g, rng)) for _ in range(config.n_random)]
        for kind in ("commM_vs_Mb", "commSharp_vs_2Mb"):
            reports += guarded(f"{tag}/{kind}/random", lambda kind=kind: _merge(
                f"{tag}/{kind}/random", [check_pointwise_domination(kind, b, f, cubes) for b, f in pairs]))
        for wspec in config.weight_family:
            mu = make_weight(g, wspec)
            wtag = f"{tag}/{weight_label(wspec)}"
            flagged = bool(mu.flags)
            testfns = make_testfns(g, config.testfn_family, config.seed)
            reps = []
            reps += guarded(f"{wtag}/lemma24", lambda: lemma24_check(mu, cfg, cubes, f"{wtag}/lemma24"))
            randb = [random_field(g, rng) for _ in range(config.n_random)]
            reps += guarded(f"{wtag}/holder_chain", lambda: _merge(f"{wtag}/holder_chain", [
                holder_chain_check(b, mu, cfg.beta, cubes) for b in randb]))
            reps += guarded(f"{wtag}/lip1_identity", lambda: _merge(f"{wtag}/lip1_identity", [
                lip1_identity_check(b, mu, cfg.beta, cubes) for b in randb]))
            for spec in compliant:
                b = make_symbol(g, mu, cfg.beta, spec)
                stag = f"{wtag}/{symbol_label(spec)}"
                if np.all(b.values >= 0):
                    for kind in ("commM_vs_Mb", "commSharp_vs_2Mb"):
                        reps += guarded(f"{stag}/{kind}", lambda kind=kind: _merge(f"{stag}/{kind}", [
                            check_pointwise_domination(kind, b, f, cubes) for _, f in testfns]))
                if policy is Policy.ALL:
                    qs = margin_cubes(g, config.n_random, rng)
                    reps += guarded(f"{stag}/converse_chain", lambda: _retag(
                        converse_chain_check(b, mu, cfg, cubes, qs), f"{stag}/converse_chain"))
            if flagged:
                for r in reps:
                    r.status = FLAGGED if r.status == FAIL else r.status
                    r.detail["weight_flags"] = list(mu.flags)
            reports += reps

    if len(config.extents) >= 2:
        for wspec in config.weight_family:
            for spec in compliant:
                series: dict[str, list] = {}
                for E in config.extents:
                    g = Grid.over(dim, E)
                    cubes = enumerate_cubes(g, policy)
                    mu = make_weight(g, wspec)
                    b = make_symbol(g, mu, cfg.beta, spec)
                    consts = stability_constants(b, mu, cfg, cubes, make_testfns(g, config.testfn_family, config.seed))
                    for k, v in consts.items():
                        series.setdefault(k, []).append(v)
                for k, vals in sorted(series.items()):
                    xs = [v for v, _ in vals]
                    d = drift(xs)
                    ok = all(math.isfinite(x) for x in xs) and d <= tol
                    cid = f"stability/dim{dim}/{weight_label(wspec)}/{symbol_label(spec)}/{k}"
                    reports.append(VerifyReport(cid, PASS if ok else FAIL, xs[-1],
                                                vals[-1][1] if ok else {"series": xs, "witness": vals[-1][1]},
                                                d, {"series": xs, "extents": list(config.extents)}))
            reports += check_characterization_equivalence(
                config.symbol_family, wspec, cfg, config.extents, dim, tol=tol, policy=policy)
    return sorted(reports, key=lambda r: r.check_id)


def _retag(report: VerifyReport, check_id: str) -> VerifyReport:
    report.check_id = check_id
    return report


def suite_passes(reports: list[VerifyReport]) -> bool:
    return all(r.status != FAIL for r in reports)


def reports_to_json(reports: list[VerifyReport]) -> list[dict]:
    return [r.to_json() for r in sorted(reports, key=lambda r: r.check_id)]
