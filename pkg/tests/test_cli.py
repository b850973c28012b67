import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from morreylip import io
from morreylip.cli import main
from morreylip.grid import Grid, GridFunction, enumerate_cubes
from morreylip.operators import hl_maximal


@pytest.fixture
def files(tmp_path, rng):
    g8, g16 = Grid.over(1, 8), Grid.over(1, 16)
    paths = {}
    for name, fn in {
        "f": GridFunction(g16, rng.normal(size=16)),
        "b": GridFunction(g16, rng.uniform(0, 1, 16)),
        "b8": GridFunction(g8, rng.uniform(0, 1, 8)),
        "f2": GridFunction(Grid.over(2, 6), rng.normal(size=(6, 6))),
    }.items():
        paths[name] = tmp_path / f"{name}.csv"
        io.write_grid_function(fn, paths[name])
    return paths


def test_csv_round_trip(files):
    for k in ("f", "f2"):
        fn = io.read_grid_function(files[k])
        assert io.read_grid_function(files[k]).grid == fn.grid
        again = io.parse_grid_function(io.format_grid_function(fn))
        assert np.array_equal(again.values, fn.values)


def test_field_hl(files, tmp_path):
    out = tmp_path / "m.csv"
    assert main(["field", "--op", "M", "--f", str(files["f"]), "--family", "all", "--out", str(out)]) == 0
    f = io.read_grid_function(files["f"])
    assert np.array_equal(io.read_grid_function(out).values, hl_maximal(f, enumerate_cubes(f.grid)).values)


def test_field_witness_json(files, tmp_path):
    w = tmp_path / "w.json"
    assert main(["field", "--op", "Mb", "--b", str(files["b"]), "--f", str(files["f"]),
                 "--out", str(tmp_path / "o.csv"), "--witness", str(w)]) == 0
    assert len(json.loads(w.read_text())) == 16


@pytest.mark.parametrize(
    "argv",
    [
        ["field", "--op", "commutator_M", "--b", "B8", "--f", "F"],
        ["field", "--op", "fractional", "--f", "F", "--r", "0.5"],
        ["field", "--op", "nope", "--f", "F"],
        ["field", "--op", "M", "--f", "MISSING"],
        ["norm", "--kind", "morrey"],
        ["sweep", "--functional", "char_M", "--extents", ""],
        ["sweep", "--functional", "char_M", "--extents", "16"],
        ["sweep", "--functional", "bogus", "--extents", "16,32"],
        ["verify"],
        ["apcheck", "--alpha", "-0.5"],
    ],
)
def test_usage_errors_exit_2(files, argv, capsys):
    sub = {"F": str(files["f"]), "B8": str(files["b8"]), "MISSING": str(files["f"]) + ".nope"}
    assert main([sub.get(a, a) for a in argv]) == 2
    assert "error:" in capsys.readouterr().err


def test_verify_bad_exponents_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"dim": 1, "exponents": {"beta": 0.5, "p": 1.5, "kappa": 0.3}}))
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "r.json")]) == 2
    assert "0 < kappa < p/q" in capsys.readouterr().err


def test_norm_kinds(files, tmp_path):
    for kind in ("lebesgue", "morrey", "lipschitz", "lip1_proof", "lemma22", "char_M", "char_sharp"):
        out = tmp_path / f"{kind}.json"
        assert main(["norm", "--kind", kind, "--f", str(files["b"]), "--out", str(out)]) == 0
        rec = json.loads(out.read_text())
        assert rec["kind"] == kind and rec["exponents"]["q"] == 6.0
    assert main(["norm", "--kind", "lipschitz", "--lip-p", "inf", "--f", str(files["b"]),
                 "--out", str(tmp_path / "x.json")]) == 0


def test_apcheck_power(tmp_path):
    out = tmp_path / "ap.json"
    assert main(["apcheck", "--alpha", "-0.5", "--dim", "1", "--extent", "16", "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["A_1"]["constant"] >= rec["A_p"]["constant"] >= 1.0


def _small_config(path, symbol):
    path.write_text(json.dumps({
        "dim": 1, "extents": [16, 32], "n_random": 2,
        "weight_family": [{"kind": "power", "alpha": -0.25}],
        "symbol_family": [symbol],
    }))
    return path


def test_verify_config_deterministic_and_exit_codes(tmp_path):
    cfg = _small_config(tmp_path / "ok.json", {"kind": "lip", "role": "compliant"})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "--config", str(cfg), "--seed", "7", "--out", str(a)]) == 0
    assert main(["verify", "--config", str(cfg), "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    bad = _small_config(tmp_path / "bad.json", {"kind": "step", "role": "compliant"})
    bad_cfg = json.loads(bad.read_text())
    bad_cfg["weight_family"] = [{"kind": "power", "alpha": 0.0}]
    bad.write_text(json.dumps(bad_cfg))
    assert main(["verify", "--config", str(bad), "--out", str(tmp_path / "c.json")]) == 1


def _read_csv(text):
    return list(csv.DictReader(text.splitlines()))


def test_sweep_blow_up_column(capsys):
    assert main(["sweep", "--functional", "char_M", "--extents", "16,32,64",
                 "--symbol", '{"kind": "constant", "c": -1}']) == 0
    rows = _read_csv(capsys.readouterr().out)
    vals = [float(r["value"]) for r in rows]
    assert [int(r["extent"]) for r in rows] == [16, 32, 64]
    assert vals[0] < vals[1] < vals[2]


def test_sweep_lip_symbol_drift(capsys):
    assert main(["sweep", "--functional", "lipschitz_norm,lemma22", "--extents", "16,32"]) == 0
    rows = _read_csv(capsys.readouterr().out)
    assert len(rows) == 4
    assert all(float(r["drift"]) <= 0.25 for r in rows if r["drift"])


def test_config_file_fills_flags(files, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"op": "M", "f": str(files["f"]), "family": "dyadic"}))
    out = tmp_path / "o.csv"
    assert main(["field", "--op", "M", "--config", str(cfg), "--f", str(files["f"]), "--out", str(out)]) == 0
    f = io.read_grid_function(files["f"])
    assert np.array_equal(io.read_grid_function(out).values, hl_maximal(f, enumerate_cubes(f.grid, "dyadic")).values)


def test_module_entry_point(files):
    r = subprocess.run([sys.executable, "-m", "morreylip", "field", "--op", "sharp", "--f", str(files["f"])],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("#")
