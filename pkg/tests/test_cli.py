import csv
import json
from pathlib import Path

from fracdual import cli

ROOT = Path(__file__).resolve().parents[1]


def _write(tmp_path, text):
    p = tmp_path / "config.toml"
    p.write_text(text)
    return p


SOLVE_BASE = """
seed = 1

[kernel]
family = "fractional-laplacian"
n = 2
s = 0.5

[domain]
shape = "ball"
center = [0.0, 0.0]
radius = 1.0

[grid]
n_across = 16

[solve]
mode = "duality"
"""


def test_exponents_summary_byte_stable(tmp_path):
    cfgpath = ROOT / "configs" / "c10_exponents.toml"
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        rc = cli.main(["regularity", "--config", str(cfgpath), "--out", str(out)])
        assert rc == 0
        outs.append((out / "summary.json").read_bytes())
        assert (out / "timing.json").exists()
        assert not (out / "FAILED").exists()
    assert outs[0] == outs[1]


def test_missing_config_exits_2(tmp_path):
    rc = cli.main(["solve", "--config", str(tmp_path / "nope.toml"),
                   "--out", str(tmp_path / "out")])
    assert rc == 2


def test_invalid_toml_exits_2(tmp_path):
    cfg = _write(tmp_path, "this is not = [valid toml\n")
    rc = cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == 2


def test_solve_zero_measure_gives_zero_csv(tmp_path):
    cfg = _write(tmp_path, SOLVE_BASE)
    out = tmp_path / "out"
    rc = cli.main(["solve", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    with open(out / "solution.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows
    assert all(float(r["u"]) == 0.0 for r in rows)


def test_unknown_density_exits_2_with_marker(tmp_path):
    cfg = _write(tmp_path, SOLVE_BASE + """
[measure]
density = "lorentzian"
""")
    out = tmp_path / "out"
    rc = cli.main(["solve", "--config", str(cfg), "--out", str(out)])
    assert rc == 2
    assert (out / "FAILED").exists()


def test_geometry_wrong_expectation_exits_1(tmp_path):
    cfg = _write(tmp_path, """
seed = 2

[geometry]

[[geometry.cases]]
shape = "box"
lo = [-1.0, -1.0]
hi = [1.0, 1.0]
ball_radius = 0.1

[geometry.cases.expect]
exterior = true
interior = true
""")
    out = tmp_path / "out"
    rc = cli.main(["geometry", "--config", str(cfg), "--out", str(out)])
    assert rc == 1
    assert (out / "FAILED").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["verdict"] == "fail"


def test_seed_override_recorded(tmp_path):
    cfg = _write(tmp_path, SOLVE_BASE)
    out = tmp_path / "out"
    rc = cli.main(["solve", "--config", str(cfg), "--out", str(out),
                   "--seed", "99"])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed"] == 99
