import json
import subprocess
import sys

import numpy as np
import pytest
import scipy.sparse as sp

from magspec.assembly import load_coordinate
from magspec.cli import ConfigError, build_configs, main, parse_config
from magspec.experiments import build_operator

SMALL_SPECTRUM = """\
# a quick free-space census
experiment = spectrum
truncation_radius = 3.5
h = 0.3
field = constant
field.b = 1.0          # symmetric gauge
window = 0 2
delta = 0.2
"""

SMALL_LADDER = """\
experiment = ladder
truncation_radius = 3.5
h = 0.35
window = 0 2
delta = 0.2
radii = 3.5, 4.5
"""

SMALL_COMPARE = """\
experiment = compare
truncation_radius = 5.0
h = 0.35
obstacle = disk
obstacle.radius = 1.0
window = 0 2
delta = 0.2
radii = 5.0 6.5
diff_bound = 10
"""


def _cfgfile(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# ── Config parsing ─────────────────────────────────────────────────────────


def test_parse_round_trip(tmp_path):
    path = _cfgfile(tmp_path, SMALL_SPECTRUM)
    settings = parse_config(path)
    assert settings["window"] == (0.0, 2.0)
    assert settings["field.b"] == 1.0
    exp, cfg, extras = build_configs(settings)
    assert exp == "spectrum"
    assert cfg.truncation_radius == 3.5
    assert cfg.fieldspec.b == 1.0


def test_parse_unknown_key_has_line_number(tmp_path):
    path = _cfgfile(tmp_path, "h = 0.3\nwobble = 2\n")
    with pytest.raises(ConfigError, match=r":2"):
        parse_config(path)


def test_parse_duplicate_key(tmp_path):
    path = _cfgfile(tmp_path, "h = 0.3\nh = 0.2\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(path)


def test_parse_bad_value(tmp_path):
    path = _cfgfile(tmp_path, "h = fast\n")
    with pytest.raises(ConfigError, match=r":1"):
        parse_config(path)
    path2 = _cfgfile(tmp_path, "window = 1 2 3\n", "w.cfg")
    with pytest.raises(ConfigError):
        parse_config(path2)
    path3 = _cfgfile(tmp_path, "just words\n", "n.cfg")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config(path3)


def test_parse_choice_check(tmp_path):
    path = _cfgfile(tmp_path, "field = solenoid\n")
    with pytest.raises(ConfigError, match="must be one of"):
        parse_config(path)


def test_build_configs_requires_radii(tmp_path):
    path = _cfgfile(tmp_path, "experiment = ladder\n")
    with pytest.raises(ConfigError, match="radii"):
        build_configs(parse_config(path), where=path)


def test_window_none(tmp_path):
    path = _cfgfile(tmp_path, "window = none\nk = 4\n")
    _, cfg, _ = build_configs(parse_config(path))
    assert cfg.window is None
    assert cfg.k == 4


# ── validate and landau commands ───────────────────────────────────────────


def test_validate_ok(tmp_path, capsys):
    path = _cfgfile(tmp_path, SMALL_SPECTRUM)
    assert main(["validate", path]) == 0
    out = capsys.readouterr().out
    assert "OK" in out and "spectrum" in out


def test_validate_bad_config(tmp_path, capsys):
    path = _cfgfile(tmp_path, "gamma = 0.5\n")   # gamma with no obstacle
    assert main(["validate", path]) == 1
    assert "error" in capsys.readouterr().err


def test_validate_missing_file(capsys):
    assert main(["validate", "/nonexistent/x.cfg"]) == 1


def test_landau_stdout(capsys):
    assert main(["landau", "--b", "1.0", "--cutoff", "6"]) == 0
    out = capsys.readouterr().out
    assert "level 1: 1.0" in out and "level 3: 5.0" in out


def test_landau_json(capsys):
    assert main(["landau", "--b", "2.0", "--cutoff", "7", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["levels"] == [2.0, 6.0]
    assert main(["landau", "--b", "1.0", "--dim", "3", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["kind"] == "half_line" and data["threshold"] == 1.0
    assert main(["landau", "--b", "1.0", "--dimension", "3", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "half_line"


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "magspec.cli"],
                         capture_output=True, text=True)
    assert out.returncode == 1          # no subcommand is a usage error
    got = subprocess.run(["magspec", "landau", "--json"],
                         capture_output=True, text=True)
    assert got.returncode == 0
    assert json.loads(got.stdout)["kind"] == "landau_set"


# ── run command ────────────────────────────────────────────────────────────


def test_run_spectrum_outputs(tmp_path, capsys):
    cfg = _cfgfile(tmp_path, SMALL_SPECTRUM)
    outdir = tmp_path / "out"
    assert main(["run", cfg, "--out", str(outdir)]) == 0
    data = json.loads((outdir / "results.json").read_text())
    assert data["experiment"] == "spectrum"
    assert data["config"]["h"] == 0.3
    assert data["run"]["certified"] is True
    assert "seconds" not in data["run"]
    lines = (outdir / "eigenvalues.csv").read_text().splitlines()
    assert lines[0] == "index,value,residual"
    assert len(lines) == 1 + len(data["run"]["eigenvalues"])
    first = lines[1].split(",")
    assert int(first[0]) == 0
    assert float(first[1]) == data["run"]["eigenvalues"][0]


def test_run_is_deterministic(tmp_path, capsys):
    cfg = _cfgfile(tmp_path, SMALL_SPECTRUM)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["run", cfg, "--out", str(out1)]) == 0
    assert main(["run", cfg, "--out", str(out2)]) == 0
    assert (out1 / "results.json").read_bytes() == (out2 / "results.json").read_bytes()
    assert (out1 / "eigenvalues.csv").read_bytes() == (out2 / "eigenvalues.csv").read_bytes()


def test_run_seed_override(tmp_path, capsys):
    cfg = _cfgfile(tmp_path, SMALL_SPECTRUM)
    outdir = tmp_path / "out"
    assert main(["run", cfg, "--out", str(outdir), "--seed", "17"]) == 0
    data = json.loads((outdir / "results.json").read_text())
    assert data["config"]["seed"] == 17


def test_run_export_matrix(tmp_path, capsys):
    cfg = _cfgfile(tmp_path, SMALL_SPECTRUM)
    outdir = tmp_path / "out"
    mat_path = tmp_path / "op.coo"
    assert main(["run", cfg, "--out", str(outdir),
                 "--export-matrix", str(mat_path)]) == 0
    back = load_coordinate(mat_path)
    _, cfg_obj, _ = build_configs(parse_config(cfg))
    _, _, op = build_operator(cfg_obj)
    assert (back - op.mat).nnz == 0


def test_run_ladder_outputs(tmp_path, capsys):
    cfg = _cfgfile(tmp_path, SMALL_LADDER)
    outdir = tmp_path / "out"
    assert main(["run", cfg, "--out", str(outdir), "--jobs", "1"]) == 0
    data = json.loads((outdir / "results.json").read_text())
    assert data["ladder"]["ladder"]["persistent"] == [1.0]
    lines = (outdir / "ladder.csv").read_text().splitlines()
    assert lines[0] == "radius,level,count,off_cluster_fraction"
    assert len(lines) == 3              # one row per (radius, level)


def test_run_compare_pass(tmp_path, capsys):
    cfg = _cfgfile(tmp_path, SMALL_COMPARE)
    outdir = tmp_path / "out"
    assert main(["run", cfg, "--out", str(outdir), "--jobs", "1"]) == 0
    data = json.loads((outdir / "results.json").read_text())
    assert data["verdict"] == "PASS"
    assert data["exit_code"] == 0
    lines = (outdir / "ladder.csv").read_text().splitlines()
    assert lines[0].startswith("side,")
    assert any(line.startswith("a,") for line in lines[1:])
    assert any(line.startswith("b,") for line in lines[1:])


def test_run_compare_fail_exit_code(tmp_path, capsys):
    text = SMALL_COMPARE + "compare.field = radial_growth\ncompare.field.p = 1.0\n"
    cfg = _cfgfile(tmp_path, text)
    outdir = tmp_path / "out"
    assert main(["run", cfg, "--out", str(outdir), "--jobs", "1"]) == 2
    data = json.loads((outdir / "results.json").read_text())
    assert data["verdict"] == "FAIL"
    assert data["exit_code"] == 2


def test_run_window_overflow_is_error(tmp_path, capsys):
    cfg = _cfgfile(tmp_path, SMALL_SPECTRUM + "cap = 1\n")
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "cap" in capsys.readouterr().err


def test_run_missing_config(tmp_path, capsys):
    assert main(["run", str(tmp_path / "ghost.cfg"),
                 "--out", str(tmp_path)]) == 1
