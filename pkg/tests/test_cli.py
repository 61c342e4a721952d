"""End-to-end checks of the fqm command line, run in-process."""

import csv
import json

import pytest

from fqm import __version__, cli


def _write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def _run(tmp_path, sub, text, *extra, out="out"):
    cfg = _write(tmp_path, text)
    code = cli.main([sub, "--config", str(cfg), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


EVOLVE = """
[physics]
alpha = 1.5
[grid]
n_points = 256
length = 40.0
[evolve]
width = 1.0
momentum = 0.5
t_final = 0.5
n_frames = 2
"""


def test_evolve_csv_layout(tmp_path):
    code, out = _run(tmp_path, "evolve", EVOLVE)
    assert code == 0
    lines = (out / "evolve_alpha1.5.csv").read_text().splitlines()
    assert lines[0].startswith("# ")
    header = json.loads(lines[0][2:])
    assert header["code_version"] == __version__
    assert header["config"]["physics"]["alpha"] == 1.5
    rows = list(csv.reader(lines[1:]))
    assert rows[0] == ["t", "x", "rho", "j"]
    ts = sorted({float(r[0]) for r in rows[1:]})
    assert ts[0] == 0.0 and ts[-1] == pytest.approx(0.5)
    assert len(rows) - 1 == len(ts) * 256


def test_evolve_density_normalized(tmp_path):
    code, out = _run(tmp_path, "evolve", EVOLVE)
    rows = list(csv.reader((out / "evolve_alpha1.5.csv").read_text().splitlines()[2:]))
    dx = 40.0 / 256
    for t in {r[0] for r in rows}:
        norm = sum(float(r[2]) for r in rows if r[0] == t) * dx
        assert norm == pytest.approx(1.0, abs=1e-10)


def test_spectra_sweep_has_all_models(tmp_path):
    code, out = _run(tmp_path, "spectra", "[physics]\nalpha = [1.5, 2.0]\n[spectra]\nn_levels = 2\n")
    assert code == 0
    summary = json.loads((out / "spectra.json").read_text())
    assert [j["job"] for j in summary["jobs"]] == [1.5, 2.0]
    for job in summary["jobs"]:
        assert set(job["json"]["models"]) == {"infinite_well", "bohr_atom", "oscillator",
                                              "delta_well", "linear"}
    osc = summary["jobs"][1]["json"]["models"]["oscillator"]["levels"]
    assert [lv["energy"] for lv in osc] == pytest.approx([1.0, 3.0])


def test_kernel_and_statmech_and_eigen(tmp_path):
    code, out = _run(tmp_path, "kernel",
                     '[physics]\nalpha = 1.5\n[kernel]\nquantity = "density"\nx = [0.0, 1.0]\n',
                     out="k")
    assert code == 0 and (out / "kernel.json").exists()
    code, out = _run(tmp_path, "statmech",
                     "[physics]\nalpha = 2.0\n[grid]\nn_points = 64\nlength = 12.0\n"
                     '[potential]\nkind = "power_law"\n[statmech]\nbeta = [0.5]\n', out="s")
    assert code == 0
    job = json.loads((out / "statmech.json").read_text())["jobs"][0]["json"]
    assert job["betas"][0]["Z"] > 0
    code, out = _run(tmp_path, "eigen",
                     "[physics]\nalpha = 2.0\n[grid]\nn_points = 256\nlength = 20.0\n"
                     '[potential]\nkind = "power_law"\n[eigen]\nn_states = 2\n', out="e")
    assert code == 0
    levels = json.loads((out / "eigen.json").read_text())["jobs"][0]["json"]["spectrum"]["levels"]
    assert [lv["energy"] for lv in levels] == pytest.approx([1.0, 3.0], rel=1e-6)


def test_schema_error_names_field(tmp_path, capsys):
    code, out = _run(tmp_path, "eigen", '[grid]\nn_points = "many"\n')
    assert code == 2
    report = json.loads(capsys.readouterr().err)
    assert report["error_type"] == "schema"
    assert report["errors"][0]["loc"] == "grid.n_points"
    assert json.loads((out / "error.json").read_text()) == report


def test_unknown_key_rejected(tmp_path, capsys):
    code, _ = _run(tmp_path, "eigen", "[physics]\nalpah = 1.5\n")
    assert code == 2
    assert json.loads(capsys.readouterr().err)["errors"][0]["loc"] == "physics.alpah"


def test_alpha_domain_checked_before_compute(tmp_path, capsys, monkeypatch):
    def boom(*args):
        raise AssertionError("compute should not start")
    monkeypatch.setitem(cli.JOBS, "spectra", boom)
    code, out = _run(tmp_path, "spectra", "[physics]\nalpha = [1.5, 2.5]\n")
    assert code == 3
    report = json.loads((out / "error.json").read_text())
    assert report["error_type"] == "domain"
    assert report["errors"][0]["loc"] == "physics.alpha.1"


def test_missing_config_file(tmp_path):
    code = cli.main(["eigen", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path / "o")])
    assert code == 2


def test_runtime_error_reported(tmp_path, monkeypatch):
    def bad(cfg, alpha):
        raise ValueError("deliberate")
    monkeypatch.setitem(cli.JOBS, "kernel", bad)
    code, out = _run(tmp_path, "kernel", "[physics]\nalpha = 1.5\n")
    assert code == 4
    report = json.loads((out / "error.json").read_text())
    assert report["errors"][0]["msg"] == "deliberate"


def test_outputs_are_deterministic(tmp_path):
    text = "[physics]\nalpha = [1.3, 1.9]\n[spectra]\nn_levels = 2\n"
    _run(tmp_path, "spectra", text, out="a")
    _run(tmp_path, "spectra", text, "--workers", "2", out="b")
    assert (tmp_path / "a" / "spectra.json").read_bytes() == (tmp_path / "b" / "spectra.json").read_bytes()
    _run(tmp_path, "evolve", EVOLVE, out="c")
    _run(tmp_path, "evolve", EVOLVE, out="d")
    assert (tmp_path / "c" / "evolve_alpha1.5.csv").read_bytes() == \
        (tmp_path / "d" / "evolve_alpha1.5.csv").read_bytes()


def test_worker_resolution(monkeypatch):
    cfg = cli.RunConfig()
    monkeypatch.delenv("FQM_WORKERS", raising=False)
    assert cli.resolve_workers(None, cfg) == 1
    monkeypatch.setenv("FQM_WORKERS", "3")
    assert cli.resolve_workers(None, cfg) == 3
    assert cli.resolve_workers(2, cfg) == 2
    assert cli.resolve_workers(None, cli.RunConfig(workers=5)) == 5
    monkeypatch.setenv("FQM_WORKERS", "lots")
    with pytest.raises(cli.CliError):
        cli.resolve_workers(None, cfg)


def test_env_workers_run(tmp_path, monkeypatch):
    monkeypatch.setenv("FQM_WORKERS", "2")
    code, out = _run(tmp_path, "kernel", '[physics]\nalpha = [1.4, 1.6]\n[kernel]\nquantity = "stable"\n')
    assert code == 0
    assert len(json.loads((out / "kernel.json").read_text())["jobs"]) == 2


def test_validate_subset(tmp_path, capsys):
    code, out = _run(tmp_path, "validate", "[validate]\ncriteria = [7]\n")
    assert code == 0
    assert "[PASS] criterion 7" in capsys.readouterr().out
    assert json.loads((out / "validate.json").read_text())["jobs"][0]["json"]["passed"] is True


def test_shipped_configs_parse():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "configs"
    for path in sorted(root.glob("*.toml")):
        cli.check_domain(cli.load_config(path))
