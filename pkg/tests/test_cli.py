"""End-to-end command line runs on small configs in temporary directories."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

import levysim.cli as cli

SMALL_BDG = """
kind = "bdg"
seed = 3

[space]
kind = "lq"
dim = 1
q = 2.0
r = 2.0

[marks]
values = [1.0]
weights = [1.0]

[experiment]
p = 2.0
T = 1.0

[mc]
n_paths = 500
"""

SMALL_QGE = """
kind = "qge"
seed = 1

[qge]
n = 16
T = 0.1
n_steps = 8
s = 0.25
theta0 = [[1, 1, 0.1]]
noise_modes = [[1, 2]]
noise_amplitude = 0.05
noise_rate = 2.0
"""


def write_cfg(tmp_path: Path, body: str, name: str = "cfg.toml") -> Path:
    p = tmp_path / name
    p.write_text(body)
    return p


def test_run_produces_artifacts(tmp_path):
    cfg = write_cfg(tmp_path, SMALL_BDG)
    out = tmp_path / "out"
    rc = cli.main(["run", str(cfg), "--out-dir", str(out), "--jobs", "1"])
    assert rc == 0
    payload = json.loads((out / "report.json").read_text())
    assert payload["reports"][0]["verdict"] == "holds"
    assert len(payload["config_hash"]) == 64
    csv_text = (out / "report.csv").read_text()
    assert csv_text.splitlines()[0].startswith("name,")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["kind"] == "bdg"
    assert manifest["config_hash"] == payload["config_hash"]
    assert manifest["started"] <= manifest["finished"]
    assert str(out / "report.json") in manifest["outputs"]


def test_reruns_are_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, SMALL_BDG)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["run", str(cfg), "--out-dir", str(out), "--jobs", "1"]) == 0
        outs.append(out)
    for fname in ("report.json", "report.csv"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_jobs_do_not_change_results(tmp_path):
    cfg = write_cfg(tmp_path, SMALL_BDG)
    a, b = tmp_path / "j1", tmp_path / "j2"
    assert cli.main(["run", str(cfg), "--out-dir", str(a), "--jobs", "1"]) == 0
    assert cli.main(["run", str(cfg), "--out-dir", str(b), "--jobs", "2"]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_qge_run_and_snapshots(tmp_path):
    cfg = write_cfg(
        tmp_path, SMALL_QGE + '\n[output]\nformats = ["json", "csv", "snapshots"]\n'
    )
    out = tmp_path / "q"
    rc = cli.main(["run", str(cfg), "--out-dir", str(out)])
    assert rc == 0
    payload = json.loads((out / "report.json").read_text())
    assert payload["ledger"]["all_hold"] is True
    assert (out / "snapshots.bin").exists()
    assert (out / "snapshots.json").exists()


def test_bad_config_exits_one(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL_BDG.replace("r = 2.0", "r = 5.0"))
    rc = cli.main(["run", str(cfg), "--out-dir", str(tmp_path / "x")])
    assert rc == 1
    assert "config error" in capsys.readouterr().err


def test_violated_verdict_exits_two(tmp_path, monkeypatch):
    real = cli.bdg_report

    def violated(spec, jobs=1):
        rep = real(spec, jobs)
        rep.verdict = "violated"
        return rep

    monkeypatch.setattr(cli, "bdg_report", violated)
    cfg = write_cfg(tmp_path, SMALL_BDG)
    out = tmp_path / "v"
    rc = cli.main(["run", str(cfg), "--out-dir", str(out)])
    assert rc == 2
    payload = json.loads((out / "report.json").read_text())
    assert payload["reports"][0]["verdict"] == "violated"


def test_out_dir_resolution_env(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, SMALL_BDG)
    env_dir = tmp_path / "envout"
    monkeypatch.setenv("LEVYSIM_OUT", str(env_dir))
    assert cli.main(["run", str(cfg)]) == 0
    assert (env_dir / "report.json").exists()


def test_out_dir_resolution_config_beats_env(tmp_path, monkeypatch):
    cfg_dir = tmp_path / "fromcfg"
    body = SMALL_BDG + f'\n[output]\ndirectory = "{cfg_dir}"\n'
    cfg = write_cfg(tmp_path, body)
    monkeypatch.setenv("LEVYSIM_OUT", str(tmp_path / "ignored"))
    assert cli.main(["run", str(cfg)]) == 0
    assert (cfg_dir / "report.json").exists()
    assert not (tmp_path / "ignored").exists()


def test_describe_all_kinds(capsys):
    for kind in (
        "integral", "bdg", "lp", "kallenberg", "conv-maximal",
        "levy-maximal", "tail", "ito-jump", "ito-levy", "qge",
    ):
        assert cli.main(["describe", kind]) == 0
        out = capsys.readouterr().out
        assert kind in out.splitlines()[0]
    assert cli.main(["describe", "nonsense"]) == 1
    assert "known kinds" in capsys.readouterr().err


def test_sweep_grid_and_seeds(tmp_path):
    cfg = write_cfg(tmp_path, SMALL_BDG)
    out = tmp_path / "sw"
    rc = cli.main(
        ["sweep", str(cfg), "--grid", "p=2,3 c=1,2", "--out-dir", str(out), "--jobs", "1"]
    )
    assert rc == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("p,c,seed,verdict")
    assert len(lines) == 5
    seeds = [int(row.split(",")[2]) for row in lines[1:]]
    assert len(set(seeds)) == 4
    for idx in range(4):
        assert (out / f"point-{idx:03d}" / "report.json").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["grid"] == "p=2,3 c=1,2"


def test_sweep_bad_grid(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL_BDG)
    rc = cli.main(["sweep", str(cfg), "--grid", "zeta=1", "--out-dir", str(tmp_path / "z")])
    assert rc == 1
    assert "not sweepable" in capsys.readouterr().err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert "levysim" in capsys.readouterr().out
