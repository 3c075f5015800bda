"""Config parsing, validation messages, resolution defaults, and hashing."""

from __future__ import annotations

from pathlib import Path

import pytest

from levysim.config import (
    ConfigError,
    build_experiment_spec,
    config_hash,
    load_config,
    resolve_config,
)

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def write_toml(tmp_path: Path, body: str) -> Path:
    p = tmp_path / "cfg.toml"
    p.write_text(body)
    return p


MINIMAL_BDG = """
kind = "bdg"

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
n_paths = 100
"""


def test_all_shipped_configs_load():
    paths = sorted(CONFIG_DIR.glob("*.toml"))
    assert len(paths) == 10
    kinds = set()
    for p in paths:
        cfg = load_config(p)
        kinds.add(cfg["kind"])
        assert len(config_hash(cfg)) == 64
    assert kinds == {
        "integral", "bdg", "lp", "kallenberg", "conv-maximal",
        "levy-maximal", "tail", "ito-jump", "ito-levy", "qge",
    }


def test_minimal_config_defaults(tmp_path):
    cfg = load_config(write_toml(tmp_path, MINIMAL_BDG))
    assert cfg["seed"] == 0
    assert cfg["output"]["formats"] == ["json", "csv"]
    assert cfg["experiment"]["scale"] == 1.0
    assert cfg["mc"]["n_steps"] == 256


def test_missing_file_and_bad_toml(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.toml")
    bad = write_toml(tmp_path, "kind = [unterminated")
    with pytest.raises(ConfigError, match="line"):
        load_config(bad)


def test_r_out_of_range_message(tmp_path):
    body = MINIMAL_BDG.replace("r = 2.0", "r = 3.0")
    with pytest.raises(ConfigError, match=r"r must lie in \(1,2\]"):
        load_config(write_toml(tmp_path, body))


def test_unknown_key_rejected(tmp_path):
    body = MINIMAL_BDG + "\n[experiment.bogus]\nx = 1\n"
    with pytest.raises(ConfigError):
        load_config(write_toml(tmp_path, body))
    body2 = MINIMAL_BDG.replace("p = 2.0", "p = 2.0\nunknown_knob = 3")
    with pytest.raises(ConfigError, match="unknown_knob|additional"):
        load_config(write_toml(tmp_path, body2))


def test_stray_section_rejected(tmp_path):
    body = MINIMAL_BDG + "\n[qge]\nn = 16\nT = 1.0\nn_steps = 4\ns = 0.25\n"
    with pytest.raises(ConfigError, match="qge"):
        load_config(write_toml(tmp_path, body))


def test_mark_dimension_mismatch(tmp_path):
    body = MINIMAL_BDG.replace("dim = 1", "dim = 3")
    with pytest.raises(ConfigError, match="dim"):
        load_config(write_toml(tmp_path, body))


def test_tail_requires_lam_and_grid(tmp_path):
    body = MINIMAL_BDG.replace('kind = "bdg"', 'kind = "tail"')
    with pytest.raises(ConfigError, match="lam"):
        load_config(write_toml(tmp_path, body))


def test_hash_ignores_output_jobs_title(tmp_path):
    base = load_config(write_toml(tmp_path, MINIMAL_BDG))
    decorated = (
        'title = "anything"\njobs = 7\n'
        + MINIMAL_BDG
        + '\n[output]\ndirectory = "elsewhere"\n'
    )
    other = load_config(write_toml(tmp_path, decorated))
    assert config_hash(base) == config_hash(other)
    reseeded = resolve_config({**base, "seed": 1})
    assert config_hash(reseeded) != config_hash(base)


def test_build_experiment_spec_roundtrip():
    cfg = load_config(CONFIG_DIR / "bdg_scalar.toml")
    spec = build_experiment_spec(cfg, p=float(cfg["experiment"]["p"]), seed=cfg["seed"])
    assert spec.p == 2.0
    assert spec.r == 2.0
    assert spec.space.dim == 1
    assert spec.marks is not None


def test_qge_config_shape():
    cfg = load_config(CONFIG_DIR / "qge_small.toml")
    q = cfg["qge"]
    assert q["n"] & (q["n"] - 1) == 0
    assert 0.0 < q["s"] < 0.5
    assert q["snapshots_every"] >= 1


def test_qge_rejects_non_power_grid(tmp_path):
    body = """
kind = "qge"

[qge]
n = 24
T = 0.5
n_steps = 16
s = 0.25
"""
    with pytest.raises(ConfigError, match="power of two"):
        load_config(write_toml(tmp_path, body))
