"""TOML experiment configs: schema validation, defaults, object builders.

The structural schema ships as package data (also published in docs/); it
rejects unknown keys outright. Semantic coherence (per-kind required
sections, dimension agreement) is checked here with pointed messages. The
config hash covers everything that affects the numbers: output location,
parallelism, and the title are excluded.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - runtime below 3.11
    import tomli as tomllib

import jsonschema
import numpy as np

from .inequalities import ExperimentSpec
from .integrals import (
    Integrand,
    Semigroup,
    constant_drift,
    constant_jump_map,
    constant_wiener_map,
)
from .poisson import MarkSpace, finite_marks
from .spaces import NormedSpace, lq_space


class ConfigError(ValueError):
    pass


_MC_KINDS = {"integral", "bdg", "lp", "kallenberg", "conv-maximal", "levy-maximal", "tail"}
_SEMIGROUP_KINDS = {"conv-maximal", "levy-maximal"}
_ITO_KINDS = {"ito-jump", "ito-levy"}

_SECTIONS = {"space", "marks", "integrand", "semigroup", "experiment", "mc", "qge"}


def _schema() -> dict:
    text = resources.files("levysim").joinpath("config_schema.json").read_text()
    return json.loads(text)


def _schema_message(err: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in err.absolute_path)
    if path == "space.r":
        return "r must lie in (1,2]"
    where = path if path else "top level"
    return f"{where}: {err.message}"


def parse_toml(path: str | Path) -> dict:
    p = Path(path)
    try:
        with open(p, "rb") as fp:
            return tomllib.load(fp)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}")
    except tomllib.TOMLDecodeError as exc:
        # tomli error text carries line/column positions
        raise ConfigError(f"{p}: {exc}")


def validate_config(raw: dict) -> None:
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("; ".join(_schema_message(e) for e in errors[:3]))


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _norm_values(values: list) -> list[list[float]]:
    rows = []
    for v in values:
        rows.append([float(v)] if isinstance(v, (int, float)) else [float(x) for x in v])
    width = len(rows[0])
    _require(all(len(r) == width for r in rows), "marks.values rows must share a length")
    return rows


def resolve_config(raw: dict) -> dict:
    """Apply defaults and per-kind coherence checks; returns a plain dict."""
    validate_config(raw)
    cfg = json.loads(json.dumps(raw))  # deep copy, plain types
    kind = cfg["kind"]

    present = _SECTIONS & set(cfg)
    if kind == "qge":
        allowed = {"qge"}
    elif kind in _ITO_KINDS:
        allowed = {"space", "marks", "integrand", "experiment", "mc"}
    else:
        allowed = {"space", "marks", "integrand", "experiment", "mc"}
        if kind in _SEMIGROUP_KINDS:
            allowed.add("semigroup")
    stray = present - allowed
    _require(not stray, f"sections not used by kind '{kind}': {sorted(stray)}")

    cfg.setdefault("seed", 0)
    cfg.setdefault("output", {})
    cfg["output"].setdefault("formats", ["json", "csv"])

    if kind == "qge":
        q = cfg.get("qge")
        _require(q is not None, "kind 'qge' needs a [qge] section")
        _require(q["n"] >= 8 and q["n"] & (q["n"] - 1) == 0, "qge.n must be a power of two")
        q.setdefault("theta0", [])
        _require("noise_modes" in q, "qge.noise_modes is required")
        q.setdefault("noise_amplitude", 0.05)
        q.setdefault("noise_rate", 2.0)
        q.setdefault("noise_symmetric", True)
        q.setdefault("snapshots_every", max(1, q["n_steps"] // 8))
        return cfg

    _require("space" in cfg, f"kind '{kind}' needs a [space] section")
    sp = cfg["space"]
    _require(sp["kind"] == "lq", "experiment configs run on lq spaces")
    for key in ("dim", "q", "r"):
        _require(key in sp, f"space.{key} is required")

    ex = cfg.setdefault("experiment", {})
    _require("T" in ex, "experiment.T is required")
    ex.setdefault("scale", 1.0)
    ex.setdefault("alpha", 0.0)
    if kind == "integral":
        ex.setdefault("p", 1.0)
    else:
        _require("p" in ex, "experiment.p is required")
    if kind == "tail":
        _require("lam" in ex and "R" in ex, "tail needs experiment.lam and experiment.R")
    if kind == "ito-levy":
        ex.setdefault("dt_levels", 5)
        _require(not isinstance(ex["p"], list), "ito-levy takes a single p")

    mc = cfg.setdefault("mc", {})
    _require("n_paths" in mc, "mc.n_paths is required")
    mc.setdefault("n_steps", 256)

    ig = cfg.setdefault("integrand", {})
    dim = sp["dim"]
    if "marks" in cfg:
        rows = _norm_values(cfg["marks"]["values"])
        _require(
            len(rows) == len(cfg["marks"]["weights"]),
            "marks.values and marks.weights must have equal length",
        )
        mark_dim = len(rows[0])
        if "jump" in ig:
            _require(len(ig["jump"]) == dim, "integrand.jump must have space.dim rows")
            _require(
                all(len(r) == mark_dim for r in ig["jump"]),
                "integrand.jump columns must match the mark dimension",
            )
        else:
            _require(dim == mark_dim, "give integrand.jump or match dim to the marks")
    else:
        _require(kind == "levy-maximal", f"kind '{kind}' needs a [marks] section")
    if "drift" in ig:
        _require(len(ig["drift"]) == dim, "integrand.drift must have space.dim entries")
    if "wiener" in ig:
        _require(len(ig["wiener"]) == dim, "integrand.wiener must have space.dim rows")
    if kind == "ito-levy":
        _require("wiener" in ig, "ito-levy needs integrand.wiener")

    if "semigroup" in cfg:
        sg = cfg["semigroup"]
        _require(
            ("rate" in sg) != ("eigs" in sg), "semigroup takes exactly one of rate or eigs"
        )
        if "eigs" in sg:
            _require(len(sg["eigs"]) == dim, "semigroup.eigs must have space.dim entries")
    return cfg


def config_hash(cfg: dict) -> str:
    content = {k: v for k, v in cfg.items() if k not in ("output", "jobs", "title")}
    blob = json.dumps(content, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path: str | Path) -> dict:
    return resolve_config(parse_toml(path))


# ---------------------------------------------------------------- builders


def build_space(cfg: dict) -> NormedSpace:
    sp = cfg["space"]
    return lq_space(sp["dim"], float(sp["q"]), float(sp["r"]))


def build_marks(cfg: dict) -> MarkSpace | None:
    if "marks" not in cfg:
        return None
    rows = _norm_values(cfg["marks"]["values"])
    return finite_marks(rows, [float(w) for w in cfg["marks"]["weights"]])


def build_integrand(cfg: dict) -> Integrand:
    sp = cfg["space"]
    ig = cfg.get("integrand", {})
    dim = sp["dim"]
    jump = None
    if "marks" in cfg:
        mat = np.asarray(ig["jump"], dtype=float) if "jump" in ig else np.eye(dim)
        jump = constant_jump_map(mat)
    drift = constant_drift(np.asarray(ig["drift"], dtype=float)) if "drift" in ig else None
    wiener = (
        constant_wiener_map(np.asarray(ig["wiener"], dtype=float)) if "wiener" in ig else None
    )
    return Integrand(dim=dim, jump=jump, drift=drift, wiener=wiener)


def build_semigroup(cfg: dict) -> Semigroup | None:
    if "semigroup" not in cfg:
        return None
    sg = cfg["semigroup"]
    dim = cfg["space"]["dim"]
    if "rate" in sg:
        return Semigroup(dim=dim, eigs=np.full(dim, -float(sg["rate"])))
    return Semigroup(dim=dim, eigs=-np.asarray(sg["eigs"], dtype=float))


def build_experiment_spec(cfg: dict, p: float, seed: int) -> ExperimentSpec:
    ex = cfg["experiment"]
    try:
        return ExperimentSpec(
            name=cfg["kind"],
            space=build_space(cfg),
            marks=build_marks(cfg),
            integrand=build_integrand(cfg),
            p=float(p),
            r=float(cfg["space"]["r"]),
            T=float(ex["T"]),
            n_paths=int(cfg["mc"]["n_paths"]),
            n_steps=int(cfg["mc"]["n_steps"]),
            seed=seed,
            scale=float(ex["scale"]),
            semigroup=build_semigroup(cfg),
            alpha=float(ex["alpha"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
