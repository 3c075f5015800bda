"""Estimators and report serialization.

Means use numpy's pairwise summation in replicate order, so every statistic
is independent of how the replicate blocks were scheduled. JSON output sorts
keys and never embeds timestamps; those live in the run manifest only.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def mean_se(values: np.ndarray) -> tuple[float, float]:
    x = np.asarray(values, dtype=np.float64)
    n = x.shape[0]
    m = float(np.mean(x))
    if n < 2:
        return m, float("inf")
    var = float(np.var(x, ddof=1))
    return m, math.sqrt(var / n)


def paired_ratio_se(num: np.ndarray, den: np.ndarray) -> tuple[float, float]:
    """Delta-method SE of mean(num)/mean(den) for paired samples."""
    x = np.asarray(num, dtype=np.float64)
    y = np.asarray(den, dtype=np.float64)
    n = x.shape[0]
    mx, my = float(np.mean(x)), float(np.mean(y))
    if my == 0.0:
        return float("nan"), float("inf")
    ratio = mx / my
    if n < 2:
        return ratio, float("inf")
    vx = float(np.var(x, ddof=1))
    vy = float(np.var(y, ddof=1))
    cxy = float(np.cov(x, y, ddof=1)[0, 1])
    var = (vx - 2.0 * ratio * cxy + ratio * ratio * vy) / (my * my * n)
    return ratio, math.sqrt(max(var, 0.0))


def ratio_se_independent(
    num: float, num_se: float, den: float, den_se: float
) -> tuple[float, float]:
    """Delta-method SE of a ratio of independent estimates."""
    if den == 0.0:
        return float("nan"), float("inf")
    ratio = num / den
    var = (num_se / den) ** 2 + (ratio * den_se / den) ** 2
    return ratio, math.sqrt(var)


def wilson_upper(k: int, n: int, z: float = 3.0) -> float:
    """Upper end of the Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 1.0
    phat = k / n
    denom = 1.0 + z * z / n
    centre = phat + z * z / (2.0 * n)
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n))
    return min(1.0, (centre + half) / denom)


def chunk_spread(num: np.ndarray, den: np.ndarray, n_chunks: int = 10) -> dict:
    """Min/max of the ratio over contiguous replicate chunks (seed spread)."""
    x = np.asarray(num, dtype=np.float64)
    y = np.asarray(den, dtype=np.float64)
    n = x.shape[0]
    if n < n_chunks:
        return {"min": float("nan"), "max": float("nan"), "n_chunks": 0}
    edges = np.linspace(0, n, n_chunks + 1, dtype=int)
    ratios = []
    for a, b in zip(edges[:-1], edges[1:]):
        dm = float(np.mean(y[a:b]))
        if dm != 0.0:
            ratios.append(float(np.mean(x[a:b])) / dm)
    if not ratios:
        return {"min": float("nan"), "max": float("nan"), "n_chunks": 0}
    return {"min": min(ratios), "max": max(ratios), "n_chunks": len(ratios)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return repr(obj)
    return obj


def write_json(path: str | Path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fp:
        json.dump(_jsonable(obj), fp, indent=2, sort_keys=True)
        fp.write("\n")


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fp:
        w = csv.writer(fp)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
