"""Poisson point processes on [0, T] x Z and cylindrical Wiener increments.

Mark spaces are either finite atom sets (exact nu-integrals) or finitely many
disjoint shells of finite mass with user samplers; a sigma-finite space with
infinite total mass is represented by its first n_max shells and the reported
truncation tail mass. Jump times use the conditional-uniform property: counts
are Poisson(mass * T) per shell and times i.i.d. uniform on (0, T], which is
exact, order-independent and trivially parallel per shell.

Batch sampling keys one counter-based stream per (seed, shell, block) with a
fixed block of 1024 replicates, so results never depend on how blocks are
distributed over workers. Single-path sampling keys (seed, shell, replicate).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .rng import BLOCK, block_starts, stream

_JUMP_TAG = 0x4A
_JUMP_BATCH_TAG = 0x4B
_WIENER_TAG = 0x57
_WIENER_BATCH_TAG = 0x58


@dataclass(frozen=True)
class Atom:
    value: np.ndarray
    weight: float


@dataclass(frozen=True)
class Shell:
    """One finite-mass region of a layered mark space."""

    region: int
    weight: float
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    mean: np.ndarray | None = None  # integral of the mark over the shell against nu


@dataclass(frozen=True)
class MarkSpace:
    kind: str  # "finite" | "layered"
    mark_dim: int
    atoms: tuple[Atom, ...] = ()
    shells: tuple[Shell, ...] = ()
    tail_mass: float = 0.0  # nu-mass beyond the last shell, reported not sampled

    def __post_init__(self):
        if self.kind not in ("finite", "layered"):
            raise ValueError(f"unknown mark space kind {self.kind!r}")
        items = self.atoms if self.kind == "finite" else self.shells
        if not items:
            raise ValueError("mark space has no atoms or shells")
        for it in items:
            if it.weight < 0.0:
                raise ValueError("mark weights must be nonnegative")

    @property
    def total_mass(self) -> float:
        if self.kind == "finite":
            return float(sum(a.weight for a in self.atoms))
        return float(sum(s.weight for s in self.shells))

    def atom_values(self) -> np.ndarray:
        return np.stack([a.value for a in self.atoms])

    def atom_weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms])

    def mean_mark(self) -> np.ndarray:
        """integral of z nu(dz) over the represented part of the space."""
        if self.kind == "finite":
            return self.atom_weights() @ self.atom_values()
        out = np.zeros(self.mark_dim)
        for s in self.shells:
            if s.mean is None:
                raise ValueError(
                    f"shell {s.region} has no mean; supply one or use a finite space"
                )
            out += np.asarray(s.mean, dtype=float)
        return out


def finite_marks(values: Sequence[Sequence[float]], weights: Sequence[float]) -> MarkSpace:
    vals = [np.atleast_1d(np.asarray(v, dtype=float)) for v in values]
    dims = {v.shape[0] for v in vals}
    if len(dims) != 1:
        raise ValueError("all atom values must share one dimension")
    atoms = tuple(Atom(v, float(w)) for v, w in zip(vals, weights, strict=True))
    return MarkSpace(kind="finite", mark_dim=vals[0].shape[0], atoms=atoms)


def layered_marks(shells: Sequence[Shell], mark_dim: int, tail_mass: float = 0.0) -> MarkSpace:
    regions = [s.region for s in shells]
    if len(set(regions)) != len(regions):
        raise ValueError("shell region ids must be distinct")
    return MarkSpace(
        kind="layered", mark_dim=mark_dim, shells=tuple(shells), tail_mass=tail_mass
    )


@dataclass(frozen=True)
class JumpPath:
    """One realization: strictly increasing times with marks and shell ids."""

    T: float
    times: np.ndarray
    regions: np.ndarray
    marks: np.ndarray  # (n_events, mark_dim)
    seed: int
    replicate: int

    @property
    def n_events(self) -> int:
        return int(self.times.shape[0])

    def counting_measure(self, t0: float, t1: float, region=None) -> int:
        """Number of events with time in (t0, t1] and mark in the region.

        region is a predicate on (region_id, mark) or None for the whole space.
        """
        if not t0 < t1 <= self.T + 1e-12:
            raise ValueError("need t0 < t1 <= T")
        sel = (self.times > t0) & (self.times <= t1)
        if region is None:
            return int(np.count_nonzero(sel))
        idx = np.nonzero(sel)[0]
        return sum(1 for i in idx if region(int(self.regions[i]), self.marks[i]))

    def restrict(self, max_region: int) -> "JumpPath":
        sel = self.regions <= max_region
        return JumpPath(
            self.T, self.times[sel], self.regions[sel], self.marks[sel],
            self.seed, self.replicate,
        )


@dataclass(frozen=True)
class JumpBatch:
    """n_paths realizations flattened for the kernels (offsets delimit paths)."""

    T: float
    n_paths: int
    offsets: np.ndarray  # int64, length n_paths + 1
    times: np.ndarray
    regions: np.ndarray
    marks: np.ndarray

    def path(self, i: int, seed: int = 0) -> JumpPath:
        lo, hi = self.offsets[i], self.offsets[i + 1]
        return JumpPath(
            self.T, self.times[lo:hi], self.regions[lo:hi], self.marks[lo:hi], seed, i
        )


def _shell_list(marks: MarkSpace) -> list[tuple[int, float]]:
    if marks.kind == "finite":
        return [(0, marks.total_mass)]
    return [(i, s.weight) for i, s in enumerate(marks.shells)]


def _draw_marks(marks: MarkSpace, shell_idx: int, gen: np.random.Generator, n: int):
    if marks.kind == "finite":
        w = marks.atom_weights()
        total = w.sum()
        idx = gen.choice(w.shape[0], size=n, p=w / total)
        return marks.atom_values()[idx], np.zeros(n, dtype=np.int64)
    shell = marks.shells[shell_idx]
    vals = np.atleast_2d(np.asarray(shell.sampler(gen, n), dtype=float))
    if vals.shape != (n, marks.mark_dim):
        raise ValueError(f"shell {shell.region} sampler returned shape {vals.shape}")
    return vals, np.full(n, shell.region, dtype=np.int64)


def sample_jump_path(marks: MarkSpace, T: float, seed: int, replicate: int = 0) -> JumpPath:
    """One path; streams are keyed by (seed, shell, replicate)."""
    if T <= 0.0:
        raise ValueError("horizon must be positive")
    parts_t, parts_r, parts_m = [], [], []
    for shell_idx, mass in _shell_list(marks):
        gen = stream(seed, _JUMP_TAG, shell_idx, replicate)
        count = int(gen.poisson(mass * T)) if mass > 0.0 else 0
        if count == 0:
            continue
        t = (1.0 - gen.random(count)) * T  # uniform on (0, T]
        vals, regions = _draw_marks(marks, shell_idx, gen, count)
        parts_t.append(t)
        parts_r.append(regions)
        parts_m.append(vals)
    if not parts_t:
        return JumpPath(
            T,
            np.empty(0),
            np.empty(0, dtype=np.int64),
            np.empty((0, marks.mark_dim)),
            seed,
            replicate,
        )
    times = np.concatenate(parts_t)
    order = np.argsort(times, kind="stable")  # ties (probability zero) keep draw order
    return JumpPath(
        T,
        times[order],
        np.concatenate(parts_r)[order],
        np.concatenate(parts_m)[order],
        seed,
        replicate,
    )


def sample_jump_batch(marks: MarkSpace, T: float, seed: int, n_paths: int) -> JumpBatch:
    """n_paths independent paths; streams keyed by (seed, shell, block)."""
    if T <= 0.0:
        raise ValueError("horizon must be positive")
    shells = _shell_list(marks)
    all_pid, all_t, all_r, all_m = [], [], [], []
    for shell_idx, mass in shells:
        for block_idx, (lo, hi) in enumerate(block_starts(n_paths)):
            gen = stream(seed, _JUMP_BATCH_TAG, shell_idx, block_idx)
            # always consume a full block so path i is the same in any batch
            counts = gen.poisson(mass * T, BLOCK) if mass > 0.0 else np.zeros(BLOCK, np.int64)
            total = int(counts.sum())
            if total == 0:
                continue
            t = (1.0 - gen.random(total)) * T
            vals, regions = _draw_marks(marks, shell_idx, gen, total)
            pid = np.repeat(np.arange(lo, lo + BLOCK, dtype=np.int64), counts)
            if hi - lo < BLOCK:
                keep = pid < n_paths
                pid, t = pid[keep], t[keep]
                regions, vals = regions[keep], vals[keep]
                if pid.size == 0:
                    continue
            all_pid.append(pid)
            all_t.append(t)
            all_r.append(regions)
            all_m.append(vals)
    if not all_pid:
        offsets = np.zeros(n_paths + 1, dtype=np.int64)
        return JumpBatch(
            T, n_paths, offsets, np.empty(0), np.empty(0, np.int64),
            np.empty((0, marks.mark_dim)),
        )
    pid = np.concatenate(all_pid)
    times = np.concatenate(all_t)
    regions = np.concatenate(all_r)
    vals = np.concatenate(all_m)
    order = np.lexsort((times, pid))
    pid = pid[order]
    counts_per_path = np.bincount(pid, minlength=n_paths)
    offsets = np.zeros(n_paths + 1, dtype=np.int64)
    np.cumsum(counts_per_path, out=offsets[1:])
    return JumpBatch(T, n_paths, offsets, times[order], regions[order], vals[order])


@dataclass(frozen=True)
class WienerPath:
    """Increments of a k-dimensional Wiener process on a uniform grid."""

    T: float
    n_steps: int
    k: int
    increments: np.ndarray  # (n_steps, k), N(0, dt) entries
    seed: int
    replicate: int

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_steps + 1)

    def values(self) -> np.ndarray:
        """W at the grid nodes, starting from 0."""
        w = np.zeros((self.n_steps + 1, self.k))
        np.cumsum(self.increments, axis=0, out=w[1:])
        return w


def sample_wiener(T: float, n_steps: int, k: int, seed: int, replicate: int = 0) -> WienerPath:
    if n_steps < 1 or k < 1:
        raise ValueError("need n_steps >= 1 and k >= 1")
    gen = stream(seed, _WIENER_TAG, replicate)
    dt = T / n_steps
    inc = gen.standard_normal((n_steps, k)) * np.sqrt(dt)
    return WienerPath(T, n_steps, k, inc, seed, replicate)


def sample_wiener_block(
    T: float, n_steps: int, k: int, seed: int, block_idx: int, n_block: int
) -> np.ndarray:
    """(n_block, n_steps, k) increments for one replicate block."""
    gen = stream(seed, _WIENER_BATCH_TAG, block_idx)
    dt = T / n_steps
    return gen.standard_normal((n_block, n_steps, k)) * np.sqrt(dt)


def batch_block_size() -> int:
    return BLOCK
