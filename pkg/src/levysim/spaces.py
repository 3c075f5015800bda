"""Finite-dimensional normed spaces with smooth-power-norm calculus.

A NormedSpace carries an l^q norm (or a spectral Bessel-Sobolev norm on a
periodic grid), a declared smoothness exponent r in (1, 2], the p-th power
psi_p(x) = |x|^p with its analytic gradient, and Monte Carlo probes for the
Hoelder constant of psi_p', the martingale-type constant, and the Gaussian
second-moment norm of a linear factor.

The smoothness exponent is declared, not inferred: for l^q with q >= 2 any
r <= 2 is admissible, for 1 < q < 2 only r <= q. The probes are diagnostics,
not certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import stream

N_PROBE_DIRECTIONS = 512


@dataclass(frozen=True)
class GridSpec:
    """Uniform n-by-n periodic grid on [0, 2*pi)^2."""

    n: int

    @property
    def cell_weight(self) -> float:
        return (2.0 * np.pi / self.n) ** 2


@dataclass(frozen=True)
class NormedSpace:
    """Coordinate realization of a norm together with its smoothness data."""

    dim: int
    kind: str = "lq"  # "lq" | "sobolev"
    q: float = 2.0
    smoothness_r: float = 2.0
    s: float = 0.0  # Bessel smoothness order, sobolev kind only
    grid: GridSpec | None = None
    _multiplier: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.kind not in ("lq", "sobolev"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.q < 1.0:
            raise ValueError("q must be >= 1")
        if not 1.0 < self.smoothness_r <= 2.0:
            raise ValueError("smoothness exponent must lie in (1, 2]")
        if self.kind == "lq" and self.q < 2.0 and self.smoothness_r > self.q:
            raise ValueError("for q < 2 the smoothness exponent cannot exceed q")
        if self.kind == "sobolev":
            if self.grid is None:
                raise ValueError("sobolev norm needs a grid")
            if self.grid.n * self.grid.n != self.dim:
                raise ValueError("dim must equal grid.n ** 2")
            object.__setattr__(self, "_multiplier", _bessel_multiplier(self.grid.n, self.s))

    def norm(self, x: np.ndarray) -> float:
        x = self._check(x)
        if self.kind == "lq":
            return _lq(x, self.q)
        u = self._apply_multiplier(x)
        return float((np.sum(np.abs(u) ** self.q) * self.grid.cell_weight) ** (1.0 / self.q))

    def psi_p(self, x: np.ndarray, p: float) -> float:
        """psi_p(x) = |x|^p."""
        return self.norm(x) ** p

    def psi_p_gradient(self, x: np.ndarray, p: float) -> np.ndarray:
        """Coordinate representer of the Frechet derivative of psi_p at x.

        For l^q: component i is p * |x|_q^(p-q) * |x_i|^(q-1) * sign(x_i);
        the analytic limit at x = 0 is the zero functional for p > 1.
        """
        if p < 1.0:
            raise ValueError("power norm exponents below 1 are not supported")
        if p < self.smoothness_r:
            raise ValueError("p must be at least the smoothness exponent")
        x = self._check(x)
        if self.kind == "lq":
            return _lq_gradient(x, self.q, p)
        u = self._apply_multiplier(x)
        w = self.grid.cell_weight
        nrm = float((np.sum(np.abs(u) ** self.q) * w) ** (1.0 / self.q))
        if nrm == 0.0:
            return np.zeros(self.dim)
        inner = p * nrm ** (p - self.q) * w * np.abs(u) ** (self.q - 1.0) * np.sign(u)
        # the multiplier operator is real symmetric, so it is its own adjoint
        return self._apply_multiplier(inner)

    def pair(self, functional: np.ndarray, h: np.ndarray) -> float:
        """Apply a coordinate-represented functional to a vector."""
        return float(np.dot(functional, h))

    def dual_norm_estimate(self, functional: np.ndarray, rng: np.random.Generator) -> float:
        """Operator norm of a functional, maximized over sampled unit directions.

        Exact for q = 2; for general q a lower bound that the probes use
        consistently on both sides of their ratios.
        """
        best = 0.0
        f = np.asarray(functional, dtype=float)
        fn = float(np.linalg.norm(f))
        if fn > 0.0:
            cand = f / self.norm(f)
            best = abs(self.pair(f, cand))
        dirs = rng.standard_normal((N_PROBE_DIRECTIONS, self.dim))
        for h in dirs:
            nh = self.norm(h)
            if nh == 0.0:
                continue
            best = max(best, abs(self.pair(f, h)) / nh)
        return best

    def holder_constant_probe(self, p: float, r: float, n_samples: int, seed: int) -> float:
        """Empirical sup of |psi_p'(x)-psi_p'(y)| (|x|+|y|)^(r-p) |x-y|^(1-r).

        The operator norm of the difference is estimated over random unit
        directions plus the gradient-difference direction.
        """
        if p < r:
            raise ValueError("the probe requires p >= r")
        if n_samples <= 0:
            raise ValueError("n_samples must be positive")
        gen = stream(seed, 0x48, 0)
        best = 0.0
        for _ in range(n_samples):
            x = gen.standard_normal(self.dim)
            y = gen.standard_normal(self.dim)
            diff = self.norm(x - y)
            if diff == 0.0:
                continue
            gdiff = self.psi_p_gradient(x, p) - self.psi_p_gradient(y, p)
            opn = self.dual_norm_estimate(gdiff, gen)
            ratio = opn * (self.norm(x) + self.norm(y)) ** (r - p) * diff ** (1.0 - r)
            best = max(best, ratio)
        return best

    def type_constant_probe(
        self, r: float, n_martingales: int, n_steps: int, seed: int, n_sim: int = 4096
    ) -> float:
        """Empirical max over random martingale designs of E|M_n|^r / sum E|dM_k|^r.

        Designs use sign-symmetric increments with adapted scales (each step's
        scale depends on the signs drawn strictly before it), so every design
        is a genuine martingale.
        """
        if not 1.0 < r <= 2.0:
            raise ValueError("r must lie in (1, 2]")
        worst = 0.0
        for j in range(n_martingales):
            gen = stream(seed, 0x54, j)
            dirs = gen.standard_normal((n_steps, self.dim))
            dirs /= np.maximum(np.array([self.norm(d) for d in dirs]), 1e-300)[:, None]
            signs = gen.choice(np.array([-1.0, 1.0]), size=(n_sim, n_steps))
            m = np.zeros((n_sim, self.dim))
            den = 0.0
            hist = np.zeros(n_sim)
            for k in range(n_steps):
                scale = 1.0 + 0.5 * np.tanh(hist)
                dm = (signs[:, k] * scale)[:, None] * dirs[k][None, :]
                m += dm
                den += float(np.mean(_space_norm_rows(self, dm) ** r))
                hist += signs[:, k]
            num = float(np.mean(_space_norm_rows(self, m) ** r))
            worst = max(worst, num / den)
        return worst

    def gamma_norm(self, matrix: np.ndarray, n_gaussians: int = 65536, seed: int = 0) -> float:
        """Gaussian second-moment norm (E |g W|^2)^(1/2) of a linear factor."""
        if n_gaussians <= 0:
            raise ValueError("n_gaussians must be positive")
        g = np.asarray(matrix, dtype=float)
        if g.ndim != 2 or g.shape[0] != self.dim:
            raise ValueError("factor must have one row per space dimension")
        if self.kind == "lq" and self.q == 2.0:
            # E |g W|_2^2 collapses to the squared Frobenius norm
            return float(np.sqrt(np.sum(g * g)))
        gen = stream(seed, 0x47, 0)
        z = gen.standard_normal((n_gaussians, g.shape[1]))
        vals = _space_norm_rows(self, z @ g.T) ** 2
        return float(np.mean(vals) ** 0.5)

    def _apply_multiplier(self, x: np.ndarray) -> np.ndarray:
        n = self.grid.n
        xh = np.fft.fft2(x.reshape(n, n))
        return np.real(np.fft.ifft2(xh * self._multiplier)).ravel()

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.dim:
            raise ValueError(f"expected vector of length {self.dim}, got {x.shape[0]}")
        return x


def _lq(x: np.ndarray, q: float) -> float:
    if q == 2.0:
        return float(np.sqrt(np.dot(x, x)))
    return float(np.sum(np.abs(x) ** q) ** (1.0 / q))


def _lq_gradient(x: np.ndarray, q: float, p: float) -> np.ndarray:
    nrm = _lq(x, q)
    if nrm == 0.0:
        return np.zeros_like(x)
    return p * nrm ** (p - q) * np.abs(x) ** (q - 1.0) * np.sign(x)


def _space_norm_rows(space: NormedSpace, rows: np.ndarray) -> np.ndarray:
    rows = np.atleast_2d(rows)
    if space.kind == "lq" and space.q == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", rows, rows))
    if space.kind == "lq":
        return np.sum(np.abs(rows) ** space.q, axis=1) ** (1.0 / space.q)
    return np.array([space.norm(r) for r in rows])


def _bessel_multiplier(n: int, s: float) -> np.ndarray:
    k = np.fft.fftfreq(n, d=1.0 / n)
    k2 = k[:, None] ** 2 + k[None, :] ** 2
    return (1.0 + k2) ** (s / 2.0)


def lq_space(dim: int, q: float = 2.0, r: float = 2.0) -> NormedSpace:
    return NormedSpace(dim=dim, kind="lq", q=q, smoothness_r=r)


def sobolev_space(n: int, s: float, q: float = 4.0, r: float = 2.0) -> NormedSpace:
    return NormedSpace(
        dim=n * n, kind="sobolev", q=q, smoothness_r=r, s=s, grid=GridSpec(n)
    )
