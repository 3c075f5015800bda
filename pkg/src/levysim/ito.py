"""Pathwise change-of-variable checks for jump and jump-diffusion processes.

The residual operators assemble every term of the change-of-variable identity
for phi(X_t) along one realization and return the difference of the two sides.
Between events the state moves linearly (constant drift minus compensator
density per cell), so time integrals of polynomial test functions are computed
exactly with a fixed 32-node Gauss-Legendre rule per cell (exact through
polynomial degree 63).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .integrals import Integrand
from .poisson import JumpPath, MarkSpace, WienerPath
from .spaces import NormedSpace

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


@dataclass
class TestFunction:
    """phi with directional derivatives; hess is None for C^1-only functions."""

    kind: str
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray, np.ndarray], float]  # phi'(x)(h)
    grad_vec: Callable[[np.ndarray], np.ndarray] | None = None
    hess: Callable[[np.ndarray, np.ndarray, np.ndarray], float] | None = None


def power_norm(space: NormedSpace, p: float) -> TestFunction:
    """phi(x) = |x|^p in the space norm; second derivatives only for q = 2."""

    def value(x):
        return space.psi_p(x, p)

    def grad(x, h):
        return float(space.psi_p_gradient(x, p) @ np.asarray(h, dtype=float))

    def grad_vec(x):
        return space.psi_p_gradient(x, p)

    hess = None
    if space.kind == "lq" and space.q == 2.0:

        def hess(x, h, k):
            x = np.asarray(x, dtype=float)
            n = float(np.linalg.norm(x))
            hk = float(np.dot(h, k))
            if n == 0.0:
                return 2.0 * hk if p == 2.0 else 0.0
            xh, xk = float(np.dot(x, h)), float(np.dot(x, k))
            return p * n ** (p - 2.0) * hk + p * (p - 2.0) * n ** (p - 4.0) * xh * xk

    return TestFunction("power_norm", value, grad, grad_vec, hess)


def tail_gauge(lam: float) -> TestFunction:
    """phi(x) = sqrt(1 + lam |x|^2) on a Euclidean space.

    The gradient is lam x / phi(x): bounded by sqrt(lam) and Lipschitz with a
    constant proportional to lam, which is what the exponential tail bound
    needs from its gauge.
    """
    lam = float(lam)

    def value(x):
        x = np.asarray(x, dtype=float)
        return float(np.sqrt(1.0 + lam * np.dot(x, x)))

    def grad_vec(x):
        x = np.asarray(x, dtype=float)
        return lam * x / value(x)

    def grad(x, h):
        return float(grad_vec(x) @ np.asarray(h, dtype=float))

    def hess(x, h, k):
        x = np.asarray(x, dtype=float)
        f = value(x)
        xh, xk = float(np.dot(x, h)), float(np.dot(x, k))
        return lam * float(np.dot(h, k)) / f - lam * lam * xh * xk / f**3

    return TestFunction("tail_gauge", value, grad, grad_vec, hess)


def smooth_user(value, grad, grad_vec=None, hess=None) -> TestFunction:
    return TestFunction("smooth_user", value, grad, grad_vec, hess)


def validate_gradient(phi: TestFunction, x: np.ndarray, seed: int = 0, eps: float = 1e-6) -> float:
    """Max relative error of phi.grad against central differences, 8 directions."""
    x = np.asarray(x, dtype=float)
    gen = np.random.Generator(np.random.Philox(seed))
    worst = 0.0
    for _ in range(8):
        h = gen.standard_normal(x.shape[0])
        h /= np.linalg.norm(h)
        fd = (phi.value(x + eps * h) - phi.value(x - eps * h)) / (2.0 * eps)
        an = phi.grad(x, h)
        scale = max(abs(fd), abs(an), 1e-12)
        worst = max(worst, abs(fd - an) / scale)
    return worst


def taylor_remainder(phi: TestFunction, x: np.ndarray, y: np.ndarray) -> dict:
    """First-order remainder of phi between x and y, two ways.

    line_integral: integral over theta of (phi'(x + theta (y-x)) - phi'(x))(y-x)
    direct:        phi(y) - phi(x) - phi'(x)(y - x)
    The two agree for C^1 functions; their difference is returned as a check.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = y - x
    theta = 0.5 * (_GL_NODES + 1.0)
    w = 0.5 * _GL_WEIGHTS
    base = phi.grad(x, d)
    line = float(sum(wi * (phi.grad(x + ti * d, d) - base) for ti, wi in zip(theta, w)))
    direct = float(phi.value(y) - phi.value(x) - base)
    return {"line_integral": line, "direct": direct, "mismatch": abs(line - direct)}


@dataclass(frozen=True)
class InterlacedProcess:
    """Piecewise-linear skeleton of x0 + drift t - compensator t + jump sums.

    states[k] is the value right after the k-th event (states[0] is at t=0),
    slope is the constant inter-event velocity, times are the event times.
    """

    T: float
    x0: np.ndarray
    slope: np.ndarray
    times: np.ndarray
    small_incs: np.ndarray  # increments from the small-jump field (0 rows if none)
    big_incs: np.ndarray
    states: np.ndarray  # (n_events + 1, dim)

    def left_value(self, k: int) -> np.ndarray:
        """State just before event k."""
        t_prev = 0.0 if k == 0 else self.times[k - 1]
        return self.states[k] + (self.times[k] - t_prev) * self.slope

    def at(self, t: float) -> np.ndarray:
        """Right-continuous value at time t."""
        k = int(np.searchsorted(self.times, t, side="right"))
        t_prev = 0.0 if k == 0 else self.times[k - 1]
        return self.states[k] + (t - t_prev) * self.slope

    def terminal(self) -> np.ndarray:
        return self.at(self.T)


def interlace(
    x0: np.ndarray,
    integrand: Integrand,
    path: JumpPath,
    marks: MarkSpace | None = None,
) -> InterlacedProcess:
    """Build the jump process by adding event increments one at a time.

    Requires a drift and compensator density constant in time; the residual
    checks below depend on the resulting piecewise-linear structure.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    zero_t = np.zeros(1)
    slope = np.zeros(integrand.dim)
    if integrand.drift is not None:
        slope = slope + np.asarray(integrand.drift(zero_t), dtype=float)[0]
    if integrand.jump is not None:
        slope = slope - integrand.compensator(zero_t, marks)[0]

    n = path.n_events
    if integrand.jump is not None and n:
        small = np.asarray(integrand.jump(path.times, path.marks), dtype=float)
    else:
        small = np.zeros((n, integrand.dim))
    if integrand.big_jump is not None and n:
        big = np.asarray(integrand.big_jump(path.times, path.marks), dtype=float)
    else:
        big = np.zeros((n, integrand.dim))
    if np.any(np.any(small != 0.0, axis=1) & np.any(big != 0.0, axis=1)):
        raise ValueError("small and big jump fields must have disjoint mark support")

    states = np.zeros((n + 1, integrand.dim))
    states[0] = x0
    t_prev = 0.0
    for k in range(n):
        left = states[k] + (path.times[k] - t_prev) * slope
        states[k + 1] = left + small[k] + big[k]
        t_prev = path.times[k]
    return InterlacedProcess(path.T, x0, slope, path.times, small, big, states)


def _cell_time_integral(f, t0: float, t1: float) -> float:
    h = t1 - t0
    nodes = t0 + 0.5 * h * (_GL_NODES + 1.0)
    return 0.5 * h * float(sum(w * f(s) for s, w in zip(nodes, _GL_WEIGHTS)))


def _cells(proc: InterlacedProcess):
    """(t0, t1, state_at_t0) triples covering [0, T] between events."""
    edges = np.concatenate(([0.0], proc.times, [proc.T]))
    for k in range(edges.shape[0] - 1):
        if edges[k + 1] > edges[k]:
            yield edges[k], edges[k + 1], proc.states[k]


def ito_residual_jump(
    phi: TestFunction,
    proc: InterlacedProcess,
    integrand: Integrand,
    marks: MarkSpace,
) -> dict:
    """Residual of the C^1 change-of-variable identity for a pure-jump process.

    Terms: drift integral of phi'(X)(a), big-jump telescoping sum, small-jump
    martingale part (event sum minus its compensator), and the nu-compensated
    first-order remainder. Returns every term and the residual
    phi(X_T) - phi(X_0) - (sum of terms).
    """
    if marks.kind != "finite":
        raise ValueError("residual checks need exact nu integrals (finite marks)")
    zero_t = np.zeros(1)
    a = (
        np.asarray(integrand.drift(zero_t), dtype=float)[0]
        if integrand.drift is not None
        else np.zeros(integrand.dim)
    )
    atoms = []
    if integrand.jump is not None:
        for atom in marks.atoms:
            xi = np.asarray(
                integrand.jump(zero_t, atom.value[None, :]), dtype=float
            )[0]
            atoms.append((atom.weight, xi))

    drift_term = 0.0
    comp_term = 0.0
    remainder_term = 0.0
    for t0, t1, s0 in _cells(proc):
        def x_at(s, t0=t0, s0=s0):
            return s0 + (s - t0) * proc.slope

        if np.any(a):
            drift_term += _cell_time_integral(lambda s: phi.grad(x_at(s), a), t0, t1)
        for w, xi in atoms:
            comp_term += w * _cell_time_integral(
                lambda s: phi.value(x_at(s) + xi) - phi.value(x_at(s)), t0, t1
            )
            remainder_term += w * _cell_time_integral(
                lambda s: phi.value(x_at(s) + xi) - phi.value(x_at(s)) - phi.grad(x_at(s), xi),
                t0,
                t1,
            )

    big_term = 0.0
    small_sum = 0.0
    for k in range(proc.times.shape[0]):
        left = proc.left_value(k)
        if np.any(proc.big_incs[k]):
            big_term += phi.value(left + proc.big_incs[k]) - phi.value(left)
        if np.any(proc.small_incs[k]):
            small_sum += phi.value(left + proc.small_incs[k]) - phi.value(left)

    lhs = phi.value(proc.terminal()) - phi.value(proc.x0)
    rhs = drift_term + big_term + (small_sum - comp_term) + remainder_term
    return {
        "lhs": lhs,
        "drift_term": drift_term,
        "big_jump_term": big_term,
        "compensated_jump_term": small_sum - comp_term,
        "remainder_term": remainder_term,
        "residual": lhs - rhs,
    }


def ito_residual_levy(
    phi: TestFunction,
    x0: np.ndarray,
    integrand: Integrand,
    wpath: WienerPath,
    jpath: JumpPath | None = None,
    marks: MarkSpace | None = None,
) -> dict:
    """Residual of the C^2 identity with a Wiener part, on the Wiener grid.

    The Wiener integral and the trace term are evaluated at left endpoints, so
    the residual decays like the square root of the step size rather than
    vanishing; callers check the convergence order across refinements.
    """
    if phi.hess is None:
        raise ValueError("second derivatives required")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    zero_t = np.zeros(1)
    a = (
        np.asarray(integrand.drift(zero_t), dtype=float)[0]
        if integrand.drift is not None
        else np.zeros(integrand.dim)
    )
    comp = (
        integrand.compensator(zero_t, marks)[0]
        if integrand.jump is not None
        else np.zeros(integrand.dim)
    )
    g0 = np.asarray(integrand.wiener(zero_t), dtype=float)[0]
    k_noise = g0.shape[1]

    jt = jpath.times if jpath is not None else np.empty(0)
    grid = np.union1d(wpath.grid, jt)
    if jpath is not None and jpath.n_events:
        incs = np.asarray(integrand.jump(jpath.times, jpath.marks), dtype=float)
        jump_at = {float(t): incs[i] for i, t in enumerate(jpath.times)}
    else:
        jump_at = {}
    dw_at = {float(wpath.grid[j]): wpath.increments[j] for j in range(wpath.n_steps)}

    atoms = []
    if integrand.jump is not None and marks is not None:
        for atom in marks.atoms:
            xi = np.asarray(integrand.jump(zero_t, atom.value[None, :]), dtype=float)[0]
            atoms.append((atom.weight, xi))

    state = x0.copy()
    drift_term = 0.0
    wiener_term = 0.0
    trace_term = 0.0
    comp_term = 0.0
    remainder_term = 0.0
    small_sum = 0.0
    n = grid.shape[0]
    for k in range(1, n):
        t0, t1 = grid[k - 1], grid[k]
        h = t1 - t0
        # left-point terms over [t0, t1)
        drift_term += h * phi.grad(state, a)
        trace_term += 0.5 * h * sum(
            phi.hess(state, g0[:, j], g0[:, j]) for j in range(k_noise)
        )
        for w, xi in atoms:
            comp_term += w * h * (phi.value(state + xi) - phi.value(state))
            remainder_term += w * h * (
                phi.value(state + xi) - phi.value(state) - phi.grad(state, xi)
            )
        dw = dw_at.get(float(t0))
        new = state + h * (a - comp)
        if dw is not None:
            wiener_term += phi.grad(state, g0 @ dw)
            new = new + g0 @ dw
        inc = jump_at.get(float(t1))
        if inc is not None:
            small_sum += phi.value(new + inc) - phi.value(new)
            new = new + inc
        state = new

    lhs = phi.value(state) - phi.value(x0)
    rhs = drift_term + wiener_term + trace_term + (small_sum - comp_term) + remainder_term
    return {
        "lhs": lhs,
        "drift_term": drift_term,
        "wiener_term": wiener_term,
        "trace_term": trace_term,
        "compensated_jump_term": small_sum - comp_term,
        "remainder_term": remainder_term,
        "residual": lhs - rhs,
        "terminal": state,
    }


def gradient_lipschitz_probe(
    phi: TestFunction, dim: int, n_pairs: int = 256, seed: int = 0, spread: float = 4.0
) -> float:
    """Max of |grad phi(x) - grad phi(y)| / |x - y| over sampled pairs."""
    if phi.grad_vec is None:
        raise ValueError("needs a vector gradient")
    gen = np.random.Generator(np.random.Philox(seed))
    worst = 0.0
    for _ in range(n_pairs):
        x = gen.standard_normal(dim) * gen.uniform(0.1, spread)
        y = x + gen.standard_normal(dim) * gen.uniform(1e-3, spread)
        num = float(np.linalg.norm(phi.grad_vec(x) - phi.grad_vec(y)))
        den = float(np.linalg.norm(x - y))
        worst = max(worst, num / den)
    return worst
