"""Hot Monte Carlo loops: per-path jump sums, running suprema, OU recursions.

Each kernel is compiled with numba when available. Setting the environment
variable LEVYSIM_DISABLE_NUMBA=1 (or running without numba installed) selects
the identical pure-Python bodies instead; results are the same either way,
only slower. benchmarks/bench_kernels.py compares the two paths.

All kernels consume flattened ragged batches: paths are concatenated along
axis 0 and delimited by an offsets array of length n_paths + 1.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    if os.environ.get("LEVYSIM_DISABLE_NUMBA") == "1":
        raise ImportError("numba disabled by LEVYSIM_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True, nogil=True)
def _lq_pow(x, q, p):
    """|x|_q^p for a 1D coordinate vector."""
    if q == 2.0:
        s = 0.0
        for i in range(x.shape[0]):
            s += x[i] * x[i]
        return s ** (0.5 * p)
    s = 0.0
    for i in range(x.shape[0]):
        s += abs(x[i]) ** q
    return s ** (p / q)


@njit(cache=True, nogil=True)
def comp_sup_pow(offsets, times, marks, comp, T, q, p):
    """sup_t |u_t|_q^p per path for u_t = sum_{tau<=t} mark - t*comp.

    Paths are piecewise linear in t, so the supremum of the (convex) norm is
    attained at segment endpoints: jump times (left and right limits) and T.
    """
    n_paths = offsets.shape[0] - 1
    dim = comp.shape[0]
    out = np.zeros(n_paths)
    state = np.zeros(dim)
    shifted = np.zeros(dim)
    for ip in range(n_paths):
        for d in range(dim):
            state[d] = 0.0
        best = 0.0
        for m in range(offsets[ip], offsets[ip + 1]):
            t = times[m]
            for d in range(dim):
                shifted[d] = state[d] - t * comp[d]
            v = _lq_pow(shifted, q, p)
            if v > best:
                best = v
            for d in range(dim):
                state[d] += marks[m, d]
                shifted[d] = state[d] - t * comp[d]
            v = _lq_pow(shifted, q, p)
            if v > best:
                best = v
        for d in range(dim):
            shifted[d] = state[d] - T * comp[d]
        v = _lq_pow(shifted, q, p)
        if v > best:
            best = v
        out[ip] = best
    return out


@njit(cache=True, nogil=True)
def jump_conv_sup_pow(offsets, times, marks, comp, eigs, n_nodes, T, q, p):
    """sup_t |X_t|_q^p for the jump convolution with a diagonal semigroup.

    X_t = sum_{tau<=t} exp((t-tau) a) mark - int_0^t exp((t-s) a) comp ds,
    advanced exactly between evaluation points (uniform nodes plus all jump
    times). Also returns the largest advance-segment increment of |X|_q as a
    sup-resolution diagnostic.
    """
    n_paths = offsets.shape[0] - 1
    dim = comp.shape[0]
    out = np.zeros(n_paths)
    res = np.zeros(n_paths)
    state = np.zeros(dim)
    dt = T / n_nodes
    for ip in range(n_paths):
        for d in range(dim):
            state[d] = 0.0
        best = 0.0
        worst_var = 0.0
        t_cur = 0.0
        prev_norm = 0.0
        m = offsets[ip]
        m_end = offsets[ip + 1]
        for node in range(1, n_nodes + 1):
            t_node = dt * node
            if node == n_nodes:
                t_node = T
            while m < m_end and times[m] <= t_node:
                dtau = times[m] - t_cur
                if dtau > 0.0:
                    for d in range(dim):
                        ea = math.exp(eigs[d] * dtau)
                        if eigs[d] != 0.0:
                            ci = math.expm1(eigs[d] * dtau) / eigs[d]
                        else:
                            ci = dtau
                        state[d] = ea * state[d] - ci * comp[d]
                    t_cur = times[m]
                v = _lq_pow(state, q, 1.0)
                if abs(v - prev_norm) > worst_var:
                    worst_var = abs(v - prev_norm)
                if v**p > best:
                    best = v**p
                for d in range(dim):
                    state[d] += marks[m, d]
                v = _lq_pow(state, q, 1.0)
                if v**p > best:
                    best = v**p
                prev_norm = v
                m += 1
            if t_node > t_cur:
                dseg = t_node - t_cur
                for d in range(dim):
                    ea = math.exp(eigs[d] * dseg)
                    if eigs[d] != 0.0:
                        ci = math.expm1(eigs[d] * dseg) / eigs[d]
                    else:
                        ci = dseg
                    state[d] = ea * state[d] - ci * comp[d]
                t_cur = t_node
                v = _lq_pow(state, q, 1.0)
                if abs(v - prev_norm) > worst_var:
                    worst_var = abs(v - prev_norm)
                if v**p > best:
                    best = v**p
                prev_norm = v
        out[ip] = best
        res[ip] = worst_var
    return out, res


@njit(cache=True, nogil=True)
def levy_conv_sup_pow(dw, gmat, eigs, dt, offsets, times, marks, comp, q, p):
    """sup_t |X_t|_q^p for the Wiener-plus-jump convolution, diagonal semigroup.

    Wiener increments enter by the left-point rule (added at the left node,
    then decayed across the step); jumps enter at their exact times. dw has
    shape (n_paths, n_steps, k) and the horizon is n_steps * dt.
    """
    n_paths = dw.shape[0]
    n_steps = dw.shape[1]
    k = dw.shape[2]
    dim = comp.shape[0]
    out = np.zeros(n_paths)
    state = np.zeros(dim)
    for ip in range(n_paths):
        for d in range(dim):
            state[d] = 0.0
        best = 0.0
        m = offsets[ip]
        m_end = offsets[ip + 1]
        for j in range(n_steps):
            t_left = j * dt
            t_right = (j + 1) * dt
            for d in range(dim):
                acc = 0.0
                for c in range(k):
                    acc += gmat[d, c] * dw[ip, j, c]
                state[d] += acc
            t_cur = t_left
            while m < m_end and times[m] <= t_right:
                dtau = times[m] - t_cur
                if dtau > 0.0:
                    for d in range(dim):
                        ea = math.exp(eigs[d] * dtau)
                        if eigs[d] != 0.0:
                            ci = math.expm1(eigs[d] * dtau) / eigs[d]
                        else:
                            ci = dtau
                        state[d] = ea * state[d] - ci * comp[d]
                    t_cur = times[m]
                v = _lq_pow(state, q, p)
                if v > best:
                    best = v
                for d in range(dim):
                    state[d] += marks[m, d]
                v = _lq_pow(state, q, p)
                if v > best:
                    best = v
                m += 1
            if t_right > t_cur:
                dseg = t_right - t_cur
                for d in range(dim):
                    ea = math.exp(eigs[d] * dseg)
                    if eigs[d] != 0.0:
                        ci = math.expm1(eigs[d] * dseg) / eigs[d]
                    else:
                        ci = dseg
                    state[d] = ea * state[d] - ci * comp[d]
            v = _lq_pow(state, q, p)
            if v > best:
                best = v
        out[ip] = best
    return out
