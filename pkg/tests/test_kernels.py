"""Compiled kernels against plain-Python and numpy reference implementations."""

from __future__ import annotations

import math
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from levysim._kernels import (
    HAS_NUMBA,
    comp_sup_pow,
    jump_conv_sup_pow,
    levy_conv_sup_pow,
)


def make_batch(seed: int, n_paths: int, dim: int, rate: float = 3.0, T: float = 1.0):
    gen = np.random.default_rng(seed)
    counts = gen.poisson(rate * T, n_paths)
    offsets = np.zeros(n_paths + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    total = int(offsets[-1])
    times = np.empty(total)
    for i in range(n_paths):
        sl = slice(offsets[i], offsets[i + 1])
        times[sl] = np.sort(gen.uniform(0.0, T, counts[i]))
    marks = gen.normal(size=(total, dim))
    return offsets, times, marks


def ref_comp_sup(offsets, times, marks, comp, T, q, p):
    """Endpoint scan of the compensated jump sum, straight numpy."""
    n_paths = offsets.shape[0] - 1
    out = np.zeros(n_paths)
    for i in range(n_paths):
        sl = slice(offsets[i], offsets[i + 1])
        ts = times[sl]
        after = np.cumsum(marks[sl], axis=0)
        before = after - marks[sl]
        pts = [np.zeros(comp.shape[0])]
        for j in range(ts.shape[0]):
            pts.append(before[j] - ts[j] * comp)
            pts.append(after[j] - ts[j] * comp)
        last = after[-1] if ts.shape[0] else np.zeros(comp.shape[0])
        pts.append(last - T * comp)
        norms = [np.sum(np.abs(x) ** q) ** (1.0 / q) for x in pts]
        out[i] = max(norms) ** p
    return out


@pytest.mark.parametrize("q,p", [(2.0, 2.0), (2.0, 4.0), (1.5, 1.5), (3.0, 2.5)])
def test_comp_sup_matches_reference(q, p):
    offsets, times, marks = make_batch(11, 40, 3)
    comp = np.array([0.4, -0.2, 0.1])
    got = comp_sup_pow(offsets, times, marks, comp, 1.0, q, p)
    want = ref_comp_sup(offsets, times, marks, comp, 1.0, q, p)
    np.testing.assert_allclose(got, want, rtol=1e-12)


@pytest.mark.skipif(not HAS_NUMBA, reason="needs the compiled path")
def test_compiled_equals_interpreted():
    offsets, times, marks = make_batch(5, 25, 2)
    comp = np.array([0.3, 0.7])
    eigs = np.array([-1.0, -0.25])
    a = comp_sup_pow(offsets, times, marks, comp, 1.0, 2.0, 3.0)
    b = comp_sup_pow.py_func(offsets, times, marks, comp, 1.0, 2.0, 3.0)
    np.testing.assert_array_equal(a, b)
    sa, ra = jump_conv_sup_pow(offsets, times, marks, comp, eigs, 64, 1.0, 2.0, 2.0)
    sb, rb = jump_conv_sup_pow.py_func(offsets, times, marks, comp, eigs, 64, 1.0, 2.0, 2.0)
    np.testing.assert_array_equal(sa, sb)
    np.testing.assert_array_equal(ra, rb)
    gen = np.random.default_rng(2)
    dw = gen.normal(size=(25, 16, 2)) * math.sqrt(1.0 / 16)
    gmat = np.array([[1.0, 0.0], [0.5, 0.8]])
    ca = levy_conv_sup_pow(dw, gmat, eigs, 1.0 / 16, offsets, times, marks, comp, 2.0, 2.0)
    cb = levy_conv_sup_pow.py_func(dw, gmat, eigs, 1.0 / 16, offsets, times, marks, comp, 2.0, 2.0)
    np.testing.assert_array_equal(ca, cb)


def test_jump_conv_deterministic_part_closed_form():
    # no jumps: X_t = -c (1 - e^{a t}) / (-a), increasing in t for a < 0
    offsets = np.zeros(4, dtype=np.int64)
    times = np.empty(0)
    marks = np.empty((0, 1))
    comp = np.array([2.0])
    eigs = np.array([-1.5])
    sup, res = jump_conv_sup_pow(offsets, times, marks, comp, eigs, 256, 1.0, 2.0, 2.0)
    want = (2.0 * (1.0 - math.exp(-1.5)) / 1.5) ** 2
    np.testing.assert_allclose(sup, want, rtol=1e-12)
    assert np.all(res < 0.02)


def test_jump_conv_single_jump_sup_at_event():
    offsets = np.array([0, 1], dtype=np.int64)
    times = np.array([0.3])
    marks = np.array([[2.0]])
    comp = np.array([0.0])
    eigs = np.array([-4.0])
    sup, _ = jump_conv_sup_pow(offsets, times, marks, comp, eigs, 128, 1.0, 2.0, 1.0)
    assert sup[0] == pytest.approx(2.0, rel=1e-12)


def test_levy_conv_pure_wiener_running_max():
    gen = np.random.default_rng(7)
    n_steps = 32
    dw = gen.normal(size=(10, n_steps, 1)) * math.sqrt(1.0 / n_steps)
    gmat = np.eye(1)
    offsets = np.zeros(11, dtype=np.int64)
    got = levy_conv_sup_pow(
        dw, gmat, np.zeros(1), 1.0 / n_steps, offsets,
        np.empty(0), np.empty((0, 1)), np.zeros(1), 2.0, 2.0,
    )
    want = np.max(np.abs(np.cumsum(dw[:, :, 0], axis=1)), axis=1) ** 2
    np.testing.assert_allclose(got, want, rtol=1e-14)


def test_levy_conv_jumps_match_jump_kernel():
    # dw = 0 reduces the mixed kernel to the jump convolution on step nodes
    offsets, times, marks = make_batch(13, 12, 2)
    comp = np.array([0.5, -0.3])
    eigs = np.array([-1.0, -0.5])
    n_steps = 2048
    dw = np.zeros((12, n_steps, 1))
    gmat = np.zeros((2, 1))
    mixed = levy_conv_sup_pow(
        dw, gmat, eigs, 1.0 / n_steps, offsets, times, marks, comp, 2.0, 2.0
    )
    pure, _ = jump_conv_sup_pow(offsets, times, marks, comp, eigs, n_steps, 1.0, 2.0, 2.0)
    np.testing.assert_allclose(mixed, pure, rtol=1e-10)


def test_disable_flag_selects_interpreted_path():
    code = textwrap.dedent(
        """
        import numpy as np
        from levysim import _kernels
        offsets = np.array([0, 2], dtype=np.int64)
        times = np.array([0.25, 0.75])
        marks = np.array([[1.0, -0.5], [0.25, 2.0]])
        comp = np.array([0.3, 0.4])
        out = _kernels.comp_sup_pow(offsets, times, marks, comp, 1.0, 2.0, 3.0)
        print(int(_kernels.HAS_NUMBA), repr(float(out[0])))
        """
    )
    env = dict(os.environ, LEVYSIM_DISABLE_NUMBA="1")
    run = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert run.returncode == 0, run.stderr
    flag, value = run.stdout.split()
    assert flag == "0"
    here = comp_sup_pow(
        np.array([0, 2], dtype=np.int64),
        np.array([0.25, 0.75]),
        np.array([[1.0, -0.5], [0.25, 2.0]]),
        np.array([0.3, 0.4]),
        1.0, 2.0, 3.0,
    )
    assert value == repr(float(here[0]))
