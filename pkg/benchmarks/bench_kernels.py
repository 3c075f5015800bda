"""Compare the compiled kernels against their pure-numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py
The fallback path is what you get with LEVYSIM_DISABLE_NUMBA=1; here both
variants are called directly so one process can time the pair.
"""

import time

import numpy as np

from levysim import _kernels
from levysim.inequalities import ExperimentSpec, _simulate
from levysim.integrals import Integrand, constant_jump_map
from levysim.poisson import finite_marks, sample_jump_batch
from levysim.spaces import lq_space


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_comp_sup_pow(n_paths=20000):
    marks = finite_marks([[0.8, 0.1], [-0.3, 0.5]], [2.0, 1.5])
    batch = sample_jump_batch(marks, 1.0, 0, n_paths)
    xi = batch.marks.copy()
    comp = np.array([0.8 * 2.0 - 0.3 * 1.5, 0.1 * 2.0 + 0.5 * 1.5])
    args = (batch.offsets, batch.times, xi, comp, 1.0, 2.0, 2.0)

    compiled = timeit(_kernels.comp_sup_pow, *args)
    fallback = timeit(_kernels.comp_sup_pow.py_func, *args)
    return "comp_sup_pow", n_paths, compiled, fallback


def bench_jump_conv(n_paths=20000):
    marks = finite_marks([[0.8, 0.1], [-0.3, 0.5]], [2.0, 1.5])
    batch = sample_jump_batch(marks, 1.0, 0, n_paths)
    xi = batch.marks.copy()
    comp = np.array([0.8 * 2.0 - 0.3 * 1.5, 0.1 * 2.0 + 0.5 * 1.5])
    eigs = np.array([-1.0, -0.5])
    args = (batch.offsets, batch.times, xi, comp, eigs, 256, 1.0, 2.0, 2.0)

    compiled = timeit(_kernels.jump_conv_sup_pow, *args)
    fallback = timeit(_kernels.jump_conv_sup_pow.py_func, *args)
    return "jump_conv_sup_pow", n_paths, compiled, fallback


def bench_levy_conv(n_paths=2000, n_steps=256):
    marks = finite_marks([[0.8, 0.1], [-0.3, 0.5]], [2.0, 1.5])
    batch = sample_jump_batch(marks, 1.0, 0, n_paths)
    xi = batch.marks.copy()
    comp = np.array([0.8 * 2.0 - 0.3 * 1.5, 0.1 * 2.0 + 0.5 * 1.5])
    eigs = np.array([-1.0, -0.5])
    gen = np.random.default_rng(0)
    dw = gen.standard_normal((n_paths, n_steps, 2)) * np.sqrt(1.0 / n_steps)
    gmat = 0.5 * np.eye(2)
    args = (
        dw, gmat, eigs, 1.0 / n_steps, batch.offsets, batch.times, xi, comp,
        2.0, 2.0,
    )

    compiled = timeit(_kernels.levy_conv_sup_pow, *args)
    fallback = timeit(_kernels.levy_conv_sup_pow.py_func, *args)
    return "levy_conv_sup_pow", n_paths, compiled, fallback


def bench_end_to_end(n_paths=20000):
    space = lq_space(2, 2.0, 2.0)
    marks = finite_marks([[0.8, 0.1], [-0.3, 0.5]], [2.0, 1.5])
    integrand = Integrand(dim=2, jump=constant_jump_map(np.eye(2)))
    spec = ExperimentSpec(
        name="bench", space=space, marks=marks, integrand=integrand,
        p=2.0, r=2.0, T=1.0, n_paths=n_paths,
    )
    t1 = timeit(lambda: _simulate(spec, 1.0, 0, 2.0, 1), repeat=3)
    t4 = timeit(lambda: _simulate(spec, 1.0, 0, 2.0, 4), repeat=3)
    return "simulate (1 vs 4 jobs)", n_paths, t4, t1


def main():
    print(f"{'kernel':28s} {'paths':>8s} {'compiled':>10s} {'fallback':>10s} {'speedup':>8s}")
    for fn in (bench_comp_sup_pow, bench_jump_conv, bench_levy_conv, bench_end_to_end):
        name, n, fast, slow = fn()
        print(f"{name:28s} {n:8d} {fast*1e3:9.1f}ms {slow*1e3:9.1f}ms {slow/fast:7.1f}x")


if __name__ == "__main__":
    main()
