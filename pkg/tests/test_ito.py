"""Change-of-variable residuals: pure-jump exactness and diffusion order."""

from __future__ import annotations

import math

import numpy as np
import pytest

from levysim.integrals import (
    Integrand,
    constant_drift,
    constant_jump_map,
    constant_wiener_map,
)
from levysim.ito import (
    gradient_lipschitz_probe,
    interlace,
    ito_residual_jump,
    ito_residual_levy,
    power_norm,
    tail_gauge,
    taylor_remainder,
    validate_gradient,
)
from levysim.poisson import finite_marks, layered_marks, sample_jump_path, sample_wiener
from levysim.spaces import lq_space


@pytest.fixture
def marks3():
    return finite_marks(
        [[1.0, 0.0, 0.0], [0.0, -1.0, 0.5], [-0.5, 0.5, 0.0]], [2.0, 1.0, 1.5]
    )


@pytest.fixture
def symmetric_marks():
    vals = [[1.0, 0.0], [-1.0, 0.0], [0.0, 0.5], [0.0, -0.5]]
    return finite_marks(vals, [1.5, 1.5, 2.0, 2.0])


@pytest.mark.parametrize("q,p", [(2.0, 2.0), (2.0, 3.0), (2.0, 4.0), (3.0, 2.5)])
def test_power_norm_gradient_matches_fd(q, p):
    space = lq_space(4, q, r=2.0)
    phi = power_norm(space, p)
    gen = np.random.default_rng(3)
    for _ in range(5):
        x = gen.normal(size=4) + 0.5
        assert validate_gradient(phi, x, seed=1) < 1e-6


def test_tail_gauge_gradient_and_hessian():
    phi = tail_gauge(0.3)
    gen = np.random.default_rng(4)
    x = gen.normal(size=3)
    assert validate_gradient(phi, x) < 1e-7
    # hess agrees with a central difference of the directional gradient
    h = np.array([0.2, -0.4, 1.0])
    k = np.array([1.0, 0.3, -0.2])
    eps = 1e-6
    fd = (phi.grad(x + eps * k, h) - phi.grad(x - eps * k, h)) / (2.0 * eps)
    assert phi.hess(x, h, k) == pytest.approx(fd, rel=1e-6)


def test_power_norm_euler_identity():
    space = lq_space(3, 2.0)
    for p in (2.0, 3.0, 4.0):
        phi = power_norm(space, p)
        x = np.array([0.4, -1.2, 0.8])
        assert phi.grad(x, x) == pytest.approx(p * phi.value(x), rel=1e-12)


def test_power_norm_hess_only_for_hilbert_norm():
    assert power_norm(lq_space(3, 2.0), 4.0).hess is not None
    assert power_norm(lq_space(3, 3.0, r=2.0), 4.0).hess is None


def test_taylor_remainder_consistency():
    phi = power_norm(lq_space(2, 2.0), 4.0)
    out = taylor_remainder(phi, np.array([1.0, 0.5]), np.array([-0.3, 2.0]))
    assert out["mismatch"] < 1e-12
    assert out["direct"] >= 0.0  # |x|^4 is convex


def test_interlace_terminal_identity(marks3):
    integrand = Integrand(
        dim=3,
        drift=constant_drift(np.array([0.25, -0.1, 0.4])),
        jump=constant_jump_map(np.eye(3)),
    )
    path = sample_jump_path(marks3, 2.0, seed=6)
    proc = interlace(np.array([1.0, 0.0, -1.0]), integrand, path, marks3)
    comp = integrand.compensator(np.zeros(1), marks3)[0]
    want = (
        np.array([1.0, 0.0, -1.0])
        + 2.0 * (np.array([0.25, -0.1, 0.4]) - comp)
        + proc.small_incs.sum(axis=0)
    )
    np.testing.assert_allclose(proc.terminal(), want, rtol=1e-12, atol=1e-14)


def test_interlace_rejects_overlapping_jump_fields(marks3):
    integrand = Integrand(
        dim=3,
        jump=constant_jump_map(np.eye(3)),
        big_jump=constant_jump_map(2.0 * np.eye(3)),
    )
    path = sample_jump_path(marks3, 2.0, seed=1)
    assert path.n_events > 0
    with pytest.raises(ValueError, match="disjoint"):
        interlace(np.zeros(3), integrand, path, marks3)


def test_jump_residual_vanishes_polynomial(marks3):
    integrand = Integrand(
        dim=3,
        drift=constant_drift(np.array([0.3, -0.2, 0.1])),
        jump=constant_jump_map(np.eye(3)),
    )
    space = lq_space(3, 2.0)
    for p in (2.0, 4.0):
        phi = power_norm(space, p)
        for rep in range(20):
            path = sample_jump_path(marks3, 1.0, seed=42, replicate=rep)
            proc = interlace(np.array([0.5, 0.5, 0.5]), integrand, path, marks3)
            out = ito_residual_jump(phi, proc, integrand, marks3)
            assert abs(out["residual"]) <= 1e-12 * (1.0 + abs(out["lhs"]))


def test_jump_residual_vanishes_odd_power_piecewise_constant(symmetric_marks):
    # symmetric atoms cancel the compensator, so cells are flat and the
    # quadrature is exact for the non-polynomial gauge |x|^3 as well
    integrand = Integrand(dim=2, jump=constant_jump_map(np.eye(2)))
    phi = power_norm(lq_space(2, 2.0), 3.0)
    for rep in range(20):
        path = sample_jump_path(symmetric_marks, 1.0, seed=43, replicate=rep)
        proc = interlace(np.array([0.8, -0.6]), integrand, path, symmetric_marks)
        assert np.all(proc.slope == 0.0)
        out = ito_residual_jump(phi, proc, integrand, symmetric_marks)
        assert abs(out["residual"]) <= 1e-12 * (1.0 + abs(out["lhs"]))


def test_jump_residual_rejects_layered_marks():
    from levysim.poisson import Shell

    layered = layered_marks(
        [Shell(region=0, weight=0.5, sampler=lambda gen, n: np.ones((n, 1)))],
        mark_dim=1,
    )
    integrand = Integrand(
        dim=1,
        jump=constant_jump_map(np.eye(1)),
        nu_jump=lambda t: np.full((np.atleast_1d(t).shape[0], 1), 0.5),
    )
    path = sample_jump_path(layered, 1.0, seed=0)
    proc = interlace(np.zeros(1), integrand, path, layered)
    phi = power_norm(lq_space(1, 2.0), 2.0)
    with pytest.raises(ValueError, match="finite"):
        ito_residual_jump(phi, proc, integrand, layered)


def _levy_rms(n_steps: int, n_paths: int, marks) -> float:
    integrand = Integrand(
        dim=2,
        drift=constant_drift(np.array([0.2, -0.1])),
        jump=constant_jump_map(np.eye(2)),
        wiener=constant_wiener_map(np.array([[0.8, 0.0], [0.3, 0.5]])),
    )
    phi = power_norm(lq_space(2, 2.0), 2.0)
    acc = 0.0
    for rep in range(n_paths):
        w = sample_wiener(1.0, n_steps, 2, seed=77, replicate=rep)
        j = sample_jump_path(marks, 1.0, seed=78, replicate=rep)
        out = ito_residual_levy(phi, np.array([0.1, 0.2]), integrand, w, j, marks)
        acc += out["residual"] ** 2
    return math.sqrt(acc / n_paths)


def test_levy_residual_shrinks_with_half_order(symmetric_marks):
    coarse = _levy_rms(32, 64, symmetric_marks)
    fine = _levy_rms(128, 64, symmetric_marks)
    assert fine < coarse
    # two dyadic refinements: expect about a factor 2 for order-1/2 decay
    assert 1.3 <= coarse / fine <= 3.0


def test_levy_residual_needs_second_derivatives(symmetric_marks):
    integrand = Integrand(dim=2, wiener=constant_wiener_map(np.eye(2)))
    w = sample_wiener(1.0, 8, 2, seed=1)
    phi = power_norm(lq_space(2, 3.0, r=2.0), 2.0)
    with pytest.raises(ValueError, match="second"):
        ito_residual_levy(phi, np.zeros(2), integrand, w)


def test_tail_gauge_lipschitz_probe_tracks_lambda():
    for lam in (0.1, 0.5, 2.0):
        est = gradient_lipschitz_probe(tail_gauge(lam), dim=3, n_pairs=512, seed=5)
        assert est <= lam * (1.0 + 1e-9)
        assert est >= 0.4 * lam
