import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levysim.rng import stream
from levysim.spaces import lq_space, sobolev_space


def fd_gradient(space, x, p, eps=1e-7):
    g = np.zeros_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = eps
        g[i] = (space.psi_p(x + e, p) - space.psi_p(x - e, p)) / (2 * eps)
    return g


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_norm_matches_numpy(q):
    space = lq_space(5, q, r=min(q, 2.0))
    x = np.array([1.0, -2.0, 0.5, 0.0, 3.0])
    assert space.norm(x) == pytest.approx(np.sum(np.abs(x) ** q) ** (1 / q), rel=1e-14)


@pytest.mark.parametrize("q,p", [(2.0, 2.0), (2.0, 3.0), (1.5, 1.5), (3.0, 4.0), (2.0, 2.5)])
def test_gradient_matches_finite_differences(q, p):
    space = lq_space(6, q, r=min(q, 2.0))
    gen = stream(11, 0)
    for _ in range(20):
        x = gen.standard_normal(6)
        g = space.psi_p_gradient(x, p)
        ref = fd_gradient(space, x, p)
        assert np.max(np.abs(g - ref)) <= 1e-5 * (1 + np.max(np.abs(ref)))


@pytest.mark.parametrize("q,p", [(2.0, 2.0), (2.0, 4.0), (1.5, 1.5), (3.0, 2.0)])
def test_euler_identity(q, p):
    # the gradient of a p-homogeneous function pairs with x to p * value
    space = lq_space(4, q, r=min(q, 2.0))
    gen = stream(13, 0)
    for _ in range(50):
        x = gen.standard_normal(4)
        lhs = space.pair(space.psi_p_gradient(x, p), x)
        assert lhs == pytest.approx(p * space.psi_p(x, p), rel=1e-12, abs=1e-12)


def test_gradient_at_zero():
    space = lq_space(3, 2.0)
    assert np.all(space.psi_p_gradient(np.zeros(3), 2.0) == 0.0)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        lq_space(3, 2.0, r=3.0)
    with pytest.raises(ValueError):
        lq_space(3, 2.0, r=1.0)
    with pytest.raises(ValueError):
        lq_space(3, 1.5, r=1.9)  # for q < 2 smoothness cannot exceed q
    with pytest.raises(ValueError):
        lq_space(3, 0.5)


@given(
    c=st.floats(min_value=0.01, max_value=100),
    xs=st.lists(st.floats(min_value=-10, max_value=10), min_size=4, max_size=4),
)
@settings(max_examples=50, deadline=None)
def test_norm_homogeneity(c, xs):
    space = lq_space(4, 2.0)
    x = np.array(xs)
    assert space.norm(c * x) == pytest.approx(c * space.norm(x), rel=1e-12, abs=1e-12)


@given(
    xs=st.lists(st.floats(min_value=-10, max_value=10), min_size=4, max_size=4),
    ys=st.lists(st.floats(min_value=-10, max_value=10), min_size=4, max_size=4),
)
@settings(max_examples=50, deadline=None)
def test_triangle_inequality(xs, ys):
    space = lq_space(4, 1.5, r=1.5)
    x, y = np.array(xs), np.array(ys)
    assert space.norm(x + y) <= space.norm(x) + space.norm(y) + 1e-12


def test_holder_probe_bounded_for_quadratic():
    # p = r = 2: the gradient is 2x, so the probe ratio is exactly 2
    space = lq_space(4, 2.0)
    c = space.holder_constant_probe(2.0, 2.0, 200, seed=5)
    assert c == pytest.approx(2.0, rel=1e-10)


def test_holder_probe_p4():
    space = lq_space(3, 2.0)
    c1 = space.holder_constant_probe(4.0, 2.0, 300, seed=5)
    assert math.isfinite(c1) and c1 > 0


def test_type_constant_probe_scalar_r2():
    # scalar, r = 2: orthogonality of martingale increments gives ratio 1
    space = lq_space(1, 2.0)
    c = space.type_constant_probe(2.0, 4, 8, seed=3)
    assert c == pytest.approx(1.0, abs=0.1)


def test_gamma_norm_hits_hilbert_schmidt():
    # q = 2 collapses to the Frobenius norm exactly
    space = lq_space(3, 2.0)
    g = np.array([[1.0, 0.5], [0.0, 2.0], [0.3, 0.0]])
    hs = math.sqrt(np.sum(g * g))
    assert space.gamma_norm(g) == pytest.approx(hs, rel=1e-12)


def test_gamma_norm_monte_carlo_path():
    # in one dimension every lq norm is |.|, so the exact value is known
    space = lq_space(1, 4.0, r=2.0)
    g = np.array([[0.6, 0.8]])
    est = space.gamma_norm(g, 200000, seed=9)
    assert est == pytest.approx(1.0, rel=0.02)


def test_sobolev_single_mode_multiplier():
    # a pure Fourier mode scales by (1 + |k|^2)^(s/2) in the Bessel norm
    n, s = 8, 0.5
    space = sobolev_space(n, s, q=2.0)
    x = np.arange(n) * (2 * math.pi / n)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    k = (2, 1)
    field = np.cos(k[0] * xx + k[1] * yy).ravel()
    base = sobolev_space(n, 0.0, q=2.0)
    expected = (1 + k[0] ** 2 + k[1] ** 2) ** (s / 2) * base.norm(field)
    assert space.norm(field) == pytest.approx(expected, rel=1e-10)
