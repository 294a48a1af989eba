import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from heisconvex import domains as dm
from heisconvex import gallery as G
from heisconvex import monge as M
from heisconvex.fields import ScalarField, interior_samples
from heisconvex.heis_core import Point

x, y, t = sp.symbols("x y t", real=True)


def X(f):
    return sp.diff(f, x) + 2 * y * sp.diff(f, t)


def Y(f):
    return sp.diff(f, y) - 2 * x * sp.diff(f, t)


def _s_ma_symbolic(expr):
    sym = (X(Y(expr)) + Y(X(expr))) / 2
    return X(X(expr)) * Y(Y(expr)) - sym**2 + 12 * sp.diff(expr, t) ** 2


def _field(expr) -> ScalarField:
    f = sp.lambdify((x, y, t), expr, "numpy")
    return ScalarField(lambda p: f(p[..., 0], p[..., 1], p[..., 2]) + 0 * p[..., 0], 1, str(expr))


def test_s_ma_closed_forms():
    pts = np.random.default_rng(3).uniform(-1, 1, (50, 3))
    np.testing.assert_allclose(M.s_ma_arr(G.heis_t(), pts), 12.0, atol=1e-9)
    np.testing.assert_allclose(M.s_ma_arr(G.quadratic(), pts), 4.0, atol=1e-9)
    assert M.s_ma_pointwise(G.heis_t(), Point.origin(1)) == pytest.approx(12.0, abs=1e-5)


def test_s_ma_matches_symbolic_operator():
    expr = x**2 * y**2 + t**2 + x * t + y**4
    want_fn = sp.lambdify((x, y, t), _s_ma_symbolic(expr), "numpy")
    pts = np.random.default_rng(4).uniform(-0.8, 0.8, (100, 3))
    got = M.s_ma_arr(_field(expr), pts, h=1e-3, analytic=False)
    np.testing.assert_allclose(got, want_fn(*pts.T), rtol=1e-4, atol=1e-4)


def test_s_ma_rejects_higher_dimensions():
    with pytest.raises(M.MongeError):
        M.s_ma_arr(G.heis_t(2), np.zeros((1, 5)))


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=300))
def test_tree_sum_matches_fsum(vals):
    assert M.tree_sum(np.array(vals)) == pytest.approx(math.fsum(vals), rel=1e-9, abs=1e-6)


def test_box_quadrature_of_constant_operator():
    box = dm.ConvexDomain(lambda p: np.all(np.abs(p) < 0.5, axis=-1), -0.5 * np.ones(3), 0.5 * np.ones(3), "unit box")
    rep = M.s_ma_integral_experiment(G.heis_t(), box, levels=(0.1, 0.05), layer=0.0)
    assert rep.value == pytest.approx(12.0, rel=1e-9)
    assert rep.cauchy_gap == pytest.approx(0.0, abs=1e-9)


def test_graded_chart_reproduces_lens_volume():
    a, b, q = 0.6, 2.0, 1.0
    dom = G.lens_domain(a, b, q)
    half, _ = integrate.quad(lambda m: (m**a - q * a / 2 * m * m) ** (1 / b), 0, 1, limit=200)
    vol = 2 * math.pi * half
    rep = M.s_ma_integral_experiment(G.heis_t(), dom, levels=(1 / 16, 1 / 32), chart="graded")
    assert rep.value == pytest.approx(12 * vol, rel=2e-3)


def test_graded_chart_needs_lens():
    with pytest.raises(M.MongeError):
        M.s_ma_integral_experiment(G.heis_t(), dm.koranyi_ball(1.0), chart="graded")


def test_lens_hessian_split_matches_plain_hessian():
    u = G.lens_field(0.6, 2.0, 1.0)
    pts = np.random.default_rng(5).uniform([0.2, -0.2, -0.2], [1.8, 0.2, 0.2], (40, 3))
    H1, T1 = u.hess_fn(pts)
    H2, T2 = u.meta["hess_xm"](pts[:, 0], np.minimum(pts[:, 0], 2 - pts[:, 0]), pts[:, 1], pts[:, 2])
    np.testing.assert_allclose(H1, H2)
    np.testing.assert_allclose(T1, T2)


# ----------------------------------------------------------------- gallery


def test_gallery_names_and_defaults():
    assert set(G.names()) == set(G.DEFAULTS)
    for name in G.names():
        e = G.builtin(name)
        assert e.params == G.DEFAULTS[name]
        assert e.validation["domain_convex"]


def test_sharpness_exponent():
    assert G.sharpness_alpha(0.5, 2.0) == pytest.approx(39 / 56)
    assert G.builtin("sharpness").extras["alpha"] == pytest.approx(39 / 56)


@pytest.mark.parametrize(
    "name,params",
    [
        ("cylinder-bump", {"amplitude": 0.5}),
        ("sharpness", {"eps": 1.5}),
        ("prop-ma", {"alpha": 0.9}),
        ("koranyi-cone", {"c_v": 0.0}),
        ("cylinder", {"r": -1.0}),
        ("ball", {"radius": 1.0}),
    ],
)
def test_gallery_rejects_bad_parameters(name, params):
    with pytest.raises(G.GalleryError):
        G.builtin(name, params)


def test_gallery_rejects_unknown_entries_and_fields():
    with pytest.raises(G.GalleryError):
        G.builtin("torus")
    with pytest.raises(G.GalleryError):
        G.builtin("cylinder").field("nope")


def test_bump_field_derivatives():
    u = G.bump_field()
    pts = interior_samples(dm.cylinder(1.0, 1.0), 100, 0)
    h = 1e-6
    fd = []
    for v in (np.array([1.0, 0, 0]), np.array([0, 1.0, 0])):
        Z = v[None, :] + np.stack([0 * pts[:, 0], 0 * pts[:, 0], 2 * pts[:, 1] * v[0] - 2 * pts[:, 0] * v[1]], -1)
        fd.append((u(pts + h * Z) - u(pts - h * Z)) / (2 * h))
    np.testing.assert_allclose(u.grad_fn(pts), np.stack(fd, -1), atol=1e-6)
