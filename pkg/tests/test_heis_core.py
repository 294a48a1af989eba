import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from heisconvex import heis_core as hc
from heisconvex.heis_core import Point

coord = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
point3 = st.tuples(coord, coord, coord).map(np.array)
lam = st.floats(0.1, 5.0)


def _sym_law():
    x, y, t, a, b, s = sp.symbols("x y t a b s", real=True)
    prod = (x + a, y + b, t + s + 2 * (a * y - x * b))
    return (x, y, t, a, b, s), prod


def test_group_law_matches_symbolic_oracle(rng):
    syms, prod = _sym_law()
    f = sp.lambdify(syms, prod, "numpy")
    p, q = rng.normal(size=(2, 50, 3))
    want = np.stack(f(p[:, 0], p[:, 1], p[:, 2], q[:, 0], q[:, 1], q[:, 2]), -1)
    np.testing.assert_allclose(hc.mul_arr(p, q), want, rtol=1e-13, atol=1e-13)


@given(point3, point3, point3)
def test_associative(a, b, c):
    lhs = hc.mul_arr(hc.mul_arr(a, b), c)
    rhs = hc.mul_arr(a, hc.mul_arr(b, c))
    np.testing.assert_allclose(lhs, rhs, atol=1e-11)


@given(point3)
def test_inverse_is_two_sided(a):
    np.testing.assert_allclose(hc.mul_arr(a, hc.inv_arr(a)), 0.0, atol=1e-12)
    np.testing.assert_allclose(hc.mul_arr(hc.inv_arr(a), a), 0.0, atol=1e-12)


@given(point3, point3, lam)
def test_dilation_is_a_homomorphism(a, b, s):
    lhs = hc.dilate_arr(s, hc.mul_arr(a, b))
    rhs = hc.mul_arr(hc.dilate_arr(s, a), hc.dilate_arr(s, b))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-11, atol=1e-10)


@given(point3, lam)
def test_gauge_is_homogeneous(a, s):
    assert hc.gauge_arr(hc.dilate_arr(s, a)) == pytest.approx(s * hc.gauge_arr(a), rel=1e-12, abs=1e-14)


@given(point3, point3, point3)
def test_distance_is_left_invariant(g, a, b):
    d0 = hc.dist_arr(a, b)
    d1 = hc.dist_arr(hc.mul_arr(g, a), hc.mul_arr(g, b))
    assert d1 == pytest.approx(d0, rel=1e-9, abs=1e-9)


def test_metric_axioms_on_thousand_tuples(rng):
    a, b, c = rng.uniform(-2, 2, size=(3, 1000, 3))
    dab, dba = hc.dist_arr(a, b), hc.dist_arr(b, a)
    dac, dcb = hc.dist_arr(a, c), hc.dist_arr(c, b)
    assert np.all(dab > 0)
    np.testing.assert_allclose(dab, dba, rtol=1e-10)
    assert np.all(dab <= (dac + dcb) * (1 + 1e-10))
    assert np.all(hc.dist_arr(a, a) == 0)


def test_horizontal_plane_membership():
    base = np.array([0.3, -0.7, 0.2])
    w = np.array([[1.0, 2.0], [-0.5, 0.1]])
    pts = hc.from_plane_arr(base, w)
    assert np.all(hc.in_plane_arr(base, pts))
    # t = t0 + 2(x y0 - x0 y)
    np.testing.assert_allclose(pts[:, 2], 0.2 + 2 * (w[:, 0] * -0.7 - 0.3 * w[:, 1]))
    off = pts.copy()
    off[:, 2] += 0.1
    assert not np.any(hc.in_plane_arr(base, off))


def test_point_validation_and_scalar_api():
    p = Point.from_array(np.array([1.0, 0.0, 0.0]))
    q = Point.from_array(np.array([0.0, 1.0, 0.0]))
    assert hc.group_mul(p, q).as_array()[-1] == pytest.approx(-2.0)
    assert hc.gauge_norm(hc.dilate(2.0, p)) == pytest.approx(2.0)
    assert hc.kc_distance(p, p) == 0.0
    assert Point.origin(2).n == 2
    with pytest.raises(ValueError):
        Point.from_array(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        Point.from_array(np.array([np.nan, 0.0, 0.0]))
