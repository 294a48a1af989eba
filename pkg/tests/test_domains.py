import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heisconvex import domains as dm
from heisconvex import gallery as G
from heisconvex import heis_core as hc
from heisconvex.heis_core import Point
from heisconvex.sampling import unit_cube

DOMAINS = {
    "cylinder": lambda: dm.cylinder(1.0, 1.0),
    "ball": lambda: dm.koranyi_ball(1.0),
    "ellipsoid": lambda: dm.random_ellipsoid(3),
    "box": lambda: dm.box(np.array([-1.0, -0.5, -0.2]), np.array([1.0, 0.5, 0.3])),
    "lens": lambda: G.lens_domain(0.55, 2.0, 1.0),
}


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_midpoint_convexity(name):
    dom = DOMAINS[name]()
    pts = dom.lo + (dom.hi - dom.lo) * unit_cube(4000, 3, 1)
    pts = pts[dom.contains(pts)]
    m = min(1000, pts.shape[0] // 2)
    assert m > 100
    a, b = pts[:m], pts[m : 2 * m]
    assert np.all(dom.contains(0.5 * (a + b)))


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_ray_exit_lands_on_boundary(name):
    dom = DOMAINS[name]()
    o = np.broadcast_to(0.5 * (dom.lo + dom.hi), (50, 3)).copy()
    d = np.random.default_rng(0).normal(size=(50, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    s = dom.ray_exit(o, d)
    assert np.all(dom.contains(o + (s - 1e-7)[:, None] * d))
    assert not np.any(dom.contains(o + (s + 1e-7)[:, None] * d))


def test_gauge_distance_closed_forms():
    ball = dm.koranyi_ball(0.8)
    assert dm.dist_h_boundary(ball, Point.origin(1)) == pytest.approx(0.8, rel=1e-6)
    # cylinder |z| < r, |t| < h: from the origin the nearest boundary is at gauge min(r, sqrt(h))
    cyl = dm.cylinder(1.0, 0.25)
    assert dm.dist_h_boundary(cyl, Point.origin(1)) == pytest.approx(0.5, rel=1e-3)
    cyl = dm.cylinder(0.6, 1.0)
    assert dm.dist_h_boundary(cyl, Point.origin(1)) == pytest.approx(0.6, rel=1e-3)


def test_distance_sampling_converges_from_above():
    dom = dm.random_ellipsoid(5)
    xi = dm.grid_points(dom, 4)
    coarse = dm.dist_h_boundary_arr(dom, xi, K=64)
    fine = dm.dist_h_boundary_arr(dom, xi, K=1024)
    polished = dm.dist_h_boundary_refined(dom, xi)
    assert np.all(polished <= fine * (1 + 1e-12))
    assert np.all(fine <= coarse * 1.02)
    assert np.all(polished >= 0.9 * fine)


@given(st.floats(0.3, 3.0))
def test_distance_is_dilation_covariant(lam):
    dom = dm.cylinder(1.0, 0.7)
    xi = np.array([[0.2, -0.1, 0.3], [0.0, 0.5, -0.2]])
    d0 = dm.dist_h_boundary_arr(dom, xi)
    d1 = dm.dist_h_boundary_arr(dm.dilated(dom, lam), hc.dilate_arr(lam, xi))
    np.testing.assert_allclose(d1, lam * d0, rtol=1e-6)


def test_distance_is_left_invariant():
    dom = dm.koranyi_ball(1.0)
    g = Point.from_array(np.array([0.4, -0.3, 0.5]))
    xi = np.array([[0.1, 0.2, -0.1]])
    d0 = dm.dist_h_boundary_arr(dom, xi)
    d1 = dm.dist_h_boundary_arr(dm.translated(dom, g), hc.mul_arr(g.as_array(), xi))
    np.testing.assert_allclose(d1, d0, rtol=1e-6)


def test_slicing_diameter_of_cylinder():
    dom = dm.cylinder(1.0, 1.0)
    assert dm.slice_diameter(dom, np.zeros(3)) == pytest.approx(2.0, rel=1e-3)
    # tilted slices are longer in the gauge metric: chords between two non-base points pick up a t-offset
    assert dm.diam_hs(dom, 5) >= 2.0 - 1e-9


def test_dilation_scales_slicing_diameter():
    dom = dm.koranyi_ball(1.0)
    assert dm.diam_hs(dm.dilated(dom, 2.0), 5) == pytest.approx(2 * dm.diam_hs(dom, 5), rel=1e-6)


def test_sublevel_of_gauge_field_is_a_smaller_ball():
    dom = dm.sublevel(dm.koranyi_ball(1.0), G.gauge4(1.0), -0.5)
    r = 0.5 ** 0.25
    o = np.zeros((1, 3))
    for d in np.eye(3):
        s = dom.ray_exit(o, d[None, :])[0]
        assert hc.gauge_arr(s * d) == pytest.approx(r, rel=1e-6)


def test_queries_outside_raise():
    with pytest.raises(dm.DomainError):
        dm.dist_h_boundary_arr(dm.cylinder(), np.array([[2.0, 0.0, 0.0]]))
    with pytest.raises(ValueError):
        dm.box(np.array([0.0, 0.0, 0.0]), np.array([1.0, -1.0, 1.0]))
