import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heisconvex import domains as dm
from heisconvex import gallery as G
from heisconvex import subdiff as S
from heisconvex.heis_core import Point
from heisconvex.subdiff import HalfspaceSet, PGrid

coord = st.floats(-0.6, 0.6)


def test_halfspace_box_geometry():
    box = HalfspaceSet.box(np.array([-1.0, -2.0]), np.array([1.0, 2.0]))
    assert box.diameter() == pytest.approx(math.hypot(2, 4))
    np.testing.assert_allclose(box.min_norm_point(), 0.0, atol=1e-12)
    cut = box.with_constraints(np.array([[-1.0, 0.0]]), np.array([-0.5]))  # x >= 0.5
    np.testing.assert_allclose(cut.min_norm_point(), [0.5, 0.0], atol=1e-9)
    moved = cut.affine(2.0, np.array([1.0, 1.0]))
    assert moved.contains(np.array([[2.5, 1.0]]))[0]
    assert not moved.contains(np.array([[1.5, 1.0]]))[0]


def test_singleton_set():
    s = HalfspaceSet.singleton(np.array([0.3, -0.2]))
    assert s.contains(np.array([[0.3, -0.2]]))[0]
    assert s.diameter() == pytest.approx(0.0, abs=1e-9)


@given(coord, coord, coord)
def test_gradient_of_t_is_never_refuted(x, y, t):
    dom = dm.cylinder()
    xi = Point.from_array(np.array([x, y, t]))
    p = np.array([2 * y, -2 * x])
    assert S.subdiff_test(G.heis_t(), dom, xi, p) == S.NOT_REFUTED
    assert S.subdiff_test(G.heis_t(), dom, xi, p + np.array([0.05, 0.0])) == S.REFUTED


@given(coord, coord, coord)
def test_gradient_of_convex_quadratic_is_a_subgradient(x, y, t):
    dom = dm.cylinder()
    xi = Point.from_array(np.array([x, y, t]))
    assert S.subdiff_test(G.quadratic(), dom, xi, np.array([2 * x, 2 * y])) == S.NOT_REFUTED


def test_outer_polytope_shrinks_to_gradient():
    dom = dm.cylinder()
    xi = Point.from_array(np.array([0.2, 0.1, 0.0]))
    poly = S.subdiff_outer_polytope(G.quadratic(), dom, xi, 384)
    assert poly.contains(np.array([[0.4, 0.2]]), tol=1e-9)[0]
    assert poly.diameter() < 0.05


def test_cone_vertex_subdifferential_is_fat():
    ball = dm.koranyi_ball(1.0)
    apex = G.builtin("koranyi-cone").field("apex")
    poly = S.subdiff_outer_polytope(apex, ball, Point.origin(1), 384)
    assert poly.contains(np.array([[0.5, 0.0], [0.0, -0.5]]))[0:2].all()


def test_query_outside_domain_raises():
    with pytest.raises(dm.DomainError):
        S.subdiff_test(G.heis_t(), dm.cylinder(), Point.from_array(np.array([2.0, 0.0, 0.0])), np.zeros(2))


def test_pgrid_geometry():
    g = PGrid.covering(np.array([-1.0, -1.0]), np.array([1.0, 1.0]), 0.5)
    assert g.shape == (4, 4)
    assert g.cell_volume() == pytest.approx(0.25)
    c = g.centers()
    assert c.shape == (4, 4, 2)
    assert c[0, 0] == pytest.approx([-0.75, -0.75])


def test_normal_image_of_t_is_the_disk_of_radius_two():
    dom = dm.cylinder(1.0, 1.0)
    E = S.region_grid(dom, 0.05, 0.5)
    img = S.normal_map_raster(G.heis_t(), dom, E, S.default_p_grid(G.heis_t(), E, 0.1), 96)
    assert img.measure.value == pytest.approx(4 * math.pi, rel=0.05)
    csv = img.to_csv()
    assert csv.startswith("p1,p2,flag\n") and "\r" not in csv


def test_raster_is_thread_independent():
    dom = dm.koranyi_ball(1.0)
    u = G.gauge4(1.0)
    E = S.region_grid(dom, 0.15)
    pg = S.default_p_grid(u, E, 0.2)
    a = S.normal_map_raster(u, dom, E, pg, 48, threads=1)
    b = S.normal_map_raster(u, dom, E, pg, 48, threads=3)
    assert np.array_equal(a.flags, b.flags)


def test_region_grid_anchor_is_a_lattice_point():
    dom = dm.cylinder()
    anchor = np.array([0.013, -0.02, 0.1])
    E = S.region_grid(dom, 0.1, 0.25, anchor)
    assert np.any(np.all(np.isclose(E, anchor), axis=1))
    assert np.all(dom.contains(E))
