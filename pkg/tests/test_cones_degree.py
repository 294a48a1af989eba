import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heisconvex import cones as C
from heisconvex import degree2d as D
from heisconvex import domains as dm
from heisconvex import fields as F
from heisconvex.heis_core import Point


@pytest.fixture(scope="module")
def cone():
    return C.make_slicing_cone(dm.koranyi_ball(1.0), Point.origin(1), -1.0, 0.0)


def test_cone_values_at_vertex_and_slice_boundary(cone):
    assert cone.as_field(np.zeros((1, 3)))[0] == pytest.approx(-1.0)
    b = dm.slice_boundary_samples(cone.base, np.zeros(3), K=32)
    np.testing.assert_allclose(cone.as_field(b * (1 - 1e-9)), 0.0, atol=1e-6)


def test_cone_is_euclidean_convex(cone):
    assert F.check_convexity(cone.as_field, cone.base, "euclidean", samples=(80, 8)).verdict == "pass"


def test_cone_radius_and_support(cone):
    r0, diam = C.cone_r0(cone)
    assert diam == pytest.approx(2.0, rel=1e-3)
    assert r0 == pytest.approx(0.5, rel=1e-3)
    rep = C.cone_property_check(cone, per_axis=11, boundary_samples=200)
    assert rep["all_not_refuted"] and rep["strict_support"]
    # the slice through the vertex is the unit disk, so the true slope is 1 = 2*r0
    assert C.overshoot_probe(cone, 1.5)[0] == "NOT_REFUTED"
    assert C.overshoot_probe(cone, 2.5)[0] == "REFUTED"


def test_cone_rejects_bad_levels():
    with pytest.raises(ValueError):
        C.make_slicing_cone(dm.koranyi_ball(1.0), Point.origin(1), 0.0, -1.0)
    with pytest.raises(dm.DomainError):
        C.make_slicing_cone(dm.koranyi_ball(1.0), Point.from_array(np.array([2.0, 0, 0])), -1.0, 0.0)


def _zk(k):
    def f(p):
        z = (p[:, 0] + 1j * p[:, 1]) ** k
        return np.stack([z.real, z.imag], 1)

    return f


@given(st.integers(1, 5))
def test_degree_of_power_maps(k):
    disk = D.PlanarRegion.regular((0, 0), 1.0, 256)
    assert D.brouwer_degree_2d(_zk(k), disk, (0.05, 0.02)) == k


def test_degree_of_reflection_and_outside_target():
    sq = D.PlanarRegion.rectangle((-1, -1), (1, 1))
    assert D.brouwer_degree_2d(lambda p: p * np.array([1.0, -1.0]), sq, (0.1, 0.1)) == -1
    assert D.brouwer_degree_2d(lambda p: p, sq, (3.0, 0.0)) == 0


def test_degree_rejects_boundary_targets():
    sq = D.PlanarRegion.rectangle((-1, -1), (1, 1))
    with pytest.raises(D.DegreeError):
        D.brouwer_degree_2d(lambda p: p, sq, (1.0, 0.0))


def test_region_validation():
    with pytest.raises(ValueError):
        D.PlanarRegion(np.array([[0, 0], [1, 1], [1, 0], [0, 1]], dtype=float))
    with pytest.raises(ValueError):
        D.PlanarRegion(np.array([[0, 0], [0, 1], [1, 0]], dtype=float))


def test_set_valued_degree_of_identity_and_shifted_subdifferential(cone):
    sq = D.PlanarRegion.rectangle((-1, -1), (1, 1))
    r = D.sv_degree_trace(D.SetValuedMap2D.identity(), sq, (0.2, 0.1))
    assert r.degree == 1 and {d for _, d in r.per_eps} == {1}
    Fm = D.subdifferential_map(cone.as_field, cone.base, np.zeros(3)).shifted((0.2, 0.1))
    U = D.PlanarRegion.regular((0, 0), 0.8, 64)
    r = D.sv_degree_trace(Fm, U, (0.0, 0.0), eps_schedule=(2**-3, 2**-4, 2**-5))
    assert r.degree == 1


def test_set_valued_degree_needs_boundary_gap():
    sq = D.PlanarRegion.rectangle((-1, -1), (1, 1))
    with pytest.raises(D.DegreeError):
        D.sv_degree_trace(D.SetValuedMap2D.identity(), sq, (0.999, 0.0))


def test_selector_values_lie_near_the_graph(cone):
    Fm = D.subdifferential_map(cone.as_field, cone.base, np.zeros(3))
    U = D.PlanarRegion.regular((0, 0), 0.8, 64)
    sel = D.approx_selector(Fm, U, 2**-4)
    probes = U.project(np.random.default_rng(0).uniform(-0.8, 0.8, (50, 2)))
    assert D.selector_containment(sel, probes).max() < 2**-4 * 4
