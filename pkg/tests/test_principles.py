import numpy as np
import pytest

from heisconvex import gallery as G
from heisconvex import principles as P


@pytest.fixture(scope="module")
def ball():
    return G.builtin("ball")


@pytest.fixture(scope="module")
def cyl():
    return G.builtin("cylinder")


def test_comparison_rejects_u_above_v(cyl):
    v = cyl.field("apex")
    with pytest.raises(P.HypothesisError) as exc:
        P.comparison_inclusion_check(v.scaled(1.0, 0.1), v, cyl.domain, cell=0.2)
    assert not exc.value.probes[0]["passed"]


def test_comparison_of_nested_cones_is_consistent(ball):
    v = ball.field("apex")
    u = v.scaled(1.5, 0.0)
    rep = P.comparison_inclusion_check(u, v, ball.domain, cell=0.1, t_spacing=0.25, slice_samples=96)
    assert rep.verdict == "consistent"
    assert rep.details["measure_v"] <= rep.details["measure_u"]


def test_boundary_minimum_holds_for_scaled_pair(ball):
    f = ball.field("gauge4")
    rep = P.boundary_min_check(f.scaled(1.2), f, ball.domain, cell=0.2, scales=(0.4,), per_scale=1, slice_samples=48, interior_grid=7)
    assert rep.verdict == "consistent"
    assert rep.details["interior_min"] >= rep.details["boundary_min"] - 1e-9


def test_geometric_ratio_below_constant(ball):
    rep = P.geometric_ratio(ball.domain, per_axis=6)
    assert rep.verdict == "consistent"
    assert rep.statistic <= P.TWIRL_CONSTANT


def test_scaling_identities(ball):
    for lam in (0.5, 2.0):
        rep = P.scaling_check(ball.field("gauge4"), ball.domain, lam, points=30)
        assert rep.verdict == "consistent" and rep.statistic < 0.02
    with pytest.raises(ValueError):
        P.scaling_check(ball.field("gauge4"), ball.domain, -1.0)


def test_gradient_image_of_linear_vertical_field(cyl):
    pts = np.random.default_rng(0).uniform(-1, 1, (20000, 3))
    pts = pts[cyl.domain.contains(pts)]
    area, pmax = P.gradient_image_measure(cyl.field("v"), pts, 0.1)
    # the gradient (2y, -2x) fills the disk of radius 2
    assert area == pytest.approx(4 * np.pi, rel=0.1)
    assert pmax <= 2.0


def test_normal_image_refinement_bounded(cyl):
    rep = P.normal_image_refinement(cyl.field("v"), cyl.domain)
    assert rep.verdict == "consistent"
    assert rep.details["extrapolated"] == pytest.approx(4 * np.pi, rel=0.15)


def test_report_csv_shape(ball):
    rep = P.geometric_ratio(ball.domain, per_axis=4)
    lines = rep.to_csv().split("\n")
    assert lines[0].split(",") == ["x", "y", "t", "dist", "slice_dist", "D", "ratio"]
    assert lines[-1] == "" and all(len(l.split(",")) == 7 for l in lines[:-1])
