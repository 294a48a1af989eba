import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from heisconvex import domains as dm
from heisconvex import gallery as G
from heisconvex import harnack as H
from heisconvex.heis_core import Point, inv_arr


def _closed_form_sympy():
    a = sp.root(17, 4) / 2
    b = sp.root(8, 4) / 2
    A = (3 - a) / (sp.Rational(5, 2) - a)
    B = (3 - b) / (sp.Rational(5, 2) - b)
    return float(sp.N(10 * (A * B) ** 2, 30))


def test_product_constant_matches_exact_form():
    exact = _closed_form_sympy()
    assert exact == pytest.approx(30.26, abs=0.005)
    assert f"{H.product_constant():.4g}" == f"{exact:.4g}"
    assert H.product_constant() <= H.HARNACK_BOUND


def test_lemma_factor_validation():
    lo, up = H.lemma_factors(3.0, 1.0, 1.0, 0.5)
    assert lo == pytest.approx(1.5 / 2) and up == pytest.approx(2 / 1.5)
    with pytest.raises(H.HarnackError):
        H.lemma_factors(3.0, 2.0, 1.0, 1.5)


@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(-0.1, 0.1))
def test_chain_steps_satisfy_gauge_bounds(x, y, t):
    R = 0.4
    p = np.array([x, y, t])
    if np.hypot(x, y) ** 4 + t * t > R**4:
        p = p * 0.5
    ch = H.chain_points(p)
    recs = ch.verify(R)
    assert len(recs) == 5 and all(r["ok"] for r in recs)
    np.testing.assert_allclose(ch.points[-1], 0.0, atol=1e-15)


def test_ball_check_on_two_convex_fields():
    cone = G.builtin("koranyi-cone")
    r = H.ball_harnack_check(cone.field("v"), cone.domain, np.zeros(3), 0.33)
    assert r.verdict == "consistent" and 1 / 31 <= r.min_ratio and r.max_ratio <= 31
    cyl = G.builtin("cylinder")
    r = H.ball_harnack_check(cyl.field("apex"), cyl.domain, np.zeros(3), 0.3)
    assert r.verdict == "consistent"


def test_ball_check_refuses_positive_fields_and_large_balls():
    cyl = G.builtin("cylinder")
    with pytest.raises(H.HarnackError):
        H.ball_harnack_check(G.heis_t().scaled(1.0, 0.5), cyl.domain, np.zeros(3), 0.3)
    with pytest.raises(dm.DomainError):
        H.ball_harnack_check(cyl.field("apex"), cyl.domain, np.zeros(3), 0.5)


def test_recentring_invariance():
    cyl = G.builtin("cylinder")
    u, dom = cyl.field("apex"), cyl.domain
    xi0 = np.array([0.1, -0.05, 0.05])
    a = H.ball_harnack_check(u, dom, xi0, 0.2, sample_pairs=200)
    g = Point.from_array(inv_arr(xi0))
    b = H.ball_harnack_check(u.left_translated(g), dm.translated(dom, g), np.zeros(3), 0.2, sample_pairs=200)
    assert a.min_ratio == pytest.approx(b.min_ratio, rel=1e-9)
    assert a.max_ratio == pytest.approx(b.max_ratio, rel=1e-9)


def test_sign_propagation_bound_holds():
    cyl = G.builtin("cylinder")
    u = cyl.field("apex")
    sp_ = H.sign_propagation(u, cyl.domain, np.zeros(3), np.array([0.6, 0.0, 0.2]))
    assert sp_.k >= 2
    assert sp_.target_value <= sp_.bound < 0
