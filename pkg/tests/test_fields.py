import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from heisconvex import domains as dm
from heisconvex import fields as F
from heisconvex import gallery as G
from heisconvex.fields import ScalarField

x, y, t = sp.symbols("x y t", real=True)


def X(f):
    return sp.diff(f, x) + 2 * y * sp.diff(f, t)


def Y(f):
    return sp.diff(f, y) - 2 * x * sp.diff(f, t)


POLY = x**4 + 3 * x * y * t - t**2 + y**3 * x + 2 * t * x**2


def _field(expr) -> ScalarField:
    f = sp.lambdify((x, y, t), expr, "numpy")
    return ScalarField(lambda p: f(p[..., 0], p[..., 1], p[..., 2]) + 0 * p[..., 0], 1, str(expr))


def _oracle(expr):
    grad = sp.lambdify((x, y, t), [X(expr), Y(expr)], "numpy")
    zz = sp.lambdify((x, y, t), [[X(X(expr)), X(Y(expr))], [Y(X(expr)), Y(Y(expr))]], "numpy")
    tu = sp.lambdify((x, y, t), sp.diff(expr, t), "numpy")
    return grad, zz, tu


@pytest.fixture(scope="module")
def pts():
    return np.random.default_rng(7).uniform(-1, 1, size=(200, 3))


def test_gradient_against_symbolic(pts):
    grad, _, _ = _oracle(POLY)
    want = np.stack([np.broadcast_to(g, pts.shape[0]) for g in grad(*pts.T)], -1)
    got = F.horizontal_gradient_arr(_field(POLY), pts)
    np.testing.assert_allclose(got, want, rtol=1e-6, atol=1e-6)


def test_field_products_against_symbolic(pts):
    _, zz, _ = _oracle(POLY)
    raw = zz(*pts.T)
    want = np.stack([np.stack([np.broadcast_to(v, pts.shape[0]) for v in row], -1) for row in raw], -2)
    # [a, b] = Z_a Z_b u with Z_a applied last
    got = F.field_products_arr(_field(POLY), pts)
    np.testing.assert_allclose(got, want, rtol=1e-4, atol=1e-4)


def test_commutator_identity(pts):
    u = _field(POLY)
    _, _, tu = _oracle(POLY)
    got = F.commutator_arr(u, pts)
    np.testing.assert_allclose(got, -4 * tu(*pts.T), atol=1e-4)


def test_finite_differences_are_second_order():
    u = _field(POLY)
    grad, _, _ = _oracle(POLY)
    p = np.array([[0.3, -0.4, 0.2], [-0.6, 0.5, 0.7]])
    want = np.stack(grad(*p.T), -1)
    errs = [np.abs(F.fd_horizontal_gradient(u, p, 1, h) - want).max() for h in (0.04, 0.02)]
    assert 3.0 <= errs[0] / errs[1] <= 5.0


def test_symmetrised_hessian_of_t_and_quadratic():
    p = np.random.default_rng(1).uniform(-1, 1, (30, 3))
    hs, tu = F.horizontal_hessian_sym_T_arr(G.heis_t(), p)
    np.testing.assert_allclose(hs, 0.0, atol=1e-6)
    np.testing.assert_allclose(tu, 1.0, atol=1e-8)
    hs, tu = F.horizontal_hessian_sym_T_arr(G.quadratic(), p)
    np.testing.assert_allclose(hs, np.broadcast_to(2 * np.eye(2), hs.shape), atol=1e-6)


@pytest.mark.parametrize("name,alpha,beta,quad", [("sharpness", 39 / 56, 2.0, 0.0), ("prop-ma", 0.55, 2.0, 1.0)])
def test_lens_analytic_hessian_matches_differences(name, alpha, beta, quad):
    u = G.lens_field(alpha, beta, quad)
    dom = G.lens_domain(alpha, beta, quad)
    p = F.interior_samples(dom, 60, 3)
    p = p[(p[:, 0] > 0.2) & (p[:, 0] < 1.8)]
    ha, ta = F.horizontal_hessian_sym_T_arr(u, p, analytic=True)
    hf, tf = F.horizontal_hessian_sym_T_arr(u, p, h=1e-4)
    scale = np.abs(ha).max()
    np.testing.assert_allclose(hf, ha, atol=1e-5 * scale)
    np.testing.assert_allclose(tf, ta, atol=1e-6)


@given(st.floats(0.1, 4.0), st.floats(-1.0, 1.0))
def test_scaled_field_gradient(a, b):
    u = G.gauge4(1.0).scaled(a, b)
    p = np.array([[0.2, 0.1, -0.3]])
    np.testing.assert_allclose(F.horizontal_gradient_arr(u, p), a * F.horizontal_gradient_arr(G.gauge4(1.0), p))
    assert u(p)[0] == pytest.approx(a * G.gauge4(1.0)(p)[0] + b)


def test_convexity_passes_for_convex_fields():
    ball = dm.koranyi_ball(1.0)
    for f in (G.gauge4(1.0), G.quadratic(), G.heis_t()):
        assert F.check_convexity(f, ball, "H", samples=(60, 8)).verdict == "pass"
    assert F.check_convexity(G.gauge4(1.0), ball, "euclidean", samples=(60, 8)).verdict == "pass"


def test_convexity_failure_is_sound():
    rep = F.check_convexity(G.bump_field(0.25), dm.cylinder(), "H", samples=(200, 16))
    assert rep.verdict == "fail" and rep.violations
    for a, b, lam, gap in rep.violations:
        assert F.recheck_violation(G.bump_field(0.25), a, b, lam) > 0


def test_t_is_not_strictly_convex():
    rep = F.check_convexity(G.heis_t(), dm.cylinder(), "strictH", samples=(40, 4))
    assert rep.verdict == "fail"


def test_translation_and_dilation_of_fields():
    u = G.quadratic()
    p = np.array([[0.4, -0.2, 0.3]])
    assert u.precomposed_dilation(2.0)(p)[0] == pytest.approx(u(p / np.array([2, 2, 4]))[0])
    from heisconvex.heis_core import Point, inv_arr, mul_arr

    g = Point.from_array(np.array([0.1, 0.2, 0.3]))
    assert u.left_translated(g)(p)[0] == pytest.approx(u(mul_arr(inv_arr(g.as_array()), p))[0])
