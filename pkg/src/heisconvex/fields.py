"""Scalar fields on H^n, horizontal derivatives and convexity refutation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from . import heis_core as hc
from .domains import ConvexDomain
from .heis_core import Point
from .sampling import unit_cube

BatchFn = Callable[[np.ndarray], np.ndarray]

GRAD_STEP = 1e-4
HESS_STEP = 1e-3
LAMBDAS = np.round(np.arange(1, 10) / 10.0, 12)


@dataclass
class ScalarField:
    """A batched function on H^n with optional analytic horizontal gradient and T-derivative."""

    fn: BatchFn
    n: int
    label: str
    grad_fn: Optional[BatchFn] = None
    t_fn: Optional[BatchFn] = None
    meta: dict = field(default_factory=dict)
    hess_fn: Optional[Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]] = None

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(pts, dtype=float)), dtype=float)

    def eval(self, p: Point) -> float:
        return float(self(p.as_array()))

    def scaled(self, a: float, b: float = 0.0, label: Optional[str] = None) -> "ScalarField":
        """The field a*u + b."""
        grad = None if self.grad_fn is None else (lambda p, g=self.grad_fn: a * g(p))
        tf = None if self.t_fn is None else (lambda p, g=self.t_fn: a * g(p))
        hess = None
        if self.hess_fn is not None:
            hf = self.hess_fn

            def hess(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
                hs, tu = hf(p)
                return a * hs, a * tu

        return ScalarField(lambda p: a * self(p) + b, self.n, label or f"{a:g}*{self.label}+{b:g}", grad, tf, hess_fn=hess)

    def precomposed_dilation(self, lam: float) -> "ScalarField":
        """u^lam = u ∘ δ_{1/lam}."""
        inv = 1.0 / lam
        grad = None
        if self.grad_fn is not None:
            g = self.grad_fn
            grad = lambda p: inv * g(hc.dilate_arr(inv, p))  # noqa: E731
        tf = None
        if self.t_fn is not None:
            f = self.t_fn
            tf = lambda p: inv * inv * f(hc.dilate_arr(inv, p))  # noqa: E731
        return ScalarField(lambda p: self(hc.dilate_arr(inv, p)), self.n, f"{self.label}∘δ(1/{lam:g})", grad, tf)

    def left_translated(self, g: Point) -> "ScalarField":
        """ξ ↦ u(g^{-1} ξ), the field transported by left translation by g."""
        gi = hc.inv_arr(g.as_array())
        grad = None
        if self.grad_fn is not None:
            gf = self.grad_fn
            grad = lambda p: gf(hc.mul_arr(gi, p))  # noqa: E731
        return ScalarField(lambda p: self(hc.mul_arr(gi, p)), self.n, f"translate({self.label})", grad)


@dataclass
class ConvexityReport:
    verdict: Literal["pass", "fail"]
    violations: list[tuple[list[float], list[float], float, float]]
    samples_used: int
    tolerance: float


# ----------------------------------------------------------- differentials


def _partial(u: BatchFn, pts: np.ndarray, axis: int, h: float) -> np.ndarray:
    e = np.zeros(pts.shape[-1])
    e[axis] = h
    return (u(pts + e) - u(pts - e)) / (2.0 * h)


def _frame_coeff(pts: np.ndarray, k: int, n: int) -> np.ndarray:
    """t-coefficient of the k-th horizontal field: 2y_j for X_j, -2x_j for Y_j."""
    if k < n:
        return 2.0 * pts[..., n + k]
    return -2.0 * pts[..., k - n]


def _apply_field(g: BatchFn, pts: np.ndarray, k: int, n: int, h: float) -> np.ndarray:
    return _partial(g, pts, k, h) + _frame_coeff(pts, k, n) * _partial(g, pts, 2 * n, h)


def fd_horizontal_gradient(u: BatchFn, pts: np.ndarray, n: int, h: float = GRAD_STEP) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    dt = _partial(u, pts, 2 * n, h)
    cols = [_partial(u, pts, k, h) + _frame_coeff(pts, k, n) * dt for k in range(2 * n)]
    return np.stack(cols, axis=-1)


def horizontal_gradient_arr(u: ScalarField, pts: np.ndarray, h: float = GRAD_STEP, analytic: bool = True) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if analytic and u.grad_fn is not None:
        return np.asarray(u.grad_fn(pts), dtype=float)
    return fd_horizontal_gradient(u, pts, u.n, h)


def horizontal_gradient(u: ScalarField, xi: Point, h: float = GRAD_STEP) -> np.ndarray:
    return horizontal_gradient_arr(u, xi.as_array(), h)


def t_derivative_arr(u: ScalarField, pts: np.ndarray, h: float = HESS_STEP, analytic: bool = True) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if analytic and u.t_fn is not None:
        return np.asarray(u.t_fn(pts), dtype=float)
    return _partial(u, pts, 2 * u.n, h)


def field_products_arr(u: ScalarField, pts: np.ndarray, h: float = HESS_STEP) -> np.ndarray:
    """Matrix of Z_a Z_b u (a outer, b inner) by composed central differences, shape (..., 2n, 2n)."""
    pts = np.asarray(pts, dtype=float)
    n = u.n
    out = np.empty(pts.shape[:-1] + (2 * n, 2 * n))
    for b in range(2 * n):
        inner = lambda p, b=b: _apply_field(u, p, b, n, h)  # noqa: E731
        for a in range(2 * n):
            out[..., a, b] = _apply_field(inner, pts, a, n, h)
    return out


def horizontal_hessian_sym_T_arr(
    u: ScalarField, pts: np.ndarray, h: float = HESS_STEP, analytic: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """(symmetrized horizontal Hessian, Tu); finite differences unless ``analytic`` and a callback exists."""
    if analytic and u.hess_fn is not None:
        hs, tu = u.hess_fn(np.asarray(pts, dtype=float))
        return np.asarray(hs, dtype=float), np.asarray(tu, dtype=float)
    zz = field_products_arr(u, pts, h)
    hstar = 0.5 * (zz + np.swapaxes(zz, -1, -2))
    return hstar, _partial(u, np.asarray(pts, dtype=float), 2 * u.n, h)


def horizontal_hessian_sym_T(u: ScalarField, xi: Point, h: float = HESS_STEP, analytic: bool = False) -> tuple[np.ndarray, float]:
    hstar, tu = horizontal_hessian_sym_T_arr(u, xi.as_array(), h, analytic)
    return hstar, float(tu)


def commutator_arr(u: ScalarField, pts: np.ndarray, j: int = 0, h: float = HESS_STEP) -> np.ndarray:
    """(X_j Y_j - Y_j X_j) u by composed differences."""
    zz = field_products_arr(u, pts, h)
    return zz[..., j, u.n + j] - zz[..., u.n + j, j]


# ---------------------------------------------------------- convexity test


def interior_samples(dom: ConvexDomain, count: int, seed: int = 0, max_draws: int = 64) -> np.ndarray:
    """Deterministic low-discrepancy points of the domain (rejection from the box)."""
    got: list[np.ndarray] = []
    have = 0
    draw = max(count, 16)
    for k in range(max_draws):
        pts = dom.lo + (dom.hi - dom.lo) * unit_cube(draw, dom.dim, seed + 7919 * k)
        pts = pts[dom.contains(pts)]
        got.append(pts)
        have += pts.shape[0]
        if have >= count:
            break
        draw *= 2
    out = np.concatenate(got) if got else np.zeros((0, dom.dim))
    return out[:count]


def check_convexity(
    u: ScalarField,
    dom: ConvexDomain,
    mode: Literal["H", "strictH", "euclidean"] = "H",
    samples: tuple[int, int] = (200, 16),
    tol: float = 1e-9,
    strict_margin: float = 1e-9,
    seed: int = 0,
    keep: int = 25,
) -> ConvexityReport:
    """Refute (strict/H-/Euclidean) convexity on deterministic sample pairs.

    ``samples`` is (base points, partners per base point). Passing is only
    evidence at the sampled resolution; a failure carries explicit witnesses.
    """
    n_base, n_partner = samples
    xi1 = interior_samples(dom, n_base, seed)
    if xi1.shape[0] == 0:
        return ConvexityReport("pass", [], 0, tol)
    k = 2 * dom.n
    if mode == "euclidean":
        partners = interior_samples(dom, n_base * n_partner, seed + 1)
        m = min(partners.shape[0], xi1.shape[0] * n_partner)
        a = np.repeat(xi1, n_partner, axis=0)[:m]
        b = partners[:m]
        lam = np.full(m, 0.5)
    else:
        cube = unit_cube(n_partner * 4, k, seed + 2)
        w = dom.lo[:k] + (dom.hi[:k] - dom.lo[:k]) * cube
        a = np.repeat(xi1, w.shape[0], axis=0)
        b = hc.from_plane_arr(a, np.tile(w, (xi1.shape[0], 1)))
        ok = dom.contains(b)
        a, b = a[ok], b[ok]
        a = np.repeat(a, LAMBDAS.size, axis=0)
        b = np.repeat(b, LAMBDAS.size, axis=0)
        lam = np.tile(LAMBDAS, a.shape[0] // LAMBDAS.size)
    if mode == "euclidean":
        mid = 0.5 * (a + b)
    else:
        step = hc.mul_arr(hc.inv_arr(a), b)
        step[..., :-1] *= lam[:, None]
        step[..., -1] *= lam * lam
        mid = hc.mul_arr(a, step)
    ua, ub, um = u(a), u(b), u(mid)
    scale = 1.0 + np.max(np.abs(np.concatenate([ua, ub]))) if ua.size else 1.0
    gap = um - ((1.0 - lam) * ua + lam * ub)
    if mode == "strictH":
        distinct = np.linalg.norm(a - b, axis=-1) > 1e-12
        bad = distinct & (gap > -strict_margin * scale)
    else:
        bad = gap > tol * scale
    order = np.argsort(-gap[bad], kind="stable")[:keep]
    idx = np.nonzero(bad)[0][order]
    viol = [(a[i].tolist(), b[i].tolist(), float(lam[i]), float(gap[i])) for i in idx]
    return ConvexityReport("fail" if bad.any() else "pass", viol, int(a.shape[0]), tol * scale)


def recheck_violation(u: ScalarField, xi1: list[float], xi2: list[float], lam: float) -> float:
    """Gap of the H-convexity inequality re-evaluated from the raw definition."""
    a = np.asarray(xi1)
    b = np.asarray(xi2)
    mid = hc.mul_arr(a, hc.dilate_arr(lam, hc.mul_arr(hc.inv_arr(a), b)))
    return float(u(mid) - ((1 - lam) * u(a) + lam * u(b)))
