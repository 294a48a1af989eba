"""Built-in domains and fields: the bump counterexample pair, the lens examples, cones, balls and cylinders."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import domains as dm
from . import heis_core as hc
from .cones import apex_cone, make_slicing_cone
from .domains import ConvexDomain
from .fields import ScalarField, interior_samples
from .heis_core import Point
from .sampling import unit_cube


class GalleryError(ValueError):
    """Unknown gallery name or parameters outside their declared range."""


# ------------------------------------------------------------------ fields


def heis_t(n: int = 1) -> ScalarField:
    """v = t, with ∇_H v = (2y, -2x)."""

    def grad(p: np.ndarray) -> np.ndarray:
        x, y, _ = hc.split(p)
        return np.concatenate([2 * y, -2 * x], axis=-1)

    def hess(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.zeros(p.shape[:-1] + (2 * n, 2 * n)), np.ones(p.shape[:-1])

    return ScalarField(lambda p: p[..., -1].copy(), n, "t", grad, lambda p: np.ones(p.shape[:-1]), hess_fn=hess)


def quadratic(n: int = 1) -> ScalarField:
    """|z|^2 with ∇_H = (2x, 2y) and symmetrized Hessian 2I."""

    def grad(p: np.ndarray) -> np.ndarray:
        return 2 * p[..., :-1]

    def hess(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.broadcast_to(2 * np.eye(2 * n), p.shape[:-1] + (2 * n, 2 * n)).copy(), np.zeros(p.shape[:-1])

    return ScalarField(lambda p: np.sum(p[..., :-1] ** 2, axis=-1), n, "|z|^2", grad, lambda p: np.zeros(p.shape[:-1]), hess_fn=hess)


def gauge4(R: float = 1.0, n: int = 1) -> ScalarField:
    """N^4 - R^4 = |z|^4 + t^2 - R^4: Euclidean convex, zero on the gauge sphere."""

    def fn(p: np.ndarray) -> np.ndarray:
        z2 = np.sum(p[..., :-1] ** 2, axis=-1)
        return z2 * z2 + p[..., -1] ** 2 - R**4

    def grad(p: np.ndarray) -> np.ndarray:
        x, y, t = hc.split(p)
        z2 = np.sum(p[..., :-1] ** 2, axis=-1)[..., None]
        tt = np.asarray(t)[..., None]
        return np.concatenate([4 * z2 * x + 4 * y * tt, 4 * z2 * y - 4 * x * tt], axis=-1)

    return ScalarField(fn, n, f"N^4-{R:g}^4", grad, lambda p: 2 * p[..., -1])


def bump_profile(r: np.ndarray, amplitude: float = 0.25) -> tuple[np.ndarray, np.ndarray]:
    """g(r) = amplitude·exp(1 - 1/(1-s^2)), s = (r - 1/2)/(1/4), and g'(r); zero off the annulus."""
    s = (np.asarray(r, dtype=float) - 0.5) / 0.25
    inside = np.abs(s) < 1
    g = np.zeros_like(s)
    dg = np.zeros_like(s)
    q = 1.0 - s[inside] ** 2
    gi = amplitude * np.exp(1.0 - 1.0 / q)
    g[inside] = gi
    dg[inside] = -8.0 * s[inside] * gi / q**2
    return g, dg


def bump_field(amplitude: float = 0.25) -> ScalarField:
    """u = t - (1 - t^2) g(|z|) on H^1."""

    def parts(p: np.ndarray):
        x, y, t = p[..., 0], p[..., 1], p[..., 2]
        r = np.hypot(x, y)
        g, dg = bump_profile(r, amplitude)
        return x, y, t, r, g, dg

    def fn(p: np.ndarray) -> np.ndarray:
        _, _, t, _, g, _ = parts(p)
        return t - (1 - t * t) * g

    def grad(p: np.ndarray) -> np.ndarray:
        x, y, t, r, g, dg = parts(p)
        with np.errstate(divide="ignore", invalid="ignore"):
            rr = np.where(r > 0, dg / r, 0.0)
        gx, gy = rr * x, rr * y
        k = 1 + 2 * t * g
        return np.stack([-(1 - t * t) * gx + 2 * y * k, -(1 - t * t) * gy - 2 * x * k], axis=-1)

    def tder(p: np.ndarray) -> np.ndarray:
        _, _, t, _, g, _ = parts(p)
        return 1 + 2 * t * g

    return ScalarField(fn, 1, f"bump(c={amplitude:g})", grad, tder, {"amplitude": amplitude})


def _lens_profile(alpha: float, quad: float) -> Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """F(x) = -m^alpha + quad*(alpha/2) m^2 with m = min(x, 2-x); returns F, F', F''."""

    def prof(x: np.ndarray):
        m = np.minimum(x, 2.0 - x)
        sgn = np.where(x <= 1.0, 1.0, -1.0)
        mp = np.maximum(m, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            F = -(mp**alpha) + quad * 0.5 * alpha * mp * mp
            F1 = sgn * (-alpha * mp ** (alpha - 1.0) + quad * alpha * mp)
            F2 = -alpha * (alpha - 1.0) * mp ** (alpha - 2.0) + quad * alpha
        return F, F1, F2

    return prof


def lens_field(alpha: float, beta: float, quad: float = 0.0) -> ScalarField:
    """u = (y^2+t^2)^beta + F(x) on the lens 0 < x < 2, with analytic first and second derivatives."""
    prof = _lens_profile(alpha, quad)
    b = float(beta)

    def S_pow(y, t, e):
        S = y * y + t * t
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(S > 0, S ** np.where(S > 0, e, 1.0), 0.0 if e > 0 else np.inf)

    def fn(p: np.ndarray) -> np.ndarray:
        x, y, t = p[..., 0], p[..., 1], p[..., 2]
        return (y * y + t * t) ** b + prof(x)[0]

    def grad(p: np.ndarray) -> np.ndarray:
        x, y, t = p[..., 0], p[..., 1], p[..., 2]
        P = S_pow(y, t, b - 1)
        return np.stack([prof(x)[1] + 4 * b * y * t * P, 2 * b * P * (y - 2 * x * t)], axis=-1)

    def tder(p: np.ndarray) -> np.ndarray:
        y, t = p[..., 1], p[..., 2]
        return 2 * b * t * S_pow(y, t, b - 1)

    def hess_xm(x: np.ndarray, m: np.ndarray, y: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Hessian data with the tip distance m passed separately, so x near 2 keeps its precision."""
        P = S_pow(y, t, b - 1)
        Q = 2 * (b - 1) * S_pow(y, t, b - 2) if b != 1 else np.zeros_like(P)
        Q = np.where(np.isfinite(Q), Q, 0.0)
        Py, Pt = Q * y, Q * t
        w = y - 2 * x * t
        xx = prof(m)[2] + 8 * b * y * y * (P + t * Pt)
        yy = 2 * b * ((Py - 2 * x * Pt) * w + P * (1 + 4 * x * x))
        xy = 2 * b * (-2 * t * P + 2 * y * Pt * w - 4 * x * y * P)
        yx = 4 * b * (t * (P + y * Py) - 2 * x * y * (P + t * Pt))
        off = 0.5 * (xy + yx)
        H = np.stack([np.stack([xx, off], -1), np.stack([off, yy], -1)], -2)
        return H, 2 * b * t * P

    def hess(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = p[..., 0]
        return hess_xm(x, np.minimum(x, 2.0 - x), p[..., 1], p[..., 2])

    label = f"lens(alpha={alpha:g},beta={beta:g},quad={quad:g})"
    meta = {"alpha": alpha, "beta": beta, "quad": quad, "hess_xm": hess_xm}
    return ScalarField(fn, 1, label, grad, tder, meta, hess_fn=hess)


def lens_domain(alpha: float, beta: float, quad: float = 0.0, label: str = "lens") -> ConvexDomain:
    """{(y^2+t^2)^beta < m^alpha - quad*(alpha/2) m^2, 0 < x < 2}, m = min(x, 2-x)."""
    prof = _lens_profile(alpha, quad)
    m = np.linspace(0, 1, 4097)
    rmax = float(np.max(np.maximum(-prof(m)[0], 0.0) ** (1.0 / (2 * beta))))
    pad = 1e-9

    def contains(p: np.ndarray) -> np.ndarray:
        x, y, t = p[..., 0], p[..., 1], p[..., 2]
        ok = (x > 0) & (x < 2)
        F = prof(np.clip(x, 0.0, 2.0))[0]
        return ok & ((y * y + t * t) ** beta + F < 0)

    lo = np.array([0.0, -rmax - pad, -rmax - pad])
    hi = np.array([2.0, rmax + pad, rmax + pad])
    return ConvexDomain(contains, lo, hi, label, None, {"alpha": alpha, "beta": beta, "quad": quad, "rmax": rmax})


# ----------------------------------------------------------------- entries


@dataclass
class GalleryEntry:
    name: str
    params: dict
    domain: ConvexDomain
    fields: dict[str, ScalarField]
    default_field: str
    validation: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def field(self, key: Optional[str] = None) -> ScalarField:
        key = key or self.default_field
        if key not in self.fields:
            raise GalleryError(f"entry {self.name!r} has no field {key!r}; choose from {sorted(self.fields)}")
        return self.fields[key]


DEFAULTS: dict[str, dict[str, float]] = {
    "cylinder-bump": {"amplitude": 0.25},
    "sharpness": {"eps": 0.5, "beta": 2.0},
    "prop-ma": {"beta": 2.0, "alpha": 0.55},
    "koranyi-cone": {"R": 1.0, "c_v": -1.0, "c_b": 0.0},
    "cylinder": {"r": 1.0, "h": 1.0},
    "ball": {"R": 1.0},
}


def sharpness_alpha(eps: float, beta: float) -> float:
    return 2 * beta / (4 * beta - 1) + eps / 4


def _merge(name: str, params: Optional[dict]) -> dict:
    params = dict(params or {})
    unknown = set(params) - set(DEFAULTS[name])
    if unknown:
        raise GalleryError(f"unknown parameters for {name!r}: {sorted(unknown)}")
    out = dict(DEFAULTS[name])
    out.update({k: float(v) for k, v in params.items()})
    return out


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise GalleryError(msg)


def _build(name: str, p: dict) -> GalleryEntry:
    if name == "cylinder-bump":
        _require(0 < p["amplitude"] <= 0.25, "amplitude must lie in (0, 1/4]")
        dom = dm.cylinder(1.0, 1.0)
        return GalleryEntry(name, p, dom, {"u": bump_field(p["amplitude"]), "v": heis_t(1)}, "v")
    if name == "sharpness":
        _require(0 < p["eps"] < 1, "eps must lie in (0, 1)")
        _require(p["beta"] > 1, "beta must exceed 1")
        a = sharpness_alpha(p["eps"], p["beta"])
        _require(a < 1, f"alpha = {a:g} must stay below 1")
        dom = lens_domain(a, p["beta"], 0.0, f"sharpness-lens(eps={p['eps']:g},beta={p['beta']:g})")
        return GalleryEntry(name, p, dom, {"u": lens_field(a, p["beta"], 0.0)}, "u", extras={"alpha": a})
    if name == "prop-ma":
        b, a = p["beta"], p["alpha"]
        _require(b > 1, "beta must exceed 1")
        _require(0.5 < a <= 2 * b / (4 * b - 1), "alpha must satisfy 1/2 < alpha <= 2 beta/(4 beta - 1)")
        dom = lens_domain(a, b, 1.0, f"prop-ma-lens(beta={b:g},alpha={a:g})")
        return GalleryEntry(name, p, dom, {"u": lens_field(a, b, 1.0)}, "u", extras={"alpha": a})
    if name == "koranyi-cone":
        _require(p["R"] > 0, "R must be positive")
        _require(p["c_v"] < p["c_b"] <= 0, "need c_v < c_b <= 0")
        dom = dm.koranyi_ball(p["R"])
        cone = make_slicing_cone(dom, Point.origin(1), p["c_v"], p["c_b"])
        flds = {"v": cone.as_field, "apex": apex_cone(dom, Point.origin(1), -p["c_v"])}
        return GalleryEntry(name, p, dom, flds, "v", extras={"cone": cone})
    if name == "cylinder":
        _require(p["r"] > 0 and p["h"] > 0, "r and h must be positive")
        dom = dm.cylinder(p["r"], p["h"])
        flds = {"v": heis_t(1), "apex": apex_cone(dom, Point.origin(1)), "quadratic": quadratic(1)}
        return GalleryEntry(name, p, dom, flds, "apex")
    if name == "ball":
        _require(p["R"] > 0, "R must be positive")
        dom = dm.koranyi_ball(p["R"])
        flds = {"gauge4": gauge4(p["R"], 1), "apex": apex_cone(dom, Point.origin(1)), "v": heis_t(1)}
        return GalleryEntry(name, p, dom, flds, "gauge4")
    raise GalleryError(f"unknown gallery entry {name!r}; choose from {sorted(DEFAULTS)}")


def validate_entry(entry: GalleryEntry, pairs: int = 400, samples: int = 200, seed: int = 0) -> dict:
    """Midpoint convexity probe of the domain and finiteness of every field on interior samples."""
    dom = entry.domain
    pts = dom.lo + (dom.hi - dom.lo) * unit_cube(4 * pairs, dom.dim, seed)
    pts = pts[dom.contains(pts)]
    m = pts.shape[0] // 2
    a, b = pts[:m], pts[m : 2 * m]
    convex = bool(np.all(dom.contains(0.5 * (a + b)))) if m else True
    inner = interior_samples(dom, samples, seed + 1)
    finite = {k: bool(np.all(np.isfinite(f(inner)))) for k, f in entry.fields.items()}
    return {"domain_convex": convex, "pairs": int(m), "fields_finite": finite, "samples": int(inner.shape[0])}


def builtin(name: str, params: Optional[dict] = None, validate: bool = True) -> GalleryEntry:
    if name not in DEFAULTS:
        raise GalleryError(f"unknown gallery entry {name!r}; choose from {sorted(DEFAULTS)}")
    entry = _build(name, _merge(name, params))
    if validate:
        entry.validation = validate_entry(entry)
        if not entry.validation["domain_convex"] or not all(entry.validation["fields_finite"].values()):
            raise GalleryError(f"entry {name!r} failed self-validation: {entry.validation}")
    return entry


def names() -> list[str]:
    return sorted(DEFAULTS)
