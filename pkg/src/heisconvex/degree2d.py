"""Planar Brouwer degree by winding numbers and the set-valued degree via approximate selectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import heis_core as hc
from .domains import ConvexDomain, slice_boundary_samples
from .fields import ScalarField
from .subdiff import HalfspaceSet, SlicePattern, _as_pattern, slice_constraints

PlanarMap = Callable[[np.ndarray], np.ndarray]

DEFAULT_EPS_SCHEDULE = tuple(2.0 ** -k for k in range(3, 11))


class DegreeError(ValueError):
    """The degree is undefined for the given data or failed to stabilise."""


# ----------------------------------------------------------------- regions


@dataclass
class PlanarRegion:
    """Interior of a simple, positively oriented closed polygon."""

    vertices: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("a polygon needs at least three planar vertices")
        if np.allclose(v[0], v[-1]):
            v = v[:-1]
        self.vertices = v
        if self.signed_area() <= 0:
            raise ValueError("polygon must be positively oriented with positive area")
        if not _is_simple(v):
            raise ValueError("polygon edges intersect")
        seg = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])

    @classmethod
    def rectangle(cls, lo: Sequence[float], hi: Sequence[float]) -> "PlanarRegion":
        (x0, y0), (x1, y1) = lo, hi
        return cls(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]))

    @classmethod
    def regular(cls, center: Sequence[float] = (0.0, 0.0), radius: float = 1.0, m: int = 64) -> "PlanarRegion":
        ang = 2.0 * np.pi * np.arange(m) / m
        return cls(np.asarray(center, dtype=float) + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1))

    @classmethod
    def from_slice(cls, dom: ConvexDomain, base: np.ndarray, K: int = 64, shrink: float = 1.0) -> "PlanarRegion":
        """Inscribed polygon of Pr1(Ω ∩ H_base), optionally shrunk about Pr1(base)."""
        if dom.n != 1:
            raise ValueError("planar regions come from slices of H^1 only")
        base = np.asarray(base, dtype=float)
        w0 = hc.pr1(base)
        w = hc.pr1(slice_boundary_samples(dom, base, K))
        return cls(w0 + shrink * (w - w0))

    @property
    def perimeter(self) -> float:
        return float(self._cum[-1])

    def signed_area(self) -> float:
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]))

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def point_at(self, s: np.ndarray) -> np.ndarray:
        """Boundary points at arclength parameters s (taken modulo the perimeter)."""
        s = np.mod(np.asarray(s, dtype=float), self.perimeter)
        i = np.clip(np.searchsorted(self._cum, s, side="right") - 1, 0, self.vertices.shape[0] - 1)
        a = self.vertices[i]
        b = np.roll(self.vertices, -1, axis=0)[i]
        seg = self._cum[i + 1] - self._cum[i]
        frac = np.where(seg > 0, (s - self._cum[i]) / np.where(seg > 0, seg, 1.0), 0.0)
        return a + frac[:, None] * (b - a)

    def boundary_samples(self, count: int) -> np.ndarray:
        return self.point_at(self.perimeter * np.arange(count) / count)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Crossing-number membership of the open polygon (boundary points are unspecified)."""
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        a = self.vertices
        b = np.roll(a, -1, axis=0)
        py = p[:, 1][:, None]
        px = p[:, 0][:, None]
        straddle = (a[None, :, 1] > py) != (b[None, :, 1] > py)
        dy = b[:, 1] - a[:, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = a[:, 0] + (py - a[:, 1]) * (b[:, 0] - a[:, 0]) / np.where(dy == 0, 1.0, dy)
        hits = straddle & (px < xcross)
        return (np.sum(hits, axis=1) % 2) == 1

    def project(self, pts: np.ndarray) -> np.ndarray:
        """Nearest points of the closed polygon."""
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        inside = self.contains(p)
        a = self.vertices
        e = np.roll(a, -1, axis=0) - a
        ee = np.sum(e * e, axis=1)
        s = np.clip(np.einsum("mek,ek->me", p[:, None, :] - a[None], e) / ee, 0.0, 1.0)
        cand = a[None] + s[..., None] * e[None]
        j = np.argmin(np.sum((cand - p[:, None, :]) ** 2, axis=-1), axis=1)
        near = cand[np.arange(p.shape[0]), j]
        return np.where(inside[:, None], p, near)


def _is_simple(v: np.ndarray) -> bool:
    m = v.shape[0]
    a = v
    b = np.roll(v, -1, axis=0)

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    A1, B1 = a[:, None], b[:, None]
    A2, B2 = a[None, :], b[None, :]
    d1 = orient(A1, B1, A2)
    d2 = orient(A1, B1, B2)
    d3 = orient(A2, B2, A1)
    d4 = orient(A2, B2, B1)
    cross = (d1 * d2 < 0) & (d3 * d4 < 0)
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    adjacent = (np.abs(i - j) <= 1) | (np.abs(i - j) == m - 1)
    return not np.any(cross & ~adjacent)


# ----------------------------------------------------------- Brouwer degree


def _wrapped_increments(vals: np.ndarray) -> np.ndarray:
    ang = np.arctan2(vals[:, 1], vals[:, 0])
    return np.angle(np.exp(1j * (np.roll(ang, -1) - ang)))


def winding_number(f: PlanarMap, region: PlanarRegion, y: Sequence[float], base_samples: int = 256,
                   max_samples: int = 1 << 17, delta: float = 1e-9) -> float:
    """Total angle of f - y along the boundary over 2π, refined until every step turns by less than π/2."""
    y = np.asarray(y, dtype=float)
    s = region.perimeter * np.arange(base_samples) / base_samples
    vals = np.asarray(f(region.point_at(s)), dtype=float) - y
    while True:
        norms = np.linalg.norm(vals, axis=1)
        if norms.min() <= delta * (1.0 + norms.max()):
            raise DegreeError("target lies on (or too close to) the image of the boundary")
        inc = _wrapped_increments(vals)
        bad = np.abs(inc) >= 0.5 * np.pi
        if not bad.any():
            return float(np.sum(inc) / (2.0 * np.pi))
        if s.size + bad.sum() > max_samples:
            raise DegreeError("boundary refinement did not resolve the winding")
        s_next = np.append(s[1:], region.perimeter)
        mids = 0.5 * (s[bad] + s_next[bad])
        order = np.argsort(np.concatenate([s, mids]), kind="stable")
        new_vals = np.asarray(f(region.point_at(mids)), dtype=float) - y
        s = np.concatenate([s, mids])[order]
        vals = np.concatenate([vals, new_vals])[order]


def brouwer_degree_2d(f: PlanarMap, region: PlanarRegion, y: Sequence[float], base_samples: int = 256,
                      delta: float = 1e-9) -> int:
    w = winding_number(f, region, y, base_samples=base_samples, delta=delta)
    k = int(round(w))
    if abs(w - k) > 1e-6:
        raise DegreeError(f"winding sum {w!r} is not an integer")
    return k


# -------------------------------------------------------- set-valued maps


@dataclass
class SetValuedMap2D:
    """Convex compact values given as planar half-space sets; ``values`` is batched over points."""

    values: Callable[[np.ndarray], list[HalfspaceSet]]
    label: str = "F"

    def __call__(self, pts: np.ndarray) -> list[HalfspaceSet]:
        return self.values(np.atleast_2d(np.asarray(pts, dtype=float)))

    @classmethod
    def singleton(cls, g: PlanarMap, label: str = "singleton") -> "SetValuedMap2D":
        def values(p: np.ndarray) -> list[HalfspaceSet]:
            return [HalfspaceSet.singleton(v) for v in np.asarray(g(p), dtype=float)]

        return cls(values, label)

    @classmethod
    def identity(cls) -> "SetValuedMap2D":
        return cls.singleton(lambda p: p, "Id")

    def shifted(self, p0: Sequence[float]) -> "SetValuedMap2D":
        p0 = np.asarray(p0, dtype=float)
        return SetValuedMap2D(lambda p: [s.affine(1.0, -p0) for s in self.values(p)], f"{self.label}-p0")

    def homotopy_with_identity(self, lam: float, center: Sequence[float]) -> "SetValuedMap2D":
        """ξ ↦ (1-lam)(ξ - center) + lam F(ξ)."""
        c = np.asarray(center, dtype=float)

        def values(p: np.ndarray) -> list[HalfspaceSet]:
            return [s.affine(lam, (1.0 - lam) * (q - c)) for s, q in zip(self.values(p), p)]

        return SetValuedMap2D(values, f"homotopy({lam:g},{self.label})")


def subdifferential_map(u: ScalarField, dom: ConvexDomain, base: np.ndarray,
                        slice_samples: "int | SlicePattern" = 96, p_bound: float = 1e3,
                        slack: float = 1e-9) -> SetValuedMap2D:
    """ξ̃ ↦ outer polygon of ∂_H u at the lift of ξ̃ onto H_base (the tilde map on a slice)."""
    if dom.n != 1:
        raise ValueError("the set-valued degree is planar (H^1) only")
    base = np.asarray(base, dtype=float)
    pattern = _as_pattern(slice_samples)
    box = HalfspaceSet.box(-p_bound * np.ones(2), p_bound * np.ones(2))

    def values(w: np.ndarray) -> list[HalfspaceSet]:
        xi = hc.from_plane_arr(base, w)
        A, b = slice_constraints(u, dom, xi, pattern)
        return [box.with_constraints(A[i], b[i] + slack * (1.0 + np.abs(b[i]))) for i in range(xi.shape[0])]

    return SetValuedMap2D(values, f"subdiff({u.label})")


def distance_to_set(p: np.ndarray, s: HalfspaceSet) -> float:
    p = np.asarray(p, dtype=float)
    if s.contains(p, tol=1e-12):
        return 0.0
    poly = s.polygon()
    if poly.shape[0] == 0:
        return float("inf")
    if poly.shape[0] == 1:
        return float(np.linalg.norm(p - poly[0]))
    e = np.roll(poly, -1, axis=0) - poly
    ee = np.sum(e * e, axis=1)
    t = np.clip(np.sum((p - poly) * e, axis=1) / np.where(ee > 0, ee, 1.0), 0.0, 1.0)
    return float(np.min(np.linalg.norm(poly + t[:, None] * e - p, axis=1)))


# ------------------------------------------------------ approximate selector


@dataclass
class ApproxSelector:
    """Bilinear interpolation over an eps-net of node values chosen as min-norm points of F.

    Nodes outside the closed region borrow the value set of their nearest region
    point, so every value used at y comes from F within eps of y.
    """

    F: SetValuedMap2D
    region: PlanarRegion
    eps: float
    spacing: float
    origin: np.ndarray
    cache: dict = field(default_factory=dict, repr=False)

    def node_values(self, idx: np.ndarray) -> np.ndarray:
        keys = [tuple(k) for k in idx.reshape(-1, 2).tolist()]
        missing = sorted({k for k in keys if k not in self.cache})
        if missing:
            nodes = self.origin + self.spacing * np.asarray(missing, dtype=float)
            src = self.region.project(nodes)
            for k, s in zip(missing, self.F(src)):
                try:
                    self.cache[k] = s.min_norm_point()
                except ValueError as exc:
                    raise DegreeError(f"empty value set at node {k}") from exc
        return np.asarray([self.cache[k] for k in keys]).reshape(idx.shape[:-1] + (2,))

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        rel = (y - self.origin) / self.spacing
        i0 = np.floor(rel).astype(np.int64)
        fr = rel - i0
        corners = np.array([[0, 0], [1, 0], [0, 1], [1, 1]])
        idx = i0[:, None, :] + corners[None, :, :]
        vals = self.node_values(idx)
        wx, wy = fr[:, 0], fr[:, 1]
        w = np.stack([(1 - wx) * (1 - wy), wx * (1 - wy), (1 - wx) * wy, wx * wy], axis=1)
        return np.einsum("mc,mck->mk", w, vals)

    def sources(self, y: np.ndarray) -> np.ndarray:
        """Region points whose value sets feed f_eps(y), shape (m, 4, 2)."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        i0 = np.floor((y - self.origin) / self.spacing).astype(np.int64)
        corners = np.array([[0, 0], [1, 0], [0, 1], [1, 1]])
        nodes = self.origin + self.spacing * (i0[:, None, :] + corners[None]).astype(float)
        return self.region.project(nodes.reshape(-1, 2)).reshape(-1, 4, 2)


def approx_selector(F: SetValuedMap2D, region: PlanarRegion, eps: float, spacing_factor: float = 1.0 / 3.0) -> ApproxSelector:
    """Continuous selector whose node sources lie within eps of every evaluation point.

    With node spacing h = eps/3 a corner is within h√2 of y and its projection onto
    the region within 2h√2 < eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    lo, _ = region.bbox()
    h = eps * spacing_factor
    return ApproxSelector(F, region, eps, h, lo - h)


def selector_containment(sel: ApproxSelector, probes: np.ndarray, ball_samples: int = 8) -> np.ndarray:
    """For each probe y, min over sources y' in B(y, eps) of dist(f_eps(y), F(y')) minus eps.

    Nonpositive entries mean f_eps(y) ∈ F(B(y, eps) ∩ U) + B(0, eps) was witnessed.
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    vals = sel(probes)
    ang = 2 * np.pi * np.arange(ball_samples) / ball_samples
    ring = 0.5 * sel.eps * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    out = np.empty(probes.shape[0])
    for i, (y, v) in enumerate(zip(probes, vals)):
        cand = np.vstack([y[None], sel.sources(y)[0], sel.region.project(y + ring)])
        cand = cand[np.linalg.norm(cand - y, axis=1) < sel.eps]
        out[i] = min(distance_to_set(v, s) for s in sel.F(cand)) - sel.eps
    return out


# -------------------------------------------------------- set-valued degree


@dataclass
class SVDegreeResult:
    degree: int
    per_eps: list[tuple[float, int]]
    boundary_gap: float


def boundary_gap(F: SetValuedMap2D, region: PlanarRegion, y: Sequence[float], samples: int = 256) -> float:
    """min over boundary samples b of dist(y, F(b))."""
    y = np.asarray(y, dtype=float)
    return min(distance_to_set(y, s) for s in F(region.boundary_samples(samples)))


def sv_degree_trace(
    F: SetValuedMap2D,
    region: PlanarRegion,
    y: Sequence[float],
    eps_schedule: Sequence[float] = DEFAULT_EPS_SCHEDULE,
    boundary_samples: int = 256,
    delta: Optional[float] = None,
    winding_samples: int = 128,
    stable_tail: int = 3,
) -> SVDegreeResult:
    y = np.asarray(y, dtype=float)
    gap = boundary_gap(F, region, y, boundary_samples)
    need = delta if delta is not None else 2.0 * min(eps_schedule)
    if gap <= need:
        raise DegreeError(f"target within {gap:.3g} of the boundary values; degree undefined")
    per_eps: list[tuple[float, int]] = []
    for eps in sorted(eps_schedule, reverse=True):
        sel = approx_selector(F, region, eps)
        per_eps.append((float(eps), brouwer_degree_2d(sel, region, y, base_samples=winding_samples)))
    tail = [d for _, d in per_eps[-stable_tail:]]
    if len(tail) < stable_tail or len(set(tail)) != 1:
        raise DegreeError(f"degree did not stabilise over the eps schedule: {per_eps}")
    return SVDegreeResult(tail[-1], per_eps, float(gap))


def sv_degree(F: SetValuedMap2D, region: PlanarRegion, y: Sequence[float],
              eps_schedule: Sequence[float] = DEFAULT_EPS_SCHEDULE, **kwargs) -> int:
    return sv_degree_trace(F, region, y, eps_schedule, **kwargs).degree
