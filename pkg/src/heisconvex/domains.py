"""Convex bodies in H^n given by membership oracles.

A domain answers batched membership queries and ray exits. Horizontal slices,
gauge distances to the boundary, the quantity D(xi) and the horizontal slicing
diameter are all built from those two primitives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from . import heis_core as hc
from .heis_core import Point
from .sampling import ball_points, sphere_directions, unit_cube

ContainsFn = Callable[[np.ndarray], np.ndarray]
ExitFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

BISECT_MAX_ITER = 60
BISECT_REL_WIDTH = 1e-10


class DomainError(ValueError):
    """Raised for queries outside a domain or on a malformed oracle."""


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    resolution: float
    bias: Literal["outer", "inner", "unbiased-sample"]

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError("measure must be nonnegative")


@dataclass
class ConvexDomain:
    """Open convex set with a batched membership oracle and a bounding box.

    ``exit_fn(origins, dirs)`` may supply exact ray exits; when absent exits are
    found by bisection against ``contains``.
    """

    contains_fn: ContainsFn
    lo: np.ndarray
    hi: np.ndarray
    label: str
    exit_fn: Optional[ExitFn] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        hc.dim_n(self.lo)
        if self.lo.shape != self.hi.shape or np.any(self.hi <= self.lo):
            raise ValueError("bounding box must satisfy lo < hi componentwise")

    @property
    def n(self) -> int:
        return hc.dim_n(self.lo)

    @property
    def dim(self) -> int:
        return self.lo.size

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        inside_box = np.all((pts > self.lo) & (pts < self.hi), axis=-1)
        out = np.zeros(pts.shape[:-1], dtype=bool)
        if np.any(inside_box):
            out[inside_box] = np.asarray(self.contains_fn(pts[inside_box]), dtype=bool)
        return out

    def contains_point(self, p: Point) -> bool:
        return bool(self.contains(p.as_array()))

    def box_exit(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        return _box_exit(self.lo, self.hi, origins, dirs)

    def ray_exit(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Parameter s > 0 where origin + s*dir leaves the domain (origins inside)."""
        origins = np.asarray(origins, dtype=float)
        dirs = np.asarray(dirs, dtype=float)
        origins, dirs = np.broadcast_arrays(origins, dirs)
        if self.exit_fn is not None:
            return np.asarray(self.exit_fn(origins, dirs), dtype=float)
        return bisect_exit(self.contains, origins, dirs, self.box_exit(origins, dirs))

    def volume_box(self) -> float:
        return float(np.prod(self.hi - self.lo))


def bisect_exit(
    contains: ContainsFn, origins: np.ndarray, dirs: np.ndarray, s_max: np.ndarray
) -> np.ndarray:
    shape = origins.shape[:-1]
    o = origins.reshape(-1, origins.shape[-1])
    d = dirs.reshape(-1, dirs.shape[-1])
    hi = np.asarray(s_max, dtype=float).reshape(-1) * (1.0 + 1e-12)
    if not np.all(np.isfinite(hi)):
        raise DomainError("zero direction in ray query")
    if np.any(contains(o + hi[:, None] * d)):
        raise DomainError("ray never exits the bounding box; membership oracle is not convex")
    lo = np.zeros_like(hi)
    tol = BISECT_REL_WIDTH * np.maximum(hi, 1e-300)
    active = np.ones(hi.shape, dtype=bool)
    for _ in range(BISECT_MAX_ITER):
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        mid = 0.5 * (lo[idx] + hi[idx])
        inside = contains(o[idx] + mid[:, None] * d[idx])
        lo[idx] = np.where(inside, mid, lo[idx])
        hi[idx] = np.where(inside, hi[idx], mid)
        active[idx] = (hi[idx] - lo[idx]) > tol[idx]
    return (0.5 * (lo + hi)).reshape(shape)


# ------------------------------------------------------------------- slices


@dataclass
class SliceRegion:
    """The slice dom ∩ H_base charted by first-layer coordinates."""

    frame: hc.HPlaneFrame
    domain: ConvexDomain

    @property
    def bbox2d(self) -> tuple[np.ndarray, np.ndarray]:
        k = 2 * self.domain.n
        return self.domain.lo[:k], self.domain.hi[:k]

    def contains2d(self, w: np.ndarray) -> np.ndarray:
        return self.domain.contains(self.frame.from_plane(w))

    def is_empty(self, probes: int = 4096, seed: int = 0) -> bool:
        lo, hi = self.bbox2d
        pts = lo + (hi - lo) * unit_cube(probes, lo.size, seed)
        return not bool(np.any(self.contains2d(pts)))


def slice_region(dom: ConvexDomain, base: Point) -> SliceRegion:
    return SliceRegion(hc.slice_frame(base), dom)


def lift_dirs(base: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Linear part of the plane chart: first-layer directions as vectors in R^{2n+1}."""
    base = np.asarray(base, dtype=float)
    return hc.from_plane_arr(base, dirs) - hc.from_plane_arr(base, np.zeros_like(dirs))


def slice_exit(
    dom: ConvexDomain, bases: np.ndarray, origins2d: np.ndarray, dirs2d: np.ndarray
) -> np.ndarray:
    """Batched exit parameter of first-layer rays inside the slices H_base ∩ dom."""
    o3 = hc.from_plane_arr(bases, origins2d)
    d3 = lift_dirs(bases, dirs2d)
    return dom.ray_exit(o3, d3)


def ray_boundary(slc: SliceRegion, origin: np.ndarray, direction: np.ndarray) -> tuple[float, np.ndarray]:
    """Exit parameter and exit point of the ray origin + s*direction in the slice."""
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if not np.any(direction):
        raise DomainError("direction must be nonzero")
    if not bool(slc.contains2d(origin)):
        raise DomainError("ray origin lies outside the slice")
    base = slc.frame.base.as_array()
    s = float(slice_exit(slc.domain, base, origin, direction))
    return s, origin + s * direction


def slice_lambda(slc: SliceRegion, origin: np.ndarray, w: np.ndarray) -> float:
    """Ratio |w - origin| / |boundary - origin| along the ray from origin through w."""
    direction = np.asarray(w, dtype=float) - np.asarray(origin, dtype=float)
    if not np.any(direction):
        return 0.0
    s, _ = ray_boundary(slc, origin, direction)
    return 1.0 / s


# ---------------------------------------------------------- gauge distances


def _require_inside(dom: ConvexDomain, pts: np.ndarray) -> None:
    if not np.all(dom.contains(pts)):
        raise DomainError("query point lies outside the domain")


def boundary_points(dom: ConvexDomain, xi: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Exit points of Euclidean rays from each xi (N, d) along dirs (K, d) -> (N, K, d)."""
    o = np.broadcast_to(xi[:, None, :], (xi.shape[0], dirs.shape[0], xi.shape[1]))
    d = np.broadcast_to(dirs[None, :, :], o.shape)
    s = dom.ray_exit(o, d)
    return o + s[..., None] * d


def gauge_exit_radius(dom: ConvexDomain, xi: np.ndarray, omega: np.ndarray, levels: int = 44, iters: int = 48) -> np.ndarray:
    """First r > 0 with xi·δ_r(omega) outside Ω, for gauge-one omega; shape (N, K).

    The curve r -> xi·δ_r(omega) is scanned on a geometric grid and the first exit is bisected.
    Since N(δ_r omega) = r, each value is an exact gauge distance to a boundary point.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    om = np.asarray(omega, dtype=float)
    if om.ndim == 2:
        om = np.broadcast_to(om, (xi.shape[0],) + om.shape)
    base = xi[:, None, :]
    width = float(np.max(dom.hi - dom.lo))
    zmax = float(np.max(np.abs(np.concatenate([dom.lo[:-1], dom.hi[:-1]]))))
    r_hi = 2.0 * (width + np.sqrt(width) + 2 * zmax * width)

    def inside(r: np.ndarray) -> np.ndarray:
        step = om * r[..., None]
        step[..., -1] *= r
        return dom.contains(hc.mul_arr(base, step))

    grid = r_hi * 2.0 ** (-np.arange(levels, -1, -1) / 2.0)
    lo = np.zeros(om.shape[:-1])
    hi = np.full(om.shape[:-1], np.nan)
    for r in grid:
        todo = np.isnan(hi)
        if not np.any(todo):
            break
        ins = inside(np.full(lo.shape, r))
        hi = np.where(todo & ~ins, r, hi)
        lo = np.where(todo & ins, r, lo)
    if np.any(np.isnan(hi)):
        raise DomainError("gauge ray never leaves the domain")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ins = inside(mid)
        lo = np.where(ins, mid, lo)
        hi = np.where(ins, hi, mid)
    return 0.5 * (lo + hi)


def dist_h_boundary_arr(dom: ConvexDomain, xi: np.ndarray, K: int = 256, seed: int = 0) -> np.ndarray:
    """Upper estimate of dist_H(xi, ∂Ω) from K quasi-uniform gauge-sphere directions.

    Exact in the limit of dense directions, and covariant under dilations.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    _require_inside(dom, xi)
    return np.min(gauge_exit_radius(dom, xi, gauge_sphere(K, dom.n, seed)), axis=1)


def dist_h_boundary_refined(
    dom: ConvexDomain, xi: np.ndarray, K: int = 256, starts: int = 3, iters: int = 40, trials: int = 8, seed: int = 0
) -> np.ndarray:
    """The sampled estimate polished by a shrinking random search over gauge-sphere directions.

    The best ``starts`` directions per point are perturbed with step 0.25·0.8^k at iteration k
    and renormalised to gauge one; improvements are accepted. Vectorised over all points.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    _require_inside(dom, xi)
    om = gauge_sphere(K, dom.n, seed)
    r = gauge_exit_radius(dom, xi, om)
    order = np.argsort(r, axis=1)[:, :starts]
    cur = om[order]
    best = np.take_along_axis(r, order, axis=1)
    rng = np.random.default_rng(seed)
    N, S, d = cur.shape
    for k in range(iters):
        step = 0.25 * 0.8**k
        trial = cur[:, :, None, :] + step * rng.normal(size=(N, S, trials, d))
        f = 1.0 / hc.gauge_arr(trial)
        trial[..., :-1] *= f[..., None]
        trial[..., -1] *= f * f
        val = gauge_exit_radius(dom, xi, trial.reshape(N, S * trials, d)).reshape(N, S, trials)
        j = np.argmin(val, axis=-1)
        vbest = np.take_along_axis(val, j[..., None], axis=-1)[..., 0]
        better = vbest < best
        dbest = np.take_along_axis(trial, j[..., None, None], axis=2)[:, :, 0, :]
        cur = np.where(better[..., None], dbest, cur)
        best = np.where(better, vbest, best)
    return best.min(axis=1)


def dist_h_boundary(dom: ConvexDomain, xi: Point, K: int = 256, seed: int = 0) -> float:
    return float(dist_h_boundary_arr(dom, xi.as_array()[None, :], K, seed)[0])


def slice_dist_arr(dom: ConvexDomain, zeta: np.ndarray, K: int = 64, seed: int = 0) -> np.ndarray:
    """Upper estimate of the in-plane distance from each zeta to ∂Ω ∩ H_zeta."""
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    dirs = sphere_directions(K, 2 * dom.n, seed)
    bases = np.broadcast_to(zeta[:, None, :], (zeta.shape[0], dirs.shape[0], zeta.shape[1]))
    w0 = hc.pr1(bases)
    d2 = np.broadcast_to(dirs[None, :, :], w0.shape)
    s = slice_exit(dom, bases, w0, d2)
    return np.min(s, axis=1)


def gauge_sphere(count: int, n: int, seed: int = 0) -> np.ndarray:
    """Quasi-uniform points with gauge exactly one."""
    v = sphere_directions(count, 2 * n + 1, seed)
    f = 1.0 / hc.gauge_arr(v)
    out = v * f[:, None]
    out[:, -1] *= f
    return out


def gauge_ball_offsets(count: int, n: int, seed: int = 0, shells: tuple[float, ...] = (1.0, 2 / 3, 1 / 3)) -> np.ndarray:
    """Offsets omega with N(omega) <= 1: the origin, gauge-sphere shells and interior fill."""
    pieces = [np.zeros((1, 2 * n + 1))]
    per = max(1, count // (len(shells) + 1))
    sph = gauge_sphere(per, n, seed)
    for r in shells:
        pieces.append(hc.dilate_arr(r, sph))
    fill = 1.5 * ball_points(4 * per, 2 * n + 1, seed + 1)
    fill = fill[hc.gauge_arr(fill) <= 1.0][:per]
    pieces.append(fill)
    return np.concatenate(pieces)


def dist_slice_boundary_and_D_arr(
    dom: ConvexDomain,
    xi: np.ndarray,
    M: int = 96,
    K_dist: int = 256,
    K_slice: int = 48,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (dist_H to ∂Ω, in-slice distance at xi, D(xi)) for each row of xi."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    _require_inside(dom, xi)
    dist = dist_h_boundary_arr(dom, xi, K_dist, seed)
    d_slice = slice_dist_arr(dom, xi, K_slice, seed)
    offs = gauge_ball_offsets(M, dom.n, seed)
    D = np.empty(xi.shape[0])
    for i in range(xi.shape[0]):
        r = dist[i] / 3.0
        zeta = hc.mul_arr(xi[i], hc.dilate_arr(r, offs)) if r > 0 else xi[i][None, :]
        zeta = zeta[dom.contains(zeta)]
        D[i] = min(d_slice[i], float(np.min(slice_dist_arr(dom, zeta, K_slice, seed))))
    return dist, d_slice, D


def dist_slice_boundary_and_D(dom: ConvexDomain, xi: Point, M: int = 96, seed: int = 0) -> tuple[float, float]:
    _, d_slice, D = dist_slice_boundary_and_D_arr(dom, xi.as_array()[None, :], M=M, seed=seed)
    return float(d_slice[0]), float(D[0])


# --------------------------------------------------------- slicing diameter


def grid_points(dom: ConvexDomain, per_axis: int) -> np.ndarray:
    """Cell-centred grid of the bounding box restricted to the domain."""
    axes = [lo + (np.arange(per_axis) + 0.5) * (hi - lo) / per_axis for lo, hi in zip(dom.lo, dom.hi)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dom.dim)
    return mesh[dom.contains(mesh)]


def slice_boundary_samples(dom: ConvexDomain, base: np.ndarray, K: int = 64, seed: int = 0) -> np.ndarray:
    """Points of ∂Ω ∩ H_base reached by K in-plane rays from base (base must be inside)."""
    dirs = sphere_directions(K, 2 * dom.n, seed, with_axes=False) if dom.n > 1 else _circle(K)
    bases = np.broadcast_to(base, (dirs.shape[0], base.size))
    s = slice_exit(dom, bases, hc.pr1(bases), dirs)
    return hc.from_plane_arr(base, hc.pr1(base) + s[:, None] * dirs)


def _circle(K: int) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(K) / K
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


def slice_diameter(dom: ConvexDomain, base: np.ndarray, K: int = 64, seed: int = 0) -> float:
    bp = slice_boundary_samples(dom, base, K, seed)
    d = hc.dist_arr(bp[:, None, :], bp[None, :, :])
    return float(np.max(d))


def diam_hs(dom: ConvexDomain, base_grid: int = 7, K: int = 64, seed: int = 0) -> float:
    """Lower estimate of the horizontal slicing diameter over a grid of base points."""
    bases = grid_points(dom, base_grid)
    if bases.shape[0] == 0:
        raise DomainError("no grid point falls inside the domain")
    return max(slice_diameter(dom, b, K, seed) for b in bases)


# ------------------------------------------------------------- constructors


def koranyi_ball(R: float = 1.0, n: int = 1, center: Optional[Point] = None) -> ConvexDomain:
    if R <= 0:
        raise ValueError("radius must be positive")
    lo = np.concatenate([-R * np.ones(2 * n), [-R * R]])

    def exit_fn(o: np.ndarray, d: np.ndarray) -> np.ndarray:
        # N^4 along the ray is a convex quartic; Newton from the bounding-box exit
        # (where it is nonnegative) decreases monotonically onto the unique root.
        oz, dz = o[..., :-1], d[..., :-1]
        a, b, c = np.sum(dz * dz, -1), 2 * np.sum(oz * dz, -1), np.sum(oz * oz, -1)
        t0, dt = o[..., -1], d[..., -1]
        s = _box_exit(lo, -lo, o, d)
        r4 = R**4
        for _ in range(100):
            q = (a * s + b) * s + c
            t = t0 + s * dt
            f = q * q + t * t - r4
            fp = 2 * q * (2 * a * s + b) + 2 * t * dt
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(fp > 0, f / fp, 0.0)
            s = s - step
            if np.all(np.abs(step) <= 1e-13 * np.maximum(s, 1e-300)):
                break
        return s

    dom = ConvexDomain(lambda p: hc.gauge_arr(p) < R, lo, -lo, f"koranyi-ball(R={R:g})", exit_fn)
    return dom if center is None else translated(dom, center)


def _quadratic_exit(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Largest root of a s^2 + b s + c = 0 (c < 0 for interior origins)."""
    disc = np.maximum(b * b - 4.0 * a * c, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        root = (-b + np.sqrt(disc)) / (2.0 * a)
    return np.where(a > 0, root, np.inf)


def cylinder(r: float = 1.0, h: float = 1.0, n: int = 1) -> ConvexDomain:
    """{|z| < r, |t| < h}."""
    if r <= 0 or h <= 0:
        raise ValueError("cylinder radius and half-height must be positive")

    def contains(p: np.ndarray) -> np.ndarray:
        z2 = np.sum(p[..., :-1] ** 2, axis=-1)
        return (z2 < r * r) & (np.abs(p[..., -1]) < h)

    def exit_fn(o: np.ndarray, d: np.ndarray) -> np.ndarray:
        oz, dz = o[..., :-1], d[..., :-1]
        s_disk = _quadratic_exit(np.sum(dz * dz, -1), 2 * np.sum(oz * dz, -1), np.sum(oz * oz, -1) - r * r)
        dt, ot = d[..., -1], o[..., -1]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            s_slab = np.where(dt > 0, (h - ot) / dt, np.where(dt < 0, (-h - ot) / dt, np.inf))
        return np.minimum(s_disk, s_slab)

    lo = np.concatenate([-r * np.ones(2 * n), [-h]])
    return ConvexDomain(contains, lo, -lo, f"cylinder(r={r:g},h={h:g})", exit_fn)


def ellipsoid(center: np.ndarray, shape: np.ndarray, label: str = "ellipsoid") -> ConvexDomain:
    """{(p - c)^T A (p - c) < 1} for symmetric positive definite A."""
    c = np.asarray(center, dtype=float)
    A = np.asarray(shape, dtype=float)
    A = 0.5 * (A + A.T)
    if np.min(np.linalg.eigvalsh(A)) <= 0:
        raise ValueError("ellipsoid matrix must be positive definite")
    half = np.sqrt(np.diag(np.linalg.inv(A)))

    def q(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("...i,ij,...j->...", u, A, v)

    def contains(p: np.ndarray) -> np.ndarray:
        u = p - c
        return q(u, u) < 1.0

    def exit_fn(o: np.ndarray, d: np.ndarray) -> np.ndarray:
        u = o - c
        return _quadratic_exit(q(d, d), 2 * q(u, d), q(u, u) - 1.0)

    return ConvexDomain(contains, c - half, c + half, label, exit_fn)


def random_ellipsoid(seed: int = 0, n: int = 1) -> ConvexDomain:
    rng = np.random.default_rng(seed)
    d = 2 * n + 1
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    axes = rng.uniform(0.5, 1.5, size=d)
    A = Q @ np.diag(1.0 / axes**2) @ Q.T
    center = rng.uniform(-0.3, 0.3, size=d)
    return ellipsoid(center, A, f"ellipsoid(seed={seed})")


def _box_exit(lo: np.ndarray, hi: np.ndarray, o: np.ndarray, d: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        s_hi = np.where(d > 0, (hi - o) / d, np.inf)
        s_lo = np.where(d < 0, (lo - o) / d, np.inf)
    return np.min(np.minimum(s_hi, s_lo), axis=-1)


def box(lo: np.ndarray, hi: np.ndarray) -> ConvexDomain:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return ConvexDomain(
        lambda p: np.ones(p.shape[:-1], dtype=bool), lo, hi, "box", lambda o, d: _box_exit(lo, hi, o, d)
    )


def dilated(dom: ConvexDomain, lam: float) -> ConvexDomain:
    """The image δ_λ(Ω)."""
    if lam <= 0:
        raise ValueError("dilation factor must be positive")
    inv = 1.0 / lam
    exit_fn = None
    if dom.exit_fn is not None:
        inner = dom.exit_fn
        exit_fn = lambda o, d: inner(hc.dilate_arr(inv, o), hc.dilate_arr(inv, d))  # noqa: E731
    return ConvexDomain(
        lambda p: dom.contains(hc.dilate_arr(inv, p)),
        hc.dilate_arr(lam, dom.lo),
        hc.dilate_arr(lam, dom.hi),
        f"dilate({lam:g},{dom.label})",
        exit_fn,
        dict(dom.meta),
    )


def sublevel(dom: ConvexDomain, f: Callable[[np.ndarray], np.ndarray], level: float, label: str = "") -> ConvexDomain:
    """{ξ ∈ Ω : f(ξ) < level}; convex whenever f is Euclidean convex."""

    def contains(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        inside = dom.contains(p)
        out = np.zeros(p.shape[:-1], dtype=bool)
        if np.any(inside):
            out[inside] = np.asarray(f(p[inside])) < level
        return out

    return ConvexDomain(contains, dom.lo.copy(), dom.hi.copy(), label or f"{{f<{level:g}}}∩{dom.label}", None, dict(dom.meta))


def translated(dom: ConvexDomain, g: Point) -> ConvexDomain:
    """The left translate g ∘ Ω."""
    ga = g.as_array()
    gi = hc.inv_arr(ga)
    corners = np.stack(np.meshgrid(*[[lo, hi] for lo, hi in zip(dom.lo, dom.hi)], indexing="ij"), -1)
    corners = hc.mul_arr(ga, corners.reshape(-1, dom.dim))
    exit_fn = None
    if dom.exit_fn is not None:
        inner = dom.exit_fn
        exit_fn = lambda o, d: inner(hc.mul_arr(gi, o), lift_dirs(gi, hc.pr1(d)) + _t_only(d))  # noqa: E731
    return ConvexDomain(
        lambda p: dom.contains(hc.mul_arr(gi, p)),
        corners.min(axis=0) - 1e-12,
        corners.max(axis=0) + 1e-12,
        f"translate({dom.label})",
        exit_fn,
        dict(dom.meta),
    )


def _t_only(d: np.ndarray) -> np.ndarray:
    out = np.zeros_like(d)
    out[..., -1] = d[..., -1]
    return out
