"""Horizontal subdifferential queries and rasterized normal-mapping images.

Every sampled point zeta of the slice Ω ∩ H_xi contributes one half-space
``a·p <= b`` with ``a = Pr1(zeta) - Pr1(xi)`` and ``b = u(zeta) - u(xi)``. A covector
is REFUTED when some sampled half-space excludes it by more than the tolerance;
otherwise it is NOT_REFUTED at the sampled resolution.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from . import heis_core as hc
from .domains import ConvexDomain, DomainError, MeasureEstimate, slice_exit
from .fields import ScalarField, horizontal_gradient_arr
from .heis_core import Point
from .sampling import chunked, parallel_map, sphere_directions, unit_cube

Verdict = Literal["REFUTED", "NOT_REFUTED"]
REFUTED: Verdict = "REFUTED"
NOT_REFUTED: Verdict = "NOT_REFUTED"

DEFAULT_SHELLS = (1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125)
BOUNDARY_SHRINK = 1.0 - 1e-9


# ------------------------------------------------------------ half-spaces


@dataclass
class HalfspaceSet:
    """{p : A p <= b} intersected with the box [lo, hi]."""

    A: np.ndarray
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        k = self.lo.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, k)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)

    @property
    def dim(self) -> int:
        return self.lo.size

    @classmethod
    def box(cls, lo: np.ndarray, hi: np.ndarray) -> "HalfspaceSet":
        lo = np.asarray(lo, dtype=float)
        return cls(np.zeros((0, lo.size)), np.zeros(0), lo, hi)

    @classmethod
    def singleton(cls, p: np.ndarray) -> "HalfspaceSet":
        p = np.asarray(p, dtype=float)
        return cls.box(p, p.copy())

    def with_constraints(self, A: np.ndarray, b: np.ndarray) -> "HalfspaceSet":
        return HalfspaceSet(np.vstack([self.A, np.reshape(A, (-1, self.dim))]), np.concatenate([self.b, np.ravel(b)]), self.lo, self.hi)

    def contains(self, p: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        in_box = np.all((p >= self.lo - tol) & (p <= self.hi + tol), axis=-1)
        if self.A.shape[0] == 0:
            return in_box
        return in_box & np.all(p @ self.A.T <= self.b + tol, axis=-1)

    def affine(self, scale: float, shift: np.ndarray) -> "HalfspaceSet":
        """The image {scale*p + shift}; scale = 0 collapses to the point ``shift``."""
        shift = np.asarray(shift, dtype=float)
        if scale == 0:
            return HalfspaceSet.singleton(shift)
        if scale < 0:
            raise ValueError("scale must be nonnegative")
        lo, hi = scale * self.lo + shift, scale * self.hi + shift
        return HalfspaceSet(self.A, scale * self.b + self.A @ shift, lo, hi)

    def polygon(self) -> np.ndarray:
        """Vertices (counter-clockwise) of the planar set; empty array when infeasible."""
        if self.dim != 2:
            raise ValueError("polygon() is defined for planar sets only")
        (x0, y0), (x1, y1) = self.lo, self.hi
        poly = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        for (a1, a2), bb in zip(self.A.tolist(), self.b.tolist()):
            poly = _clip(poly, a1, a2, bb)
            if not poly:
                break
        return np.asarray(poly, dtype=float).reshape(-1, 2)

    def min_norm_point(self) -> np.ndarray:
        if np.all(self.hi - self.lo <= 0):
            if self.A.shape[0] and np.any(self.A @ self.lo > self.b + 1e-12):
                raise ValueError("empty value set")
            return self.lo.copy()
        poly = self.polygon()
        if poly.shape[0] == 0:
            raise ValueError("empty value set")
        return _min_norm_polygon(poly)

    def diameter(self) -> float:
        poly = self.polygon()
        if poly.shape[0] == 0:
            return 0.0
        d = poly[:, None, :] - poly[None, :, :]
        return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))


def _clip(poly: list[tuple[float, float]], a1: float, a2: float, b: float) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of a convex polygon by a1*x + a2*y <= b."""
    out: list[tuple[float, float]] = []
    m = len(poly)
    for i in range(m):
        px, py = poly[i]
        qx, qy = poly[(i + 1) % m]
        fp = a1 * px + a2 * py - b
        fq = a1 * qx + a2 * qy - b
        if fp <= 0:
            out.append((px, py))
        if (fp < 0 < fq) or (fq < 0 < fp):
            s = fp / (fp - fq)
            out.append((px + s * (qx - px), py + s * (qy - py)))
    return out


def _min_norm_polygon(poly: np.ndarray) -> np.ndarray:
    m = poly.shape[0]
    if m == 1:
        return poly[0].copy()
    nxt = np.roll(poly, -1, axis=0)
    edge = nxt - poly
    cross = edge[:, 0] * (-poly[:, 1]) - edge[:, 1] * (-poly[:, 0])
    area = 0.5 * np.sum(poly[:, 0] * nxt[:, 1] - nxt[:, 0] * poly[:, 1])
    if m >= 3 and abs(area) > 1e-300 and np.all(np.sign(cross) * np.sign(area) >= 0):
        return np.zeros(2)
    ee = np.sum(edge * edge, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.clip(np.where(ee > 0, -np.sum(poly * edge, axis=1) / ee, 0.0), 0.0, 1.0)
    cand = poly + s[:, None] * edge
    return cand[np.argmin(np.sum(cand * cand, axis=1))].copy()


# --------------------------------------------------------- slice sampling


@dataclass(frozen=True)
class SlicePattern:
    """Polar sampling of a slice: rays from the base point and radial shells on each ray."""

    directions: int = 32
    shells: tuple[float, ...] = DEFAULT_SHELLS
    seed: int = 0

    @property
    def count(self) -> int:
        return self.directions * len(self.shells)

    @classmethod
    def from_count(cls, slice_samples: int, seed: int = 0) -> "SlicePattern":
        k = max(8, int(slice_samples) // len(DEFAULT_SHELLS))
        return cls(k, DEFAULT_SHELLS, seed)

    def unit_dirs(self, n: int) -> np.ndarray:
        if n == 1:
            ang = 2.0 * np.pi * (np.arange(self.directions) + 0.5) / self.directions
            return np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return sphere_directions(self.directions, 2 * n, self.seed, with_axes=False)

    def radii(self) -> np.ndarray:
        """(directions, shells) fractions of the exit distance; outer shell hugs the boundary."""
        jitter = unit_cube(self.directions, 1, self.seed + 11)[:, 0]
        fr = np.asarray(self.shells, dtype=float)[None, :] * (0.6 + 0.4 * jitter[:, None])
        fr[:, np.argmax(self.shells)] = BOUNDARY_SHRINK * max(self.shells)
        return fr


def _as_pattern(slice_samples: "int | SlicePattern") -> SlicePattern:
    return slice_samples if isinstance(slice_samples, SlicePattern) else SlicePattern.from_count(int(slice_samples))


def slice_sample_points(dom: ConvexDomain, xi: np.ndarray, pattern: SlicePattern) -> np.ndarray:
    """Sampled points of Ω ∩ H_xi for each row of xi, shape (N, M, 2n+1)."""
    xi = np.atleast_2d(xi)
    dirs = pattern.unit_dirs(dom.n)
    bases = np.broadcast_to(xi[:, None, :], (xi.shape[0], dirs.shape[0], xi.shape[1]))
    w0 = hc.pr1(bases)
    s = slice_exit(dom, bases, w0, np.broadcast_to(dirs, w0.shape))
    rad = pattern.radii()
    w = w0[:, :, None, :] + (s[:, :, None] * rad[None, :, :])[..., None] * dirs[None, :, None, :]
    w = w.reshape(xi.shape[0], -1, 2 * dom.n)
    return hc.from_plane_arr(xi[:, None, :], w)


def slice_constraints(
    u: ScalarField, dom: ConvexDomain, xi: np.ndarray, pattern: SlicePattern
) -> tuple[np.ndarray, np.ndarray]:
    """Half-space data (A, b) of shape (N, M, 2n) and (N, M) for each base point."""
    xi = np.atleast_2d(xi)
    zeta = slice_sample_points(dom, xi, pattern)
    A = hc.pr1(zeta) - hc.pr1(xi)[:, None, :]
    b = u(zeta) - u(xi)[:, None]
    return A, b


def _check_inside(dom: ConvexDomain, xi: np.ndarray) -> None:
    if not np.all(dom.contains(np.atleast_2d(xi))):
        raise DomainError("base point lies outside the domain")


def subdiff_violation(
    u: ScalarField, dom: ConvexDomain, xi: Point, p: np.ndarray, slice_samples: "int | SlicePattern" = 192
) -> tuple[float, np.ndarray]:
    """Largest sampled violation a·p - b and the slice point achieving it."""
    x = xi.as_array()
    _check_inside(dom, x)
    pattern = _as_pattern(slice_samples)
    zeta = slice_sample_points(dom, x, pattern)[0]
    A = hc.pr1(zeta) - hc.pr1(x)
    b = u(zeta) - u(x)
    viol = A @ np.asarray(p, dtype=float) - b
    i = int(np.argmax(viol))
    return float(viol[i]), zeta[i]


def subdiff_test(
    u: ScalarField,
    dom: ConvexDomain,
    xi: Point,
    p: np.ndarray,
    slice_samples: "int | SlicePattern" = 192,
    tol: float = 1e-9,
) -> Verdict:
    viol, _ = subdiff_violation(u, dom, xi, p, slice_samples)
    return REFUTED if viol > tol else NOT_REFUTED


def subdiff_outer_polytope(
    u: ScalarField,
    dom: ConvexDomain,
    xi: Point,
    constraint_samples: "int | SlicePattern" = 192,
    p_bound: float = 1e3,
) -> HalfspaceSet:
    x = xi.as_array()
    _check_inside(dom, x)
    k = 2 * dom.n
    box = HalfspaceSet.box(-p_bound * np.ones(k), p_bound * np.ones(k))
    if isinstance(constraint_samples, int) and constraint_samples <= 0:
        return box
    A, b = slice_constraints(u, dom, x, _as_pattern(constraint_samples))
    return box.with_constraints(A[0], b[0])


# ----------------------------------------------------------------- raster


@dataclass(frozen=True)
class PGrid:
    """Regular grid of p-space cells: cell i covers lo + [i, i+1)*cell."""

    lo: np.ndarray
    cell: float
    shape: tuple[int, ...]

    @classmethod
    def covering(cls, lo: np.ndarray, hi: np.ndarray, cell: float) -> "PGrid":
        lo = np.floor(np.asarray(lo, dtype=float) / cell) * cell
        hi = np.ceil(np.asarray(hi, dtype=float) / cell) * cell
        shape = tuple(int(max(1, round(v))) for v in (hi - lo) / cell)
        return cls(lo, float(cell), shape)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def hi(self) -> np.ndarray:
        return self.lo + self.cell * np.asarray(self.shape)

    def centers(self) -> np.ndarray:
        axes = [self.lo[i] + (np.arange(m) + 0.5) * self.cell for i, m in enumerate(self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def cell_volume(self) -> float:
        return self.cell**self.dim


@dataclass
class RasterImage:
    grid: PGrid
    flags: np.ndarray
    measure: MeasureEstimate
    sources: Optional[np.ndarray] = field(default=None, repr=False)

    def flagged_centers(self) -> np.ndarray:
        return self.grid.centers()[self.flags]

    def to_csv(self) -> str:
        buf = io.StringIO()
        k = self.grid.dim
        buf.write(",".join([f"p{i + 1}" for i in range(k)] + ["flag"]) + "\n")
        cen = self.grid.centers().reshape(-1, k)
        for c, f in zip(cen, self.flags.reshape(-1)):
            buf.write(",".join(f"{v:.10g}" for v in c) + f",{int(f)}\n")
        return buf.getvalue()


def _children(idx: np.ndarray, k: int) -> np.ndarray:
    offs = np.stack(np.meshgrid(*[[0, 1]] * k, indexing="ij"), -1).reshape(-1, k)
    return (2 * idx[:, None, :] + offs[None, :, :]).reshape(-1, k)


def _raster_chunk(
    A: np.ndarray, b: np.ndarray, grid: PGrid, tol: np.ndarray, slack: float, levels: int
) -> tuple[np.ndarray, np.ndarray]:
    """Quadtree search for cell centres satisfying every half-space of each base point."""
    k = grid.dim
    shape = np.asarray(grid.shape)
    n_base = A.shape[0]
    a_l2 = np.linalg.norm(A, axis=-1)
    a_l1 = np.sum(np.abs(A), axis=-1)
    rhs = b + tol[:, None] + slack * a_l2
    side = grid.cell * 2**levels
    top = np.ceil(shape / 2**levels).astype(int)
    cells = np.stack(np.meshgrid(*[np.arange(m) for m in top], indexing="ij"), -1).reshape(-1, k)
    pair_b = np.repeat(np.arange(n_base), cells.shape[0])
    pair_c = np.tile(cells, (n_base, 1))
    for level in range(levels, -1, -1):
        side = grid.cell * 2**level
        keep = np.ones(pair_b.size, dtype=bool)
        for sl in chunked(pair_b.size, max(1000, 4_000_000 // (A.shape[1] * k))):
            bi = pair_b[sl]
            centre = grid.lo + (pair_c[sl] + 0.5) * side
            lhs = np.einsum("pmk,pk->pm", A[bi], centre)
            if level > 0:
                lhs = lhs - 0.5 * side * a_l1[bi]
            keep[sl] = np.all(lhs <= rhs[bi], axis=1)
        pair_b, pair_c = pair_b[keep], pair_c[keep]
        if level > 0:
            pair_b = np.repeat(pair_b, 2**k)
            pair_c = _children(pair_c, k)
            lim = shape // 2 ** (level - 1) + (shape % 2 ** (level - 1) > 0)
            ok = np.all(pair_c < lim, axis=1)
            pair_b, pair_c = pair_b[ok], pair_c[ok]
    return pair_b, pair_c


def normal_map_raster(
    u: ScalarField,
    dom: ConvexDomain,
    E: np.ndarray,
    p_grid: PGrid,
    slice_samples: "int | SlicePattern" = 192,
    tol: float = 1e-9,
    p_slack: Optional[float] = None,
    chunk: int = 256,
    threads: Optional[int] = None,
) -> RasterImage:
    """Flag p-cells whose centre is NOT_REFUTED at some sampled base point of E.

    ``p_slack`` widens each half-space by ``p_slack*|a|`` (a p-space distance),
    compensating for the finite density of E; it defaults to half a cell.
    """
    E = np.atleast_2d(np.asarray(E, dtype=float))
    if E.shape[0] == 0:
        raise ValueError("empty region sample E")
    _check_inside(dom, E)
    pattern = _as_pattern(slice_samples)
    slack = 0.5 * p_grid.cell if p_slack is None else float(p_slack)
    levels = int(np.ceil(np.log2(max(p_grid.shape)))) if max(p_grid.shape) > 1 else 0
    flags = np.zeros(p_grid.shape, dtype=bool)
    sources = np.full(p_grid.shape, -1, dtype=np.int64)

    def work(sl: slice) -> tuple[slice, np.ndarray, np.ndarray]:
        A, b = slice_constraints(u, dom, E[sl], pattern)
        scale = 1.0 + np.abs(u(E[sl]))
        pb, pc = _raster_chunk(A, b, p_grid, tol * scale, slack, levels)
        return sl, pb, pc

    for sl, pb, pc in parallel_map(work, chunked(E.shape[0], chunk), threads):
        idx = tuple(pc.T)
        flags[idx] = True
        src = sources[idx]
        sources[idx] = np.where(src < 0, pb + sl.start, src)
    value = float(flags.sum()) * p_grid.cell_volume()
    return RasterImage(p_grid, flags, MeasureEstimate(value, p_grid.cell, "outer"), sources)


def default_p_grid(
    u: ScalarField, pts: np.ndarray, cell: float, inflate: float = 0.5, extra: Optional[np.ndarray] = None
) -> PGrid:
    """Gradient-sample bounding box inflated by ``inflate`` of its half-width on each side."""
    g = horizontal_gradient_arr(u, pts)
    g = g[np.all(np.isfinite(g), axis=1)]
    if extra is not None:
        g = np.vstack([g, extra])
    lo, hi = g.min(axis=0), g.max(axis=0)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    half = np.maximum(half * (1.0 + inflate), 2 * cell)
    return PGrid.covering(mid - half, mid + half, cell)


# --------------------------------------------------------- region samples


def region_grid(
    dom: ConvexDomain, spacing: float, t_spacing: Optional[float] = None, anchor: Optional[np.ndarray] = None
) -> np.ndarray:
    """Lattice of the domain with horizontal spacing and a vertical spacing.

    Cell-centred in the bounding box by default; with ``anchor`` the lattice passes through that point.
    """
    t_spacing = spacing if t_spacing is None else t_spacing
    steps = [spacing] * (dom.dim - 1) + [t_spacing]
    axes = []
    for i, (lo, hi, h) in enumerate(zip(dom.lo, dom.hi, steps)):
        if anchor is None:
            m = max(1, int(np.ceil((hi - lo) / h)))
            c = 0.5 * (lo + hi)
            axes.append(c + (np.arange(m) - 0.5 * (m - 1)) * (hi - lo) / m)
        else:
            a = float(anchor[i])
            axes.append(a + h * np.arange(np.ceil((lo - a) / h), np.floor((hi - a) / h) + 1))
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, dom.dim)
    return mesh[dom.contains(mesh)]


def slice_grid(dom: ConvexDomain, base: np.ndarray, spacing: float) -> np.ndarray:
    """Lattice points of Ω ∩ H_base (first-layer spacing) lifted onto the plane."""
    k = 2 * dom.n
    axes = [np.arange(lo + 0.5 * spacing, hi, spacing) for lo, hi in zip(dom.lo[:k], dom.hi[:k])]
    w = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, k)
    pts = hc.from_plane_arr(base, w)
    return pts[dom.contains(pts)]


def gradient_lipschitz(u: ScalarField, pts: np.ndarray, h: float = 1e-3, q: float = 0.95) -> float:
    """Quantile of the first-layer Jacobian norm of the horizontal gradient over pts."""
    k = 2 * u.n
    cols = []
    for j in range(k):
        e = np.zeros(pts.shape[1])
        e[j] = h
        cols.append((horizontal_gradient_arr(u, pts + e) - horizontal_gradient_arr(u, pts - e)) / (2 * h))
    J = np.stack(cols, axis=-1)
    norms = np.linalg.norm(J, ord=2, axis=(-2, -1))
    norms = norms[np.isfinite(norms)]
    return float(np.quantile(norms, q)) if norms.size else 1.0


def slicing_measure(
    u: ScalarField,
    dom: ConvexDomain,
    bases: np.ndarray,
    p_grid: PGrid,
    slice_samples: "int | SlicePattern" = 192,
    e_spacing: float = 0.02,
    tol: float = 1e-9,
    p_slack: Optional[float] = None,
    threads: Optional[int] = None,
) -> tuple[MeasureEstimate, list[float]]:
    """max over base points of the raster measure of the image of Ω ∩ H_base."""
    per_base: list[float] = []
    for base in np.atleast_2d(bases):
        E = slice_grid(dom, base, e_spacing)
        if dom.contains(base):
            E = np.vstack([base[None, :], E])
        if E.shape[0] == 0:
            per_base.append(0.0)
            continue
        img = normal_map_raster(u, dom, E, p_grid, slice_samples, tol, p_slack, threads=threads)
        per_base.append(img.measure.value)
    return MeasureEstimate(max(per_base) if per_base else 0.0, p_grid.cell, "outer"), per_base
