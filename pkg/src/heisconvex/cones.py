"""Slicing cones over convex bases and checks of their support properties."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import heis_core as hc
from .domains import ConvexDomain, DomainError, slice_boundary_samples, slice_diameter, slice_exit
from .fields import ScalarField
from .heis_core import Point
from .subdiff import NOT_REFUTED, REFUTED, SlicePattern, Verdict, slice_constraints


@dataclass
class SlicingCone:
    vertex: Point
    c_v: float
    c_b: float
    base: ConvexDomain
    as_field: ScalarField
    vertex_boundary: np.ndarray = field(repr=False, default=None)

    def lam(self, pts: np.ndarray) -> np.ndarray:
        return cone_lambda(self.base, self.vertex.as_array(), pts)


def cone_lambda(base: ConvexDomain, xi0: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """λ of the Euclidean projection onto H_xi0, measured along rays of the slice from xi0."""
    pts = np.asarray(pts, dtype=float)
    proj = hc.project_to_plane_arr(xi0, pts)
    w = hc.pr1(proj) - hc.pr1(xi0)
    r = np.linalg.norm(w, axis=-1)
    lam = np.zeros(r.shape)
    nz = r > 0
    if np.any(nz):
        dirs = w[nz] / r[nz][:, None]
        bases = np.broadcast_to(xi0, dirs.shape[:-1] + (xi0.size,))
        s = slice_exit(base, bases, hc.pr1(bases), dirs)
        lam[nz] = r[nz] / s
    return lam


def make_slicing_cone(base: ConvexDomain, xi0: Point, c_v: float, c_b: float) -> SlicingCone:
    if not c_v < c_b <= 0:
        raise ValueError("cone levels must satisfy c_v < c_b <= 0")
    x0 = xi0.as_array()
    if not base.contains_point(xi0):
        raise DomainError("cone vertex lies outside the base")
    try:
        first = slice_boundary_samples(base, x0, K=8)[0]
    except DomainError as exc:
        raise DomainError("slice through the vertex is unbounded or degenerate") from exc
    if np.linalg.norm(hc.pr1(first) - hc.pr1(x0)) <= 1e-12:
        raise DomainError("slice through the vertex is degenerate")
    rise = c_b - c_v

    def fn(p: np.ndarray) -> np.ndarray:
        return c_v + rise * cone_lambda(base, x0, p)

    label = f"slicing-cone(c_v={c_v:g},c_b={c_b:g},{base.label})"
    f = ScalarField(fn, base.n, label, meta={"vertex": x0.tolist(), "c_v": c_v, "c_b": c_b})
    return SlicingCone(xi0, float(c_v), float(c_b), base, f, first)


def cone_r0(cone: SlicingCone, K: int = 256) -> tuple[float, float]:
    """(r0, slice diameter) with r0 = (c_b - c_v) / diam_H of the vertex slice."""
    diam = slice_diameter(cone.base, cone.vertex.as_array(), K)
    return (cone.c_b - cone.c_v) / diam, diam


def disk_grid(radius: float, per_axis: int = 21, k: int = 2) -> np.ndarray:
    axis = np.linspace(-radius, radius, per_axis)
    g = np.stack(np.meshgrid(*[axis] * k, indexing="ij"), -1).reshape(-1, k)
    return g[np.linalg.norm(g, axis=1) <= radius * (1 + 1e-12)]


def cone_property_check(
    cone: SlicingCone,
    per_axis: int = 21,
    boundary_samples: int = 1000,
    slice_samples: "int | SlicePattern" = 384,
    shrink: float = 0.95,
    tol: float = 1e-9,
) -> dict:
    """Ball-in-subdifferential at the vertex and the strict support margin on the slice boundary."""
    x0 = cone.vertex.as_array()
    r0, diam = cone_r0(cone)
    P = disk_grid(shrink * r0, per_axis, 2 * cone.base.n)
    pattern = slice_samples if isinstance(slice_samples, SlicePattern) else SlicePattern.from_count(int(slice_samples))
    A, b = slice_constraints(cone.as_field, cone.base, x0, pattern)
    viol = P @ A[0].T - b[0]
    worst = viol.max(axis=1)
    verdicts = np.where(worst > tol, REFUTED, NOT_REFUTED)
    bpts = slice_boundary_samples(cone.base, x0, K=boundary_samples)
    vb = cone.as_field(bpts)
    a = hc.pr1(bpts) - hc.pr1(x0)
    margins = vb[None, :] - cone.c_v - P @ a.T
    return {
        "r0": r0,
        "slice_diameter": diam,
        "grid_points": int(P.shape[0]),
        "not_refuted": int(np.sum(verdicts == NOT_REFUTED)),
        "all_not_refuted": bool(np.all(verdicts == NOT_REFUTED)),
        "worst_violation": float(worst.max()),
        "boundary_samples": int(bpts.shape[0]),
        "boundary_value_error": float(np.max(np.abs(vb - cone.c_b))),
        "min_strict_margin": float(margins.min()),
        "strict_support": bool(margins.min() > 0),
    }


def overshoot_probe(
    cone: SlicingCone, factor: float = 1.5, slice_samples: "int | SlicePattern" = 384, tol: float = 1e-9
) -> tuple[Verdict, np.ndarray]:
    """Test p = factor*r0 along the direction from the vertex to its farthest slice boundary point."""
    x0 = cone.vertex.as_array()
    r0, _ = cone_r0(cone)
    bpts = slice_boundary_samples(cone.base, x0, K=512)
    a = hc.pr1(bpts) - hc.pr1(x0)
    far = a[np.argmax(np.linalg.norm(a, axis=1))]
    p = factor * r0 * far / np.linalg.norm(far)
    pattern = slice_samples if isinstance(slice_samples, SlicePattern) else SlicePattern.from_count(int(slice_samples))
    A, b = slice_constraints(cone.as_field, cone.base, x0, pattern)
    viol = A[0] @ p - b[0]
    return (REFUTED if viol.max() > tol else NOT_REFUTED), p


def apex_cone(dom: ConvexDomain, center: Point, depth: float = 1.0) -> ScalarField:
    """depth*(ρ - 1) with ρ the Minkowski functional of the domain about ``center``.

    Euclidean convex, equal to -depth at the centre and to 0 on the boundary.
    """
    c = center.as_array()
    if not dom.contains_point(center):
        raise DomainError("apex must lie inside the domain")

    def fn(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        d = p - c
        r = np.linalg.norm(d, axis=-1)
        rho = np.zeros(r.shape)
        nz = r > 0
        if np.any(nz):
            s = dom.ray_exit(np.broadcast_to(c, d[nz].shape), d[nz])
            rho[nz] = 1.0 / s
        return depth * (rho - 1.0)

    return ScalarField(fn, dom.n, f"apex-cone({dom.label})", meta={"center": c.tolist(), "depth": depth})
