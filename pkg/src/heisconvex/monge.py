"""The horizontal Monge-Ampère operator on H^1 and its quadrature experiments."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np

from .domains import ConvexDomain
from .fields import ScalarField, horizontal_gradient_arr, horizontal_hessian_sym_T_arr
from .heis_core import Point
from .subdiff import PGrid


class MongeError(ValueError):
    pass


def s_ma_arr(u: ScalarField, pts: np.ndarray, h: float = 1e-3, analytic: bool = True) -> np.ndarray:
    """det of the symmetrised horizontal Hessian plus 12 (Tu)^2, batched (n = 1 only)."""
    if u.n != 1:
        raise MongeError("the operator is defined on H^1 only")
    H, Tu = horizontal_hessian_sym_T_arr(u, pts, h, analytic=analytic and u.hess_fn is not None)
    det = H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] * H[..., 1, 0]
    return det + 12.0 * Tu**2


def s_ma_pointwise(u: ScalarField, xi: Point, h: float = 1e-3, analytic: bool = False) -> float:
    val = float(s_ma_arr(u, xi.as_array()[None, :], h, analytic)[0])
    if not math.isfinite(val):
        raise MongeError(f"S_ma is not finite at {xi}")
    return val


def tree_sum(v: np.ndarray) -> float:
    """Pairwise summation in a fixed order, independent of thread count."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    while v.size > 1:
        if v.size % 2:
            v = np.append(v, 0.0)
        v = v[0::2] + v[1::2]
    return float(v[0])


@dataclass
class QuadratureReport:
    value: float
    refinement_levels: list[tuple[float, float]]
    cauchy_gap: float
    chart: str = "box"
    details: dict = field(default_factory=dict)

    @property
    def relative_gap(self) -> float:
        return self.cauchy_gap / abs(self.value) if self.value else math.inf

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("level,h,value\n")
        for i, (h, v) in enumerate(self.refinement_levels):
            buf.write(f"{i},{h:.10g},{v:.12g}\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "refinement_levels": [list(x) for x in self.refinement_levels],
            "cauchy_gap": self.cauchy_gap,
            "relative_gap": self.relative_gap,
            "chart": self.chart,
            "details": self.details,
        }


def _box_level(u: ScalarField, dom: ConvexDomain, h: float, layer: float, analytic: bool, chunk: int = 200_000) -> tuple[float, float]:
    axes = [np.arange(lo + 0.5 * h, hi, h) for lo, hi in zip(dom.lo, dom.hi)]
    shape = tuple(a.size for a in axes)
    total = 0.0
    vol = 0.0
    flat = int(np.prod(shape))
    offs = np.concatenate([np.eye(dom.dim), -np.eye(dom.dim)]) * (layer * h)
    parts = []
    for start in range(0, flat, chunk):
        idx = np.unravel_index(np.arange(start, min(flat, start + chunk)), shape)
        pts = np.stack([a[i] for a, i in zip(axes, idx)], axis=-1)
        keep = dom.contains(pts)
        if layer > 0:
            for o in offs:
                keep &= dom.contains(pts + o)
        pts = pts[keep]
        vol += pts.shape[0] * h**dom.dim
        if pts.shape[0]:
            parts.append(tree_sum(s_ma_arr(u, pts, analytic=analytic)))
    total = tree_sum(np.asarray(parts)) * h**dom.dim
    return total, vol


def lens_radius(x: np.ndarray, alpha: float, beta: float, quad: float) -> np.ndarray:
    m = np.minimum(x, 2.0 - x)
    g = m**alpha - quad * 0.5 * alpha * m * m
    return np.maximum(g, 0.0) ** (1.0 / (2.0 * beta))


def _s_ma_xm(u: ScalarField, x: np.ndarray, m: np.ndarray, y: np.ndarray, t: np.ndarray) -> np.ndarray:
    hx = u.meta.get("hess_xm")
    if hx is None:
        return s_ma_arr(u, np.stack([x, y, t], axis=-1))
    H, Tu = hx(x, m, y, t)
    return H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] * H[..., 1, 0] + 12.0 * Tu**2


def _graded_level(u: ScalarField, meta: dict, n: int, grade: float) -> float:
    """Midpoint rule in (s, ρ, θ) with x = s^grade on each half of the lens and (y, t) = r(x)ρ(cos θ, sin θ)."""
    a, b, q = meta["alpha"], meta["beta"], meta["quad"]
    s = (np.arange(n) + 0.5) / n
    rho = (np.arange(n) + 0.5) / n
    th = 2 * np.pi * (np.arange(n) + 0.5) / n
    S, P, T = np.meshgrid(s, rho, th, indexing="ij")
    xh = S**grade
    dx = grade * S ** (grade - 1)
    total = []
    r = lens_radius(xh, a, b, q)
    y, t = r * P * np.cos(T), r * P * np.sin(T)
    w = dx * r * r * P
    for x in (xh, 2.0 - xh):
        total.append(tree_sum(_s_ma_xm(u, x, xh, y, t) * w))
    return tree_sum(np.asarray(total)) * (1.0 / n) * (1.0 / n) * (2 * np.pi / n)


def s_ma_integral_experiment(
    u: ScalarField,
    dom: ConvexDomain,
    levels: Sequence[float] = (0.08, 0.04, 0.02),
    chart: Literal["box", "graded"] = "box",
    layer: float = 2.0,
    analytic: bool = True,
    grade: Optional[float] = None,
) -> QuadratureReport:
    """Quadrature of S_ma(u) over Ω at decreasing mesh widths.

    box: midpoint cells of side h whose centre and its ±layer·h axis neighbours lie in Ω.
    graded: a polar chart of the lens domains graded toward x = 0 and x = 2; ``levels`` are
    then the reciprocal cell counts 1/n per chart axis.
    """
    if u.n != 1:
        raise MongeError("the operator is defined on H^1 only")
    hs = sorted((float(h) for h in levels), reverse=True)
    out: list[tuple[float, float]] = []
    details: dict = {"layer": layer, "analytic": analytic}
    if chart == "box":
        vols = []
        for h in hs:
            val, vol = _box_level(u, dom, h, layer, analytic)
            out.append((h, val))
            vols.append(vol)
        details["retained_volume"] = vols
    else:
        meta = dom.meta
        if not all(k in meta for k in ("alpha", "beta", "quad")):
            raise MongeError("graded chart needs a lens domain")
        g = grade if grade is not None else max(1.0, 1.0 / max(2 * meta["alpha"] - 1, 1e-3))
        details["grade"] = g
        for h in hs:
            out.append((h, _graded_level(u, meta, max(2, int(round(1.0 / h))), g)))
    gap = abs(out[-1][1] - out[-2][1]) if len(out) > 1 else math.inf
    return QuadratureReport(out[-1][1], out, gap, chart, details)


# ----------------------------------------------------- slice measure table


@dataclass
class SliceGrowth:
    ks: list[int]
    measures: list[float]
    window: float
    cell: float
    outside: list[int]
    window_sweep: list[tuple[float, float]] = field(default_factory=list)

    @property
    def increasing(self) -> bool:
        return bool(np.all(np.diff(self.measures) > 0))

    @property
    def factor(self) -> float:
        return self.measures[-1] / self.measures[0] if self.measures[0] > 0 else math.inf

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("k,base_x,window,measure,outside_window\n")
        for k, m, o in zip(self.ks, self.measures, self.outside):
            buf.write(f"{k},{1 / (2 * k):.10g},{self.window:.10g},{m:.10g},{o}\n")
        for w, m in self.window_sweep:
            buf.write(f"{self.ks[0]},{1 / (2 * self.ks[0]):.10g},{w:.10g},{m:.10g},\n")
        return buf.getvalue()


def _lens_x_grid(u: ScalarField, nx: int, grade: float, p_lo: float, dp: float) -> np.ndarray:
    """x in (0, 1]: a graded grid plus the preimages of a p1 ladder of step dp down to p_lo.

    On the axis y = t = 0 the first gradient component is the profile slope, which is increasing.
    """
    s = (np.arange(nx) + 0.5) / nx
    xs = [s**grade]

    def slope(x: np.ndarray) -> np.ndarray:
        pts = np.zeros(x.shape + (3,))
        pts[..., 0] = x
        return horizontal_gradient_arr(u, pts)[..., 0]

    top = float(slope(np.array([1.0]))[0])
    if p_lo < top:
        targets = np.arange(p_lo, top, dp)
        lo = np.full(targets.shape, 1e-300)
        hi = np.ones(targets.shape)
        for _ in range(200):
            mid = np.sqrt(lo * hi) if _ < 120 else 0.5 * (lo + hi)
            below = slope(mid) < targets
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        xs.append(0.5 * (lo + hi))
    return np.unique(np.concatenate(xs))


def lens_slice_points(meta: dict, base_x: float, xs: np.ndarray, ny: int) -> np.ndarray:
    """Points of A_+ ∩ H_(base_x,0,0): x in (0, 1], y >= 0, on the plane t = -2·base_x·y."""
    a, b, q = meta["alpha"], meta["beta"], meta["quad"]
    v = (np.arange(ny) + 0.5) / ny
    X, V = np.meshgrid(xs, v, indexing="ij")
    c = 2 * base_x
    Y = V * lens_radius(X, a, b, q) / np.sqrt(1 + c * c)
    return np.stack([X, Y, -c * Y], axis=-1).reshape(-1, 3)


def _slice_measure(u: ScalarField, dom: ConvexDomain, base_x: float, xs: np.ndarray, ny: int, grid: PGrid) -> tuple[float, int]:
    hit = np.zeros(grid.shape, dtype=bool)
    miss = 0
    step = max(1, 2_000_000 // ny)
    for i in range(0, xs.size, step):
        pts = lens_slice_points(dom.meta, base_x, xs[i : i + step], ny)
        pts = pts[dom.contains(pts)]
        g = horizontal_gradient_arr(u, pts)
        g = g[np.all(np.isfinite(g), axis=1)]
        idx = np.floor(np.clip((g - grid.lo) / grid.cell, -1, np.asarray(grid.shape))).astype(np.int64)
        ok = np.all((idx >= 0) & (idx < np.asarray(grid.shape)), axis=1)
        hit[tuple(idx[ok].T)] = True
        miss += int((~ok).sum())
    return float(hit.sum()) * grid.cell_volume(), miss


def slice_growth_table(
    u: ScalarField,
    dom: ConvexDomain,
    ks: Sequence[int] = range(1, 7),
    window: float = 20.0,
    cell: float = 0.05,
    nx: int = 4000,
    ny: int = 600,
    sweep: Sequence[float] = (10.0, 20.0, 40.0, 80.0),
    grade: Optional[float] = None,
) -> SliceGrowth:
    """Normal-image areas of A_+ ∩ H_(1/(2k),0,0) inside the window [-W, W]^2.

    In the open lens the field is C^1 and convex, so the normal map is the horizontal gradient;
    the area is that of the p-cells hit by gradients of slice samples whose x-grid resolves the
    profile slope to a third of a cell. ``sweep`` repeats the first slice for growing windows.
    """
    meta = dom.meta
    if not all(k in meta for k in ("alpha", "beta", "quad")):
        raise MongeError("slice table needs a lens domain")
    g = grade if grade is not None else max(1.0, 1.0 / max(2 * meta["alpha"] - 1, 1e-3))

    def run(k: int, w: float) -> tuple[float, int]:
        grid = PGrid.covering(-w * np.ones(2), w * np.ones(2), cell)
        xs = _lens_x_grid(u, nx, g, -w - cell, cell / 3)
        return _slice_measure(u, dom, 1.0 / (2 * k), xs, ny, grid)

    ms, outs = [], []
    for k in ks:
        m, o = run(k, window)
        ms.append(m)
        outs.append(o)
    sw = [(float(w), run(list(ks)[0], w)[0]) for w in sweep]
    return SliceGrowth(list(ks), ms, window, cell, outs, sw)
