"""Two-point lemma, the five-step horizontal chain, ball Harnack checks and sign propagation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import heis_core as hc
from .domains import ConvexDomain, DomainError, gauge_ball_offsets, gauge_sphere
from .fields import ScalarField
from .heis_core import Point
from .sampling import sphere_directions

C_OUTER = 3.0
A_RAD = 17.0**0.25 / 2.0
B_RAD = 8.0**0.25 / 2.0
# (c1, c2, c3) of the five moves with c = 3
STEP_CONSTANTS: tuple[tuple[float, float, float], ...] = (
    (1.0, 1.0, 1.0),
    (1.0, A_RAD, 0.5),
    (A_RAD, B_RAD, 0.5),
    (B_RAD, 0.5, 0.5),
    (0.5, 0.0, 0.5),
)
HARNACK_BOUND = 31.0
GAUGE_SLACK = 1e-12


class HarnackError(ValueError):
    """A precondition of the two-point lemma or of the chain construction failed."""


def lemma_factors(c: float, c1: float, c2: float, c3: float) -> tuple[float, float]:
    """(lower, upper) with lower·u(ξ1) >= u(ξ2) >= upper·u(ξ1) for nonpositive H-convex u."""
    if min(c1, c2) < 0 or c3 <= 0 or c <= 0:
        raise HarnackError("need c1, c2 >= 0 and c, c3 > 0")
    if not (c1 + c3 < c and c2 + c3 < c):
        raise HarnackError(f"need c1+c3 < c and c2+c3 < c, got c={c}, c1={c1}, c2={c2}, c3={c3}")
    return (c - c1 - c3) / (c - c1), (c - c2) / (c - c2 - c3)


@dataclass
class LemmaResult:
    lower: float
    upper: float
    verdict: Optional[str] = None
    values: Optional[tuple[float, float]] = None
    probes: dict = field(default_factory=dict)


def _ball_inside(dom: ConvexDomain, center: np.ndarray, radius: float, probes: int = 2048, seed: int = 0) -> bool:
    """Gauge sphere of ``radius`` about ``center`` lies in the domain (balls are Euclidean convex)."""
    if radius <= 0:
        return bool(dom.contains(np.atleast_2d(center))[0])
    sph = radius * gauge_sphere(probes, dom.n, seed)
    return bool(np.all(dom.contains(hc.mul_arr(center, sph))))


def lemma_check(
    c: float,
    c1: float,
    c2: float,
    c3: float,
    u: Optional[ScalarField] = None,
    dom: Optional[ConvexDomain] = None,
    xi1: Optional[np.ndarray] = None,
    xi2: Optional[np.ndarray] = None,
    R: float = 1.0,
    tol: float = 1e-12,
) -> LemmaResult:
    lower, upper = lemma_factors(c, c1, c2, c3)
    if u is None:
        return LemmaResult(lower, upper)
    if dom is None or xi1 is None or xi2 is None:
        raise HarnackError("field checks need dom, xi1 and xi2")
    a, b = np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float)
    probes = {
        "ball_inside": _ball_inside(dom, np.zeros_like(a), c * R),
        "horizontal": bool(hc.in_plane_arr(a, b)),
        "N1": float(hc.gauge_arr(a)),
        "N2": float(hc.gauge_arr(b)),
        "d12": float(hc.dist_arr(a, b)),
    }
    probes["gauge_bounds"] = bool(
        probes["N1"] <= c1 * R * (1 + GAUGE_SLACK)
        and probes["N2"] <= c2 * R * (1 + GAUGE_SLACK) + GAUGE_SLACK
        and probes["d12"] <= c3 * R * (1 + GAUGE_SLACK)
    )
    if not (probes["ball_inside"] and probes["horizontal"] and probes["gauge_bounds"]):
        raise HarnackError(f"lemma preconditions fail: {probes}")
    u1, u2 = float(u(a)), float(u(b))
    if u1 > tol or u2 > tol:
        raise HarnackError("the field must be nonpositive")
    scale = tol * (1.0 + abs(u1))
    ok = lower * u1 >= u2 - scale and u2 >= upper * u1 - scale
    return LemmaResult(lower, upper, "consistent" if ok else "violated", (u1, u2), probes)


# ------------------------------------------------------------------ chain


@dataclass
class HarnackChain:
    """ξ = ξ0, ξ1, ..., ξ5 = 0 with consecutive points horizontally related."""

    points: np.ndarray
    sigma: float
    reflected: bool
    step_constants: tuple[tuple[float, float, float], ...] = STEP_CONSTANTS
    c: float = C_OUTER

    @property
    def step_factors(self) -> list[tuple[float, float]]:
        return [lemma_factors(self.c, *k) for k in self.step_constants]

    @property
    def product_constant(self) -> float:
        return product_constant(self.step_constants, self.c)

    def verify(self, R: float) -> list[dict]:
        """Per-step gauge bounds and horizontality; raises on the first failure."""
        out = []
        for k, (c1, c2, c3) in enumerate(self.step_constants):
            a, b = self.points[k], self.points[k + 1]
            rec = {
                "step": k + 1,
                "N_from": float(hc.gauge_arr(a)),
                "N_to": float(hc.gauge_arr(b)),
                "dist": float(hc.dist_arr(a, b)),
                "bounds": (c1 * R, c2 * R, c3 * R),
                "horizontal": bool(hc.in_plane_arr(a, b)),
            }
            slack = GAUGE_SLACK * (1.0 + R)
            rec["ok"] = bool(
                rec["horizontal"]
                and rec["N_from"] <= c1 * R + slack
                and rec["N_to"] <= c2 * R + slack
                and rec["dist"] <= c3 * R + slack
            )
            out.append(rec)
            if not rec["ok"]:
                raise HarnackError(f"chain step {k + 1} violates its gauge bounds: {rec}")
        return out


def product_constant(step_constants=STEP_CONSTANTS, c: float = C_OUTER) -> float:
    """Upper-factor product times the reciprocal lower-factor product of one chain."""
    lo = np.prod([lemma_factors(c, *k)[0] for k in step_constants])
    up = np.prod([lemma_factors(c, *k)[1] for k in step_constants])
    return float(up / lo)


def closed_form_constant() -> float:
    """10·(A·B)^2 with A = (3-a)/(5/2-a), B = (3-b)/(5/2-b), a = 17^{1/4}/2, b = 8^{1/4}/2."""
    A = (3 - A_RAD) / (2.5 - A_RAD)
    B = (3 - B_RAD) / (2.5 - B_RAD)
    return 10.0 * (A * B) ** 2


def chain_points(xi: "Point | np.ndarray", n: Optional[int] = None) -> HarnackChain:
    x = xi.as_array() if isinstance(xi, Point) else np.asarray(xi, dtype=float)
    n = hc.dim_n(x) if n is None else n
    reflected = x[-1] < 0
    if reflected:
        x = hc.swap_reflect_arr(x)
    t0 = float(x[-1])
    sigma = np.sqrt(t0) / (2.0 * np.sqrt(n))
    s = np.full(n, sigma)
    z = np.zeros(n)
    pts = np.stack(
        [
            x,
            hc.join(z, z, t0),
            hc.join(s, z, t0),
            hc.join(s, s, t0 - 2 * sigma**2 * n),
            hc.join(z, s, 0.0),
            hc.join(z, z, 0.0),
        ]
    )
    if reflected:
        pts = hc.swap_reflect_arr(pts)
    return HarnackChain(pts, float(sigma), bool(reflected))


# ------------------------------------------------------------- ball check


@dataclass
class HarnackReport:
    verdict: str
    pairs: int
    min_ratio: float
    max_ratio: float
    product_constant: float
    bound: float
    chain_steps_checked: int
    witnesses: list = field(default_factory=list)
    probes: dict = field(default_factory=dict)


def ball_harnack_check(
    u: ScalarField,
    dom: ConvexDomain,
    xi0: "Point | np.ndarray",
    R: float,
    sample_pairs: int = 500,
    seed: int = 0,
    bound: float = HARNACK_BOUND,
    containment_probes: int = 2048,
) -> HarnackReport:
    c0 = xi0.as_array() if isinstance(xi0, Point) else np.asarray(xi0, dtype=float)
    if not _ball_inside(dom, c0, C_OUTER * R, containment_probes, seed):
        raise DomainError("B_H(xi0, 3R) is not contained in the domain")
    n = dom.n
    offs = gauge_ball_offsets(2 * sample_pairs, n, seed)
    offs = offs[hc.gauge_arr(offs) <= 1.0][: 2 * sample_pairs]
    g = R * offs
    g[:, -1] *= R
    pts = hc.mul_arr(c0, g)
    checked = 0
    for p in g:
        chain_points(p, n).verify(R)
        checked += 1
    vals = u(pts)
    big_sph = hc.mul_arr(c0, C_OUTER * R * gauge_sphere(256, n, seed + 1))
    nonpos = bool(np.all(vals <= 1e-12) and np.all(u(big_sph) <= 1e-12))
    half = vals.size // 2
    va, vb = vals[:half], vals[half : 2 * half]
    pc = product_constant()
    probes = {"ball_inside": True, "nonpositive": nonpos}
    if not nonpos:
        raise HarnackError("the field is positive somewhere on the 3R-ball")
    zero = np.abs(vals) <= 1e-14
    if zero.all():
        return HarnackReport("consistent", int(half), 1.0, 1.0, pc, bound, checked, [], probes)
    if zero.any():
        i = int(np.argmax(zero))
        j = int(np.argmax(~zero))
        return HarnackReport("violated", int(half), 0.0, float("inf"), pc, bound, checked,
                             [{"zero_at": pts[i].tolist(), "negative_at": pts[j].tolist()}], probes)
    ratio = vb / va
    bad = (ratio > bound) | (ratio < 1.0 / bound)
    wit = [{"xi": pts[i].tolist(), "zeta": pts[half + i].tolist(), "ratio": float(ratio[i])} for i in np.nonzero(bad)[0][:10]]
    return HarnackReport(
        "violated" if bad.any() else "consistent",
        int(half),
        float(ratio.min()),
        float(ratio.max()),
        pc,
        bound,
        checked,
        wit,
        probes,
    )


# -------------------------------------------------------- sign propagation


def euclid_dist_boundary(dom: ConvexDomain, pts: np.ndarray, K: int = 512, seed: int = 0) -> np.ndarray:
    """Minimum exit distance over K directions (an upper estimate of the Euclidean distance)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    dirs = sphere_directions(K, dom.dim, seed)
    o = np.repeat(pts, dirs.shape[0], axis=0)
    d = np.tile(dirs, (pts.shape[0], 1))
    return dom.ray_exit(o, d).reshape(pts.shape[0], -1).min(axis=1)


def gauge_ball_euclid_extent(center: np.ndarray, rho: float) -> float:
    """Euclidean radius bound of B_H(center, rho): |z| <= rho and |dt| <= rho^2 + 2|z_c| rho."""
    zc = np.linalg.norm(hc.pr1(center))
    return float(np.hypot(rho, rho * rho + 2.0 * zc * rho))


def _max_radius(center: np.ndarray, tube: float) -> float:
    """Largest rho with the Euclidean extent of B_H(center, 3 rho) inside the tube, capped at tube/4."""
    lo, hi = 0.0, tube / 4.0
    if gauge_ball_euclid_extent(center, 3 * hi) <= tube:
        return hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if gauge_ball_euclid_extent(center, 3 * mid) <= tube:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class SignPropagation:
    k: int
    bound: float
    centers: np.ndarray
    radii: np.ndarray
    tube_radius: float
    target_value: float


def sign_propagation(
    u: ScalarField,
    dom: ConvexDomain,
    xi0: "Point | np.ndarray",
    xi_target: "Point | np.ndarray",
    tube_safety: float = 0.9,
    min_tube: float = 1e-6,
    max_balls: int = 100000,
    K: int = 512,
) -> SignPropagation:
    """Chain gauge balls along the Euclidean segment; each hop divides the certified bound by 31."""
    a = xi0.as_array() if isinstance(xi0, Point) else np.asarray(xi0, dtype=float)
    b = xi_target.as_array() if isinstance(xi_target, Point) else np.asarray(xi_target, dtype=float)
    u0 = float(u(a))
    if u0 >= 0:
        raise HarnackError("sign propagation needs u(xi0) < 0")
    tube = tube_safety * float(np.min(euclid_dist_boundary(dom, np.stack([a, b]), K)))
    if tube <= min_tube:
        raise HarnackError("tube radius collapsed: a point is too close to the boundary")
    seg = b - a

    def at(s: float) -> np.ndarray:
        return a + s * seg

    centers = [a]
    radii = [_max_radius(a, tube)]
    s = 0.0
    while hc.dist_arr(centers[-1], b) >= radii[-1]:
        if len(centers) >= max_balls:
            raise HarnackError("too many balls; tube radius too small for this segment")
        c, r = centers[-1], radii[-1]
        lo, hi = s, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if hc.dist_arr(c, at(mid)) < 0.9 * r:
                lo = mid
            else:
                hi = mid
        if lo <= s:
            raise HarnackError("chain stalled")
        s = lo
        nxt = at(s)
        centers.append(nxt)
        radii.append(_max_radius(nxt, tube))
    C = np.asarray(centers)
    k = len(centers)
    return SignPropagation(k, u0 / HARNACK_BOUND**k, C, np.asarray(radii), tube, float(u(b)))
