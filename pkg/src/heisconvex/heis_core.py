"""Group algebra and gauge geometry of the Heisenberg group H^n.

Points use real coordinates (x, y, t) with x, y in R^n. Batched routines work on
arrays whose last axis holds ``[x_1..x_n, y_1..y_n, t]`` (length 2n+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[np.ndarray, "Point"]

PLANE_REL_TOL = 1e-10


@dataclass(frozen=True)
class Point:
    """A group element (x, y, t) of H^n."""

    x: np.ndarray
    y: np.ndarray
    t: float

    def __post_init__(self) -> None:
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if x.ndim != 1 or x.shape != y.shape or x.size < 1:
            raise ValueError("x and y must be vectors of equal length n >= 1")
        t = float(self.t)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.isfinite(t)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", t)

    @property
    def n(self) -> int:
        return int(self.x.size)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.y, [self.t]])

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Point":
        arr = np.asarray(arr, dtype=float)
        n = (arr.size - 1) // 2
        if arr.ndim != 1 or arr.size != 2 * n + 1 or n < 1:
            raise ValueError("array must have odd length 2n+1 with n >= 1")
        return cls(arr[:n], arr[n : 2 * n], arr[-1])

    @classmethod
    def origin(cls, n: int = 1) -> "Point":
        return cls(np.zeros(n), np.zeros(n), 0.0)

    def __iter__(self):
        yield from self.as_array()


def as_array(a: ArrayLike) -> np.ndarray:
    if isinstance(a, Point):
        return a.as_array()
    return np.asarray(a, dtype=float)


def dim_n(arr: np.ndarray) -> int:
    d = arr.shape[-1]
    if d % 2 != 1 or d < 3:
        raise ValueError(f"last axis must have length 2n+1, got {d}")
    return (d - 1) // 2


def split(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = dim_n(arr)
    return arr[..., :n], arr[..., n : 2 * n], arr[..., 2 * n]


def join(x: np.ndarray, y: np.ndarray, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.concatenate([x, y, t[..., None]], axis=-1)


# ---------------------------------------------------------------- batched ops


def mul_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    xa, ya, ta = split(a)
    xb, yb, tb = split(b)
    t = ta + tb + 2.0 * np.sum(xb * ya - xa * yb, axis=-1)
    return join(xa + xb, ya + yb, t)


def inv_arr(a: np.ndarray) -> np.ndarray:
    return -np.asarray(a, dtype=float)


def dilate_arr(lam: float, a: np.ndarray) -> np.ndarray:
    if not lam > 0:
        raise ValueError("dilation factor must be positive")
    x, y, t = split(np.asarray(a, dtype=float))
    return join(lam * x, lam * y, lam * lam * t)


def gauge_arr(a: np.ndarray) -> np.ndarray:
    x, y, t = split(np.asarray(a, dtype=float))
    z2 = np.sum(x * x, axis=-1) + np.sum(y * y, axis=-1)
    return (z2 * z2 + t * t) ** 0.25


def dist_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Korányi-Cygan distance N(b^{-1} a), broadcasting over leading axes."""
    return gauge_arr(mul_arr(inv_arr(b), a))


def plane_offset_arr(base: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """t-component of base^{-1} * pts; zero exactly on the horizontal plane H_base."""
    return split(mul_arr(inv_arr(base), pts))[2]


def in_plane_arr(base: np.ndarray, pts: np.ndarray) -> np.ndarray:
    off = plane_offset_arr(base, pts)
    scale = 1.0 + gauge_arr(base) ** 2 + gauge_arr(pts) ** 2
    return np.abs(off) <= PLANE_REL_TOL * scale


def from_plane_arr(base: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Lift first-layer coordinates ``w`` (..., 2n) onto H_base; ``base`` broadcasts."""
    base = np.asarray(base, dtype=float)
    w = np.asarray(w, dtype=float)
    n = dim_n(base)
    x0, y0, t0 = split(base)
    wx, wy = w[..., :n], w[..., n:]
    t = t0 + 2.0 * (np.sum(wx * y0, axis=-1) - np.sum(x0 * wy, axis=-1))
    return join(wx, wy, t)


def pr1(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=float)[..., :-1]


def plane_normal_arr(base: np.ndarray) -> np.ndarray:
    """Euclidean normal of H_base read off t - 2(x.y0 - x0.y) = t0."""
    x0, y0, _ = split(np.asarray(base, dtype=float))
    return join(-2.0 * y0, 2.0 * x0, np.ones(x0.shape[:-1]))


def project_to_plane_arr(base: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Euclidean orthogonal projection of ``pts`` onto the affine plane H_base."""
    base = np.asarray(base, dtype=float)
    pts = np.asarray(pts, dtype=float)
    nrm = plane_normal_arr(base)
    resid = plane_offset_arr(base, pts)
    # offset of the plane equation equals the t-component of base^{-1} * pts
    return pts - (resid / np.sum(nrm * nrm, axis=-1))[..., None] * nrm


def swap_reflect_arr(a: np.ndarray) -> np.ndarray:
    """The automorphism (x, y, t) -> (y, x, -t)."""
    x, y, t = split(np.asarray(a, dtype=float))
    return join(y, x, -t)


# ------------------------------------------------------------- Point-level API


def group_mul(a: Point, b: Point) -> Point:
    _same_n(a, b)
    return Point.from_array(mul_arr(a.as_array(), b.as_array()))


def group_inv(a: Point) -> Point:
    return Point(-a.x, -a.y, -a.t)


def dilate(lam: float, a: Point) -> Point:
    return Point.from_array(dilate_arr(lam, a.as_array()))


def gauge_norm(a: Point) -> float:
    return float(gauge_arr(a.as_array()))


def kc_distance(a: Point, b: Point) -> float:
    _same_n(a, b)
    return float(dist_arr(a.as_array(), b.as_array()))


def in_plane(base: Point, b: Point) -> bool:
    """Whether ``b`` lies on the horizontal plane through ``base``."""
    _same_n(base, b)
    return bool(in_plane_arr(base.as_array(), b.as_array()))


@dataclass(frozen=True)
class HPlaneFrame:
    """Affine chart of the horizontal plane H_base by first-layer coordinates."""

    base: Point

    @property
    def n(self) -> int:
        return self.base.n

    def to_plane(self, pts: ArrayLike) -> np.ndarray:
        return pr1(as_array(pts))

    def from_plane(self, w: np.ndarray) -> np.ndarray:
        return from_plane_arr(self.base.as_array(), np.asarray(w, dtype=float))

    def from_plane_point(self, w: np.ndarray) -> Point:
        return Point.from_array(self.from_plane(w))


def slice_frame(base: Point) -> HPlaneFrame:
    return HPlaneFrame(base)


def _same_n(a: Point, b: Point) -> None:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: n={a.n} vs n={b.n}")
