"""Deterministic low-discrepancy samplers and a small data-parallel helper."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

T = TypeVar("T")
R = TypeVar("R")


def unit_cube(count: int, dim: int, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in [0, 1)^dim."""
    if count <= 0:
        return np.zeros((0, dim))
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(count)


def sphere_directions(count: int, dim: int, seed: int = 0, with_axes: bool = True) -> np.ndarray:
    """Quasi-uniform unit vectors in R^dim; optionally prefixed by the 2*dim signed axes."""
    pts = unit_cube(count, dim, seed)
    g = ndtri(np.clip(pts, 1e-12, 1 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    if with_axes:
        eye = np.eye(dim)
        g = np.concatenate([eye, -eye, g])
    return g


def circle_directions(count: int, phase: float = 0.0) -> np.ndarray:
    ang = phase + 2.0 * np.pi * np.arange(count) / count
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


def ball_points(count: int, dim: int, seed: int = 0) -> np.ndarray:
    """Quasi-uniform points in the closed unit Euclidean ball of R^dim."""
    pts = unit_cube(count, dim + 1, seed)
    g = ndtri(np.clip(pts[:, :dim], 1e-12, 1 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = pts[:, dim] ** (1.0 / dim)
    return g * r[:, None]


def resolve_threads(threads: int | None) -> int:
    if threads is not None and threads > 0:
        return int(threads)
    env = os.environ.get("HEISCONVEX_THREADS")
    if env:
        try:
            val = int(env)
        except ValueError as exc:
            raise ValueError(f"HEISCONVEX_THREADS must be an integer, got {env!r}") from exc
        if val > 0:
            return val
    return 1


def chunked(count: int, size: int) -> list[slice]:
    return [slice(i, min(i + size, count)) for i in range(0, count, max(1, size))]


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int | None = None) -> list[R]:
    """Order-preserving map; numpy kernels release the GIL so threads help."""
    workers = resolve_threads(threads)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
