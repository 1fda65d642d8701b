"""Kernel density surfaces and jitter-based augmentation of sparse events."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from argus.enrich.grid import DEFAULT_NODATA, GridSpec, as_points, blocks, require_projected
from argus.errors import NonpositiveBandwidth, NoPoints
from argus.model import RasterGrid


def silverman_bandwidth(xs: np.ndarray, ys: np.ndarray) -> float:
    """Silverman's rule for a 2-D Gaussian kernel, averaged over the two axes."""
    n = len(xs)
    sx = np.std(xs, ddof=1) if n > 1 else 0.0
    sy = np.std(ys, ddof=1) if n > 1 else 0.0
    # (4 / (d + 2)) ** (1 / (d + 4)) is exactly 1 for d = 2
    return float((sx + sy) / 2 * n ** (-1 / 6))


def kde(points, spec: GridSpec, bandwidth: float | None = None) -> RasterGrid:
    """Gaussian KDE in density per unit area evaluated at cell centres."""
    xs, ys = as_points(points, "points", NoPoints)
    require_projected(spec.crs)
    h = silverman_bandwidth(xs, ys) if bandwidth is None else float(bandwidth)
    if not (h > 0 and math.isfinite(h)):
        raise NonpositiveBandwidth(
            f"bandwidth must be positive, got {h}" + ("; give one explicitly" if bandwidth is None else "")
        )
    cx, cy = spec.cell_centers()
    norm = 1.0 / (2 * math.pi * h * h * len(xs))
    out = np.empty(cx.size)
    for sl in blocks(cx.size, max(1, (1 << 22) // len(xs))):
        d2 = (cx[sl, None] - xs[None, :]) ** 2 + (cy[sl, None] - ys[None, :]) ** 2
        out[sl] = norm * np.exp(-d2 / (2 * h * h)).sum(axis=1)
    return spec.raster(out, DEFAULT_NODATA, {"method": "kde", "bandwidth": repr(h), "points": str(len(xs))})


class SyntheticPoint(NamedTuple):
    x: float
    y: float
    source: int  # index of the real point it was drawn around
    synthetic: bool = True


def augment_rare(points, n_synthetic: int, sigma: float, seed: int) -> list[SyntheticPoint]:
    """Draw ``n_synthetic`` points: a uniformly chosen real point plus isotropic
    Gaussian jitter with standard deviation ``sigma``."""
    xs, ys = as_points(points, "points", NoPoints)
    if n_synthetic < 0:
        raise ValueError("n_synthetic must be >= 0")
    if not sigma >= 0:
        raise NonpositiveBandwidth("jitter sigma must be >= 0")
    rng = np.random.default_rng(seed)
    src = rng.integers(0, len(xs), size=n_synthetic)
    jitter = rng.normal(0.0, sigma, size=(n_synthetic, 2))
    return [
        SyntheticPoint(float(xs[s] + dx), float(ys[s] + dy), int(s))
        for s, (dx, dy) in zip(src, jitter)
    ]
