"""Semivariogram models and their fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from argus.enrich.grid import as_samples
from argus.errors import DegenerateDistances, SchemaError, TooFewSamples

MIN_FIT_SAMPLES = 10
GOLDEN = (math.sqrt(5) - 1) / 2


class VariogramKind(str, Enum):
    SPHERICAL = "spherical"
    EXPONENTIAL = "exponential"


def _shape(kind: VariogramKind, h: np.ndarray, a: float) -> np.ndarray:
    """Unit-sill structure, 0 at h=0 rising to 1 (exactly or asymptotically)."""
    r = h / a
    if kind is VariogramKind.SPHERICAL:
        return np.where(r < 1.0, 1.5 * r - 0.5 * r**3, 1.0)
    # practical range: 95% of the sill is reached at h = a
    return 1.0 - np.exp(-3.0 * r)


@dataclass(frozen=True)
class VariogramModel:
    kind: VariogramKind
    nugget: float
    sill: float
    range_a: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", VariogramKind(self.kind))
        if not self.nugget >= 0:
            raise SchemaError("variogram nugget must be >= 0")
        # equality is allowed so a featureless field has a representable fit
        if not self.sill >= self.nugget:
            raise SchemaError("variogram sill must be >= nugget")
        if not self.range_a > 0:
            raise SchemaError("variogram range must be > 0")

    @property
    def partial_sill(self) -> float:
        return self.sill - self.nugget

    def __call__(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        g = self.nugget + self.partial_sill * _shape(self.kind, h, self.range_a)
        return np.where(h > 0, g, 0.0)

    def covariance(self, h) -> np.ndarray:
        return self.sill - self(h)


@dataclass(frozen=True)
class EmpiricalVariogram:
    lags: np.ndarray  # mean pair distance per nonempty bin
    gamma: np.ndarray
    counts: np.ndarray


def empirical_variogram(samples, n_bins: int = 15) -> EmpiricalVariogram:
    """Matheron estimator over equal-width bins up to half the largest pair distance."""
    xs, ys, vs = as_samples(samples)
    i, j = np.triu_indices(len(xs), k=1)
    d = np.hypot(xs[i] - xs[j], ys[i] - ys[j])
    if d.size == 0 or d.max() == 0:
        raise DegenerateDistances("all sample locations coincide")
    cutoff = d.max() / 2
    sq = (vs[i] - vs[j]) ** 2
    keep = (d > 0) & (d <= cutoff)
    d, sq = d[keep], sq[keep]
    which = np.minimum((d / cutoff * n_bins).astype(int), n_bins - 1)
    counts = np.bincount(which, minlength=n_bins)
    sums = np.bincount(which, weights=sq, minlength=n_bins)
    dsum = np.bincount(which, weights=d, minlength=n_bins)
    nz = counts > 0
    return EmpiricalVariogram(dsum[nz] / counts[nz], sums[nz] / (2 * counts[nz]), counts[nz])


def _nnls2(f: np.ndarray, g: np.ndarray, w: np.ndarray) -> tuple[float, float, float]:
    """Weighted least squares of ``g ~ c0 + c1*f`` with c0, c1 >= 0.

    Two unknowns, so the active-set search is exhaustive: the unconstrained
    optimum if feasible, else the best of the three boundary candidates.
    """

    def sse(c0: float, c1: float) -> float:
        return float(np.sum(w * (g - c0 - c1 * f) ** 2))

    sw, swf, swff = w.sum(), (w * f).sum(), (w * f * f).sum()
    swg, swfg = (w * g).sum(), (w * f * g).sum()
    det = sw * swff - swf * swf
    candidates = [(0.0, 0.0)]
    if det > 1e-12 * sw * swff:
        c0 = (swff * swg - swf * swfg) / det
        c1 = (sw * swfg - swf * swg) / det
        if c0 >= 0 and c1 >= 0:
            candidates.append((c0, c1))
    candidates.append((max(swg / sw, 0.0), 0.0))
    if swff > 0:
        candidates.append((0.0, max(swfg / swff, 0.0)))
    best = min(candidates, key=lambda c: sse(*c))
    return best[0], best[1], sse(*best)


def fit_variogram(samples, n_bins: int = 15, kind: VariogramKind | str = VariogramKind.SPHERICAL) -> VariogramModel:
    """Fit nugget, sill and range by pair-count-weighted least squares.

    For a fixed range the model is linear in (nugget, partial sill), which is
    solved exactly under nonnegativity; the range is then found by a log-spaced
    scan followed by golden-section refinement.
    """
    kind = VariogramKind(kind)
    samples = list(samples) if not isinstance(samples, np.ndarray) else samples
    if len(samples) < MIN_FIT_SAMPLES:
        raise TooFewSamples(f"variogram fitting needs at least {MIN_FIT_SAMPLES} samples, got {len(samples)}")
    emp = empirical_variogram(samples, n_bins)
    h, g, w = emp.lags, emp.gamma, emp.counts.astype(float)
    span = float(h.max())

    def cost(log_a: float) -> float:
        return _nnls2(_shape(kind, h, math.exp(log_a)), g, w)[2]

    grid = np.linspace(math.log(span * 0.02), math.log(span * 5.0), 80)
    costs = [cost(t) for t in grid]
    k = int(np.argmin(costs))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    x1, x2 = hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo)
    f1, f2 = cost(x1), cost(x2)
    for _ in range(60):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = cost(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = cost(x2)
    best = min([(costs[k], grid[k]), (f1, x1), (f2, x2)])[1]
    a = math.exp(best)
    nugget, psill, _ = _nnls2(_shape(kind, h, a), g, w)
    return VariogramModel(kind, nugget, nugget + psill, a)
