"""Inverse-distance weighting and ordinary kriging onto a regular grid."""

from __future__ import annotations

import numpy as np

from argus.enrich.grid import DEFAULT_NODATA, GridSpec, as_samples, blocks, check_distinct, require_projected
from argus.enrich.linalg import lu_factor
from argus.enrich.variogram import VariogramModel
from argus.errors import NoSamples, SchemaError, SingularSystem
from argus.model import RasterGrid

EXACT_FRACTION = 1e-9
JITTER = 1e-10


def idw_at(xs, ys, vs, px, py, power: float = 2.0, max_radius: float | None = None,
           exact_tol: float = 0.0, nodata: float = DEFAULT_NODATA) -> np.ndarray:
    """IDW estimates at arbitrary points ``(px, py)``."""
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    out = np.empty(px.shape, dtype=float)
    for sl in blocks(px.size):
        d = np.hypot(px[sl, None] - xs[None, :], py[sl, None] - ys[None, :])
        within = d <= max_radius if max_radius is not None else np.ones_like(d, dtype=bool)
        exact = d < exact_tol
        with np.errstate(divide="ignore"):
            w = np.where(within & ~exact, d ** -power, 0.0)
        wsum = w.sum(axis=1)
        has = wsum > 0
        # normalizing first keeps a lone in-radius sample exact
        est = np.full(wsum.shape, nodata)
        est[has] = (w[has] / wsum[has, None]) @ vs
        hit = exact.any(axis=1)
        if hit.any():
            nearest = np.argmin(np.where(exact, d, np.inf), axis=1)
            est = np.where(hit, vs[nearest], est)
        out[sl] = est
    return out


def idw(samples, spec: GridSpec, power: float = 2.0, max_radius: float | None = None,
        nodata: float = DEFAULT_NODATA) -> RasterGrid:
    """Each cell is the inverse-distance-weighted mean of the in-radius samples.

    A cell centre closer to a sample than ``1e-9 * cell_size`` takes that value
    exactly; cells with no sample within ``max_radius`` are nodata.
    """
    xs, ys, vs = as_samples(samples)
    if not power > 0:
        raise SchemaError("IDW power must be > 0")
    if max_radius is not None and not max_radius > 0:
        raise SchemaError("IDW max_radius must be > 0")
    require_projected(spec.crs)
    check_distinct(xs, ys)
    cx, cy = spec.cell_centers()
    est = idw_at(xs, ys, vs, cx, cy, power, max_radius, EXACT_FRACTION * spec.cell_size, nodata)
    meta = {"method": "idw", "power": repr(float(power)), "samples": str(len(vs))}
    if max_radius is not None:
        meta["max_radius"] = repr(float(max_radius))
    return spec.raster(est, nodata, meta)


class OrdinaryKriging:
    """Global-neighbourhood ordinary kriging; the bordered semivariogram
    system is factored once and reused for every prediction point."""

    def __init__(self, samples, model: VariogramModel, jitter: bool = False) -> None:
        xs, ys, vs = as_samples(samples)
        if len(vs) < 2:
            raise NoSamples("ordinary kriging needs at least 2 samples")
        check_distinct(xs, ys)
        self.xs, self.ys, self.vs, self.model = xs, ys, vs, model
        n = len(vs)
        a = np.ones((n + 1, n + 1))
        a[:n, :n] = model(np.hypot(xs[:, None] - xs[None, :], ys[:, None] - ys[None, :]))
        a[n, n] = 0.0
        if jitter:
            a[np.arange(n), np.arange(n)] += JITTER
        self.system = a
        try:
            self.lu = lu_factor(a)
        except SingularSystem as exc:
            raise SingularSystem(f"kriging system: {exc}", cell=0) from None

    def weights(self, px, py) -> tuple[np.ndarray, np.ndarray]:
        """(n, m) sample weights and (m,) Lagrange multipliers for m points."""
        px = np.atleast_1d(np.asarray(px, dtype=float))
        py = np.atleast_1d(np.asarray(py, dtype=float))
        rhs = np.ones((len(self.vs) + 1, px.size))
        rhs[:-1] = self.model(np.hypot(self.xs[:, None] - px[None, :], self.ys[:, None] - py[None, :]))
        sol = self.lu.solve(rhs)
        return sol[:-1], sol[-1]

    def predict(self, px, py) -> tuple[np.ndarray, np.ndarray]:
        px = np.atleast_1d(np.asarray(px, dtype=float))
        py = np.atleast_1d(np.asarray(py, dtype=float))
        est = np.empty(px.size)
        var = np.empty(px.size)
        for sl in blocks(px.size, 8192):
            lam, mu = self.weights(px[sl], py[sl])
            g0 = self.model(np.hypot(self.xs[:, None] - px[None, sl], self.ys[:, None] - py[None, sl]))
            est[sl] = self.vs @ lam
            var[sl] = np.sum(lam * g0, axis=0) + mu
            bad = np.flatnonzero(~np.isfinite(est[sl]))
            if bad.size:
                raise SingularSystem("non-finite kriging estimate", cell=sl.start + int(bad[0]))
        return est, var


def ordinary_kriging(samples, model: VariogramModel, spec: GridSpec, jitter: bool = False,
                     nodata: float = DEFAULT_NODATA) -> tuple[RasterGrid, RasterGrid]:
    """Kriging estimates and kriging variances on ``spec``."""
    require_projected(spec.crs)
    ok = OrdinaryKriging(samples, model, jitter)
    est, var = ok.predict(*spec.cell_centers())
    meta = {
        "method": "ordinary_kriging",
        "variogram": model.kind.value,
        "nugget": repr(model.nugget),
        "sill": repr(model.sill),
        "range": repr(model.range_a),
    }
    return spec.raster(est, nodata, meta), spec.raster(var, nodata, {**meta, "band": "variance"})
