"""Execution of one enrichment step against already-standardized datasets."""

from __future__ import annotations

from typing import Any, Mapping

from argus.crs import transform_layer
from argus.crs.registry import REGISTRY
from argus.enrich import (
    GridSpec,
    augment_rare,
    fit_variogram,
    idw,
    kde,
    ordinary_kriging,
    samples_from_layer,
)
from argus.errors import SchemaError
from argus.model import AttributeField, Dataset, Feature, FeatureLayer, Geometry, SiteConfig, ValueType
from argus.pipeline.manifest import StepConfig
from argus.pipeline.metrics import boundary_in, points_of
from argus.standardize import one_hot


def _layer(datasets: Mapping[str, Dataset], step: StepConfig) -> FeatureLayer:
    src = datasets[step.source]
    if not isinstance(src, FeatureLayer):
        raise SchemaError(f"step {step.output!r}: source {step.source!r} is a raster, a vector layer is needed")
    return src


def _grid(step: StepConfig, site: SiteConfig | None, working_crs: int, xs, ys) -> GridSpec:
    p = step.params
    crs = REGISTRY.get(working_crs)
    extent = p.get("extent", "site")
    pad = float(p.get("pad", 0.0))
    if extent == "site":
        if site is None:
            raise SchemaError(f"step {step.output!r}: extent \"site\" needs a site boundary")
        bounds = boundary_in(site, working_crs).bounds()
    elif extent == "data":
        bounds = (min(xs), min(ys), max(xs), max(ys))
    else:
        bounds = tuple(float(v) for v in extent)
    return GridSpec.around(bounds, float(p["cell_size"]), crs, pad)


def apply_step(step: StepConfig, datasets: Mapping[str, Dataset], site: SiteConfig | None,
               working_crs: int, vector_crs: int) -> tuple[dict[str, Dataset], dict[str, Any]]:
    """Run ``step``; returns its output datasets keyed by name, plus parameters for provenance."""
    p = step.params
    layer = _layer(datasets, step)
    params: dict[str, Any] = {"kind": step.kind, "source": step.source, **p}

    if step.kind in ("idw", "kriging"):
        work = transform_layer(layer, working_crs)
        samples = samples_from_layer(work, p["column"])
        xs = [s[0] for s in samples] or [0.0]
        ys = [s[1] for s in samples] or [0.0]
        spec = _grid(step, site, working_crs, xs, ys)
        if step.kind == "idw":
            grid = idw(samples, spec, float(p.get("power", 2.0)), p.get("max_radius"))
            params["samples"] = len(samples)
            return {step.output: grid}, params
        model = fit_variogram(samples, int(p.get("n_bins", 15)), p.get("variogram", "spherical"))
        est, var = ordinary_kriging(samples, model, spec, bool(p.get("jitter", False)))
        params.update(samples=len(samples), nugget=model.nugget, sill=model.sill, range=model.range_a)
        return dict(zip(step.outputs, (est, var))), params

    if step.kind == "kde":
        pts = points_of(layer, working_crs)
        spec = _grid(step, site, working_crs, [x for x, _ in pts] or [0.0], [y for _, y in pts] or [0.0])
        grid = kde(pts, spec, p.get("bandwidth"))
        params.update(points=len(pts), bandwidth_used=float(grid.metadata["bandwidth"]))
        return {step.output: grid}, params

    if step.kind == "one_hot":
        out = one_hot(layer, p["column"]).with_name(step.output)
        params["indicators"] = [f.column_name for f in out.schema[len(layer.schema):]]
        return {step.output: out}, params

    if step.kind == "augment":
        pts = points_of(layer, working_crs)
        synthetic = augment_rare(pts, int(p["n"]), float(p["sigma"]), int(p.get("seed", 0)))
        schema = (
            AttributeField("source_index", "source_index", ValueType.INTEGER),
            AttributeField("synthetic", "synthetic", ValueType.BOOLEAN),
        )
        rows = [Feature((i, False), Geometry.point(x, y)) for i, (x, y) in enumerate(pts)]
        rows += [Feature((s.source, True), Geometry.point(s.x, s.y)) for s in synthetic]
        work = FeatureLayer(step.output, REGISTRY.get(working_crs), schema, tuple(rows),
                            {"augmented_from": step.source, "synthetic_rows": str(len(synthetic))}, standardized=True)
        params.update(real=len(pts), synthetic=len(synthetic))
        return {step.output: transform_layer(work, vector_crs)}, params

    raise SchemaError(f"unknown step kind {step.kind!r}")
