"""Before/after metrics for one run, rendered as a text table and JSON."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from argus.crs import transform_geometry, transform_layer
from argus.crs.registry import REGISTRY, WGS84
from argus.enrich import point_coverage, raster_coverage
from argus.gpkg import GpkgDatabase
from argus.model import Dataset, FeatureLayer, SiteConfig
from argus.pipeline.manifest import CoverageTarget
from argus.query import sql_query
from argus.standardize import AttributeDictionary, standardization_ratio


@dataclass
class MetricsReport:
    n_input_datasets: int
    n_databases: int
    standardized_ratio_before: float
    standardized_ratio_after: float
    coverage_before: dict[str, float] = field(default_factory=dict)
    coverage_after: dict[str, float] = field(default_factory=dict)
    stage_seconds: dict[str, float] = field(default_factory=dict)
    cross_dataset_query_seconds: float | None = None
    n_layers: int = 0

    def rows(self) -> list[tuple[str, str, str]]:
        out = [
            ("Number of distinct datasets", str(self.n_input_datasets),
             f"{self.n_databases} integrated database" + ("s" if self.n_databases != 1 else "")),
            ("Standardized attributes", _pct(self.standardized_ratio_before), _pct(self.standardized_ratio_after)),
        ]
        for name in sorted(set(self.coverage_before) | set(self.coverage_after)):
            out.append((f"Spatial coverage ({name})", _pct(self.coverage_before.get(name)),
                        _pct(self.coverage_after.get(name))))
        q = self.cross_dataset_query_seconds
        out.append(("Time for cross-dataset analysis", "manual", "n/a" if q is None else f"{q:.3f} s automated"))
        return out

    def to_text(self) -> str:
        rows = [("Metric", "Before", "After"), *self.rows()]
        w = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = [f"{a:<{w[0]}}  {b:>{w[1]}}  {c:<{w[2]}}".rstrip() for a, b, c in rows]
        lines.insert(1, "-" * (sum(w) + 4))
        if self.stage_seconds:
            lines.append("")
            lines.append("Stage wall time")
            for stage, secs in self.stage_seconds.items():
                lines.append(f"  {stage:<12} {secs:9.3f} s")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> MetricsReport:
        return cls(**json.loads(text))

    def write(self, path: Path) -> None:
        path.write_text(self.to_json() + "\n", encoding="utf-8")


def _pct(v: float | None) -> str:
    return "n/a" if v is None else f"{100 * v:.1f}%"


def metrics_path(db_path: Path) -> Path:
    return db_path.with_name(db_path.stem + ".metrics.json")


def boundary_in(site: SiteConfig, srs_id: int):
    return transform_geometry(site.boundary, WGS84, srs_id)


def points_of(layer: FeatureLayer, srs_id: int) -> list[tuple[float, float]]:
    """One point per located row (vertex mean), reprojected to ``srs_id``."""
    layer = transform_layer(layer, srs_id)
    out = []
    for r in layer.rows:
        if r.geometry is not None:
            v = np.asarray(r.geometry.vertices(), dtype=float)
            out.append((float(v[:, 0].mean()), float(v[:, 1].mean())))
    return out


def coverage_before(datasets: dict[str, Dataset], targets: Sequence[CoverageTarget], site: SiteConfig,
                    working_crs: int) -> dict[str, float]:
    """Point coverage of each target's point layer within the site boundary."""
    boundary = boundary_in(site, working_crs)
    out = {}
    for t in targets:
        layer = datasets[t.points]
        out[t.name] = point_coverage(points_of(layer, working_crs), t.radius, boundary)
    return out


def time_analysis(db: GpkgDatabase, statements: Iterable[str]) -> float | None:
    statements = list(statements)
    if not statements:
        return None
    t0 = time.perf_counter()
    for sql in statements:
        sql_query(db, sql).rows
    return time.perf_counter() - t0


def metrics_report(
    before_layers: dict[str, Dataset],
    db: GpkgDatabase,
    timings: dict[str, float],
    dictionary: AttributeDictionary | None = None,
    site: SiteConfig | None = None,
    targets: Sequence[CoverageTarget] = (),
    working_crs: int = 2100,
    analysis_sql: Sequence[str] = (),
) -> MetricsReport:
    """Assemble counts, standardization ratios, coverage and timings.

    "Before" figures come from the raw ingested datasets, "after" figures from
    what was written to ``db``.
    """
    after_layers = [db.read_layer(s.name) for s in db.list_layers() if s.kind == "vector"]
    cov_before: dict[str, float] = {}
    cov_after: dict[str, float] = {}
    if site is not None and targets:
        cov_before = coverage_before(before_layers, targets, site, working_crs)
        rasters = set(db.raster_names())
        for t in targets:
            if t.raster not in rasters:  # e.g. an integrate-only run skipped the step that makes it
                continue
            grid = db.read_raster(t.raster)
            cov_after[t.name] = raster_coverage(grid, boundary_in(site, grid.crs.srs_id), REGISTRY.get(grid.crs.srs_id))
    query_s = time_analysis(db, analysis_sql)
    return MetricsReport(
        n_input_datasets=len(before_layers),
        n_databases=1,
        standardized_ratio_before=standardization_ratio(before_layers.values(), dictionary),
        standardized_ratio_after=standardization_ratio(after_layers, None),
        coverage_before=cov_before,
        coverage_after=cov_after,
        stage_seconds=dict(timings),
        cross_dataset_query_seconds=query_s,
        n_layers=len(db.list_layers()),
    )
