"""Static report for an integrated database: CSV tables and matplotlib figures."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from argus.errors import IoFailure  # noqa: E402
from argus.gpkg import GpkgDatabase  # noqa: E402
from argus.pipeline.metrics import MetricsReport, metrics_path  # noqa: E402

MAX_LEGEND = 12


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def _raster_png(db: GpkgDatabase, name: str, path: Path) -> None:
    grid = db.read_raster(name)
    data = np.ma.masked_array(grid.values, ~grid.valid_mask)
    x0, y0, x1, y1 = grid.bounds
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(data, origin="lower", extent=(x0, x1, y0, y1), cmap="viridis")
    fig.colorbar(im, ax=ax, label=grid.metadata.get("method", "value"))
    ax.set_title(name)
    ax.set_xlabel(f"x (EPSG:{grid.crs.srs_id})")
    ax.set_ylabel(f"y (EPSG:{grid.crs.srs_id})")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _overview_png(db: GpkgDatabase, names: list[str], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 6))
    for k, name in enumerate(names):
        layer = db.read_layer(name)
        pts = [np.asarray(r.geometry.vertices(), dtype=float).mean(axis=0) for r in layer.rows if r.geometry is not None]
        if not pts:
            continue
        xy = np.array(pts)
        ax.scatter(xy[:, 0], xy[:, 1], s=8, label=name if k < MAX_LEGEND else None)
    ax.set_title("Vector layers")
    ax.set_aspect("equal", adjustable="datalim")
    if names:
        ax.legend(fontsize="x-small", loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _metrics_png(m: MetricsReport, path: Path) -> None:
    labels = ["standardized\nattributes"] + [f"coverage\n{k}" for k in sorted(m.coverage_before)]
    before = [m.standardized_ratio_before] + [m.coverage_before[k] for k in sorted(m.coverage_before)]
    after = [m.standardized_ratio_after] + [m.coverage_after.get(k, np.nan) for k in sorted(m.coverage_before)]
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(max(4, 1.6 * len(labels)), 4))
    ax.bar(x - 0.2, [100 * v for v in before], 0.4, label="before")
    ax.bar(x + 0.2, [100 * v for v in after], 0.4, label="after")
    ax.set_xticks(x, labels)
    ax.set_ylabel("%")
    ax.set_ylim(0, 105)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def write_report(db: GpkgDatabase, out_dir: str | Path) -> list[Path]:
    """Write ``layers.csv``, ``metrics.csv`` (when the run left metrics), one PNG
    per raster, a vector overview and a before/after chart.  Returns the files."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create report directory {out}: {exc.strerror or exc}") from exc
    written = []
    layers = db.list_layers()
    path = out / "layers.csv"
    _write_csv(path, ["name", "kind", "srs_id", "rows", "min_x", "min_y", "max_x", "max_y"],
               [[s.name, s.kind, s.srs_id, s.row_count, *(s.bbox or ("", "", "", ""))] for s in layers])
    written.append(path)

    mpath = metrics_path(db.path)
    if mpath.exists():
        m = MetricsReport.from_json(mpath.read_text(encoding="utf-8"))
        path = out / "metrics.csv"
        _write_csv(path, ["metric", "before", "after"], m.rows())
        written.append(path)
        path = out / "metrics.png"
        _metrics_png(m, path)
        written.append(path)

    vectors = [s.name for s in layers if s.kind == "vector"]
    path = out / "overview.png"
    _overview_png(db, vectors, path)
    written.append(path)
    for s in layers:
        if s.kind == "raster_sidecar":
            path = out / f"raster_{s.name}.png"
            _raster_png(db, s.name, path)
            written.append(path)
    return written
