"""Manifest execution: ingest -> standardize -> enrich -> integrate, with provenance."""

from __future__ import annotations

import hashlib
import os
import shutil
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor, wait
from pathlib import Path
from typing import Any, Callable, Sequence

from argus import __version__
from argus.crs import transform, transform_layer
from argus.errors import IoFailure, PartialRunArtifactsRemoved, StageError
from argus.gpkg import GpkgDatabase, create_database, open_database
from argus.ingest import SourceDescriptor, detect_format, read_source
from argus.model import Dataset, FeatureLayer, ProvenanceRecord, RasterGrid, Stage, utc_now
from argus.pipeline.manifest import PipelineManifest, StepConfig
from argus.pipeline.metrics import MetricsReport, metrics_path, metrics_report
from argus.pipeline.steps import apply_step
from argus.standardize import AttributeDictionary, standardize_layer

TOOL_VERSION = f"argus {__version__}"

Job = Callable[[], tuple[Any, dict[str, Any]]]


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _stamped(job: Job):
    started = utc_now()
    value, params = job()
    return value, params, started, utc_now()


def fan_out(pool: ThreadPoolExecutor, jobs: Sequence[tuple[str, Job]], stage: Stage) -> list[tuple]:
    """Run every job, wait for all of them (draining in-flight work even after a
    failure), then report the first failure in submission order.  Results come
    back in submission order whatever the completion order was."""
    futures = [(ident, pool.submit(_stamped, job)) for ident, job in jobs]
    wait([f for _, f in futures])
    for ident, f in futures:
        exc = f.exception()
        if exc is not None:
            raise StageError(ident, stage.value, exc) from exc
    return [f.result() for _, f in futures]


def _display_path(path: str, base: Path) -> str:
    try:
        return Path(path).resolve().relative_to(base.resolve()).as_posix()
    except ValueError:
        return Path(path).as_posix()


def ingest_job(src: SourceDescriptor, manifest: PipelineManifest) -> Job:
    def job():
        dataset, data = read_source(src, manifest.site)
        params = {
            "path": _display_path(src.path, manifest.base_dir),
            "format": (src.format or detect_format(data[:8], src.path)).value,
            "crs": dataset.crs.srs_id,
            "sha256": sha256_bytes(data),
        }
        if isinstance(dataset, FeatureLayer):
            params.update(rows=len(dataset), fields=len(dataset.schema))
        else:
            params.update(ncols=dataset.ncols, nrows=dataset.nrows)
        return dataset, params
    return job


def standardize_job(dataset: Dataset, dictionary: AttributeDictionary | None, dictionary_sha: str | None,
                    manifest: PipelineManifest) -> Job:
    def job():
        if isinstance(dataset, RasterGrid):
            out = transform(dataset, None, manifest.working_crs)
            return out, {"crs": out.crs.srs_id, "reprojected": out.crs.srs_id != dataset.crs.srs_id}
        layer = transform_layer(dataset, manifest.crs)
        params: dict[str, Any] = {"crs": manifest.crs, "reprojected": dataset.crs.srs_id != manifest.crs}
        if dictionary is not None:
            layer, report = standardize_layer(layer, dictionary)
            params.update(
                dictionary_sha256=dictionary_sha,
                fields=report.total,
                matched=[list(m) for m in report.matched],
                unmatched=list(report.unmatched),
                conflicts=[str(c) for c in report.conflicts],
            )
        return layer, params
    return job


def step_job(step: StepConfig, datasets: dict[str, Dataset], manifest: PipelineManifest) -> Job:
    return lambda: apply_step(step, datasets, manifest.site, manifest.working_crs, manifest.crs)


def _step_waves(steps: Sequence[StepConfig]) -> list[list[StepConfig]]:
    """Group steps so that each wave only reads inputs or outputs of earlier waves."""
    level: dict[str, int] = {}
    waves: list[list[StepConfig]] = []
    for s in steps:
        k = level.get(s.source, -1) + 1
        for out in s.outputs:
            level[out] = k
        while len(waves) <= k:
            waves.append([])
        waves[k].append(s)
    return waves


def _old_sidecars(path: Path) -> list[Path]:
    if not path.exists():
        return []
    try:
        with open_database(path) as old:
            return [old.path.with_name(r) for (r,) in old.conn.execute("SELECT path FROM argus_rasters")]
    except Exception:  # not a database we wrote; leave its neighbours alone
        return []


def _install(tmp_db: Path, out: Path) -> None:
    """Move sidecars then the database from the staging directory into place."""
    stale = set(_old_sidecars(out))
    for f in sorted(tmp_db.parent.iterdir()):
        if f != tmp_db:
            target = out.with_name(f.name)
            os.replace(f, target)
            stale.discard(target)
    os.replace(tmp_db, out)
    for f in stale:
        f.unlink(missing_ok=True)


def run(manifest: PipelineManifest, workers: int = 1, enrich: bool = True
        ) -> tuple[GpkgDatabase, MetricsReport, list[ProvenanceRecord]]:
    """Execute ``manifest``.  On failure the staging directory is removed and
    :class:`PartialRunArtifactsRemoved` names the input and stage that failed."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    dictionary = dictionary_sha = None
    if manifest.dictionary_path is not None:
        try:
            text = manifest.dictionary_path.read_bytes()
        except OSError as exc:
            raise IoFailure(f"cannot read dictionary {manifest.dictionary_path}: {exc.strerror or exc}") from exc
        dictionary = AttributeDictionary.parse(text.decode("utf-8"))
        dictionary_sha = sha256_bytes(text)

    out = manifest.output_gpkg
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=f".{out.stem}-", dir=out.parent))
    except OSError as exc:
        raise IoFailure(f"cannot prepare output directory {out.parent}: {exc.strerror or exc}") from exc

    timings: dict[str, float] = {}
    records: list[ProvenanceRecord] = []
    roots: dict[str, list[str]] = {}
    digests: dict[str, str] = {}

    def record(ident: str, stage: Stage, params: dict, started, finished) -> None:
        sha = digests[roots[ident][0]]
        records.append(ProvenanceRecord(ident, sha, stage, started, finished, params, TOOL_VERSION))

    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            t0 = time.perf_counter()
            ids = manifest.input_ids
            results = fan_out(pool, [(s.id, ingest_job(s, manifest)) for s in manifest.inputs], Stage.INGEST)
            raw: dict[str, Dataset] = {}
            for ident, (dataset, params, started, finished) in zip(ids, results):
                raw[ident] = dataset
                roots[ident] = [ident]
                digests[ident] = params["sha256"]
                record(ident, Stage.INGEST, params, started, finished)
            timings["ingest"] = time.perf_counter() - t0

            t0 = time.perf_counter()
            jobs = [(i, standardize_job(raw[i], dictionary, dictionary_sha, manifest)) for i in ids]
            datasets: dict[str, Dataset] = {}
            for ident, (dataset, params, started, finished) in zip(ids, fan_out(pool, jobs, Stage.STANDARDIZE)):
                datasets[ident] = dataset
                record(ident, Stage.STANDARDIZE, params, started, finished)
            timings["standardize"] = time.perf_counter() - t0

            t0 = time.perf_counter()
            steps = manifest.enrichment_steps if enrich else ()
            for wave in _step_waves(steps):
                snapshot = dict(datasets)
                jobs = [(s.output, step_job(s, snapshot, manifest)) for s in wave]
                for s, (outputs, params, started, finished) in zip(wave, fan_out(pool, jobs, Stage.ENRICH)):
                    for name, dataset in outputs.items():
                        datasets[name] = dataset
                        roots[name] = roots[s.source]
                        record(name, Stage.ENRICH, {**params, "inputs": roots[name]}, started, finished)
            timings["enrich"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        tmp_db = staging / out.name
        order = [n for n in manifest.layer_names() if n in datasets]
        with create_database(tmp_db) as db:
            for name in order:
                started = utc_now()
                try:
                    summary = integrate_one(db, name, datasets[name], roots[name])
                except Exception as exc:
                    raise StageError(name, Stage.INTEGRATE.value, exc) from exc
                record(name, Stage.INTEGRATE,
                       {"table": summary.name, "kind": summary.kind, "srs_id": summary.srs_id,
                        "rows": summary.row_count, "inputs": roots[name]},
                       started, utc_now())
            db.write_provenance(records)
        try:
            _install(tmp_db, out)
        except OSError as exc:
            raise StageError(out.name, Stage.INTEGRATE.value, IoFailure(f"cannot move database into place: {exc}")) from exc
        timings["integrate"] = time.perf_counter() - t0
    except StageError as exc:
        shutil.rmtree(staging, ignore_errors=True)
        raise PartialRunArtifactsRemoved(exc.input_id, exc.stage, exc.cause) from exc.cause
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    shutil.rmtree(staging, ignore_errors=True)

    db = open_database(out)
    t0 = time.perf_counter()
    metrics = metrics_report(raw, db, timings, dictionary, manifest.site, manifest.coverage,
                             manifest.working_crs, manifest.analysis_sql)
    metrics.stage_seconds["metrics"] = time.perf_counter() - t0
    try:
        metrics.write(metrics_path(out))
    except OSError as exc:
        raise IoFailure(f"cannot write metrics next to {out}: {exc.strerror or exc}") from exc
    return db, metrics, records


def integrate_one(db: GpkgDatabase, name: str, dataset: Dataset, inputs: list[str]):
    entries = {"inputs": ",".join(inputs), **dataset.metadata}
    if isinstance(dataset, RasterGrid):
        summary = db.register_raster_sidecar(dataset, name)
    else:
        summary = db.write_layer(dataset.with_name(name))
    db.write_metadata(summary.name, entries)
    return summary
