"""Stand-alone enrichment: a TOML step file applied to an existing database.

    database = "build/site.gpkg"
    working_crs = 2100          # optional
    [site]                      # optional; needed for extent = "site"
    ...
    [[step]]
    kind = "idw"
    ...
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from argus import __version__
from argus.errors import DanglingReference, DuplicateLayer, IoFailure, ParseError
from argus.gpkg import open_database
from argus.model import ProvenanceRecord, SiteConfig, Stage, utc_now
from argus.pipeline.manifest import _TOML_LINE, StepConfig, _check_keys, _crs, _resolve, _site, _step
from argus.pipeline.run import integrate_one
from argus.pipeline.steps import apply_step

STEPFILE_KEYS = {"database", "working_crs", "site", "step"}


@dataclass(frozen=True)
class StepFile:
    database: Path
    steps: tuple[StepConfig, ...]
    site: SiteConfig | None = None
    working_crs: int = 2100


def load_step_config(path: str | Path) -> StepFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read step file {path}: {exc.strerror or exc}") from exc
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = _TOML_LINE.search(str(exc))
        raise ParseError(str(exc), int(m.group(1)) if m else None) from None
    _check_keys(doc, STEPFILE_KEYS, "step file")
    if not isinstance(doc.get("database"), str):
        raise ParseError("step file lacks database = \"<path>\"")
    steps = tuple(_step(t, k) for k, t in enumerate(doc.get("step", [])))
    if not steps:
        raise ParseError("step file declares no [[step]]")
    return StepFile(
        database=_resolve(path.parent, doc["database"]),
        steps=steps,
        site=_site(doc["site"]) if "site" in doc else None,
        working_crs=_crs(doc.get("working_crs", 2100), "working_crs"),
    )


def _root_sha(records: list[ProvenanceRecord], name: str, fallback: str) -> str:
    for r in records:
        if r.input_id == name:
            return r.sha256
    return fallback


def run_steps(config: StepFile) -> list[str]:
    """Apply the steps in order, writing each output into the database.  Returns the new layer names."""
    written: list[str] = []
    with open_database(config.database) as db:
        existing = {s.name for s in db.list_layers()}
        for step in config.steps:
            if step.source not in existing:
                raise DanglingReference(f"{step.kind} -> {step.output}", step.source)
            for out in step.outputs:
                if out in existing:
                    raise DuplicateLayer(f"layer {out!r} already exists")
                existing.add(out)
        history = db.read_provenance()
        digest = db.content_digest()
        for step in config.steps:
            source = db.read_raster(step.source) if step.source in db.raster_names() else db.read_layer(step.source)
            vector_crs = source.crs.srs_id
            started = utc_now()
            outputs, params = apply_step(step, {step.source: source}, config.site, config.working_crs, vector_crs)
            finished = utc_now()
            sha = _root_sha(history, step.source, digest)
            records = []
            for name, dataset in outputs.items():
                summary = integrate_one(db, name, dataset, [step.source])
                records.append(ProvenanceRecord(name, sha, Stage.ENRICH, started, finished,
                                                {**params, "inputs": [step.source]}, f"argus {__version__}"))
                records.append(ProvenanceRecord(name, sha, Stage.INTEGRATE, finished, utc_now(),
                                                {"table": summary.name, "kind": summary.kind,
                                                 "srs_id": summary.srs_id, "rows": summary.row_count,
                                                 "inputs": [step.source]}, f"argus {__version__}"))
                written.append(name)
            db.write_provenance(records)
            history.extend(records)
    return written
