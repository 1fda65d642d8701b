"""Publication bundles: database, sidecars, LICENSE and a JSON descriptor."""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import os
import shutil
import tempfile
from pathlib import Path

from argus.errors import IoFailure, UnknownLicense
from argus.gpkg import open_database
from argus.model import utc_now
from argus.pipeline.manifest import PublishConfig
from argus.pipeline.metrics import metrics_path

DESCRIPTOR = "publication.json"
DESCRIPTOR_VERSION = 1

# SPDX identifier -> (full name, canonical URL)
LICENSES = {
    "CC-BY-4.0": ("Creative Commons Attribution 4.0 International", "https://creativecommons.org/licenses/by/4.0/legalcode"),
    "CC-BY-SA-4.0": ("Creative Commons Attribution Share Alike 4.0 International", "https://creativecommons.org/licenses/by-sa/4.0/legalcode"),
    "CC-BY-NC-4.0": ("Creative Commons Attribution Non Commercial 4.0 International", "https://creativecommons.org/licenses/by-nc/4.0/legalcode"),
    "CC0-1.0": ("Creative Commons Zero v1.0 Universal", "https://creativecommons.org/publicdomain/zero/1.0/legalcode"),
    "ODbL-1.0": ("Open Data Commons Open Database License v1.0", "https://opendatacommons.org/licenses/odbl/1-0/"),
    "ODC-By-1.0": ("Open Data Commons Attribution License v1.0", "https://opendatacommons.org/licenses/by/1-0/"),
    "PDDL-1.0": ("Open Data Commons Public Domain Dedication & License 1.0", "https://opendatacommons.org/licenses/pddl/1-0/"),
    "MIT": ("MIT License", "https://opensource.org/licenses/MIT"),
    "Apache-2.0": ("Apache License 2.0", "https://www.apache.org/licenses/LICENSE-2.0"),
}


def license_text(spdx: str, title: str, creators: tuple[str, ...], year: int) -> str:
    name, url = LICENSES[spdx]
    holder = ", ".join(creators) if creators else "the dataset creators"
    return (
        f"{title or 'This dataset'}\n"
        f"Copyright (c) {year} {holder}\n\n"
        f"SPDX-License-Identifier: {spdx}\n"
        f"Licensed under the {name}.\n"
        f"The full license text is available at {url}\n"
    )


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def bundle_files(db_path: Path) -> list[Path]:
    """The database, its raster sidecars and its metrics file, if present."""
    with open_database(db_path) as db:
        sidecars = [db_path.with_name(r) for (r,) in db.conn.execute("SELECT path FROM argus_rasters ORDER BY path")]
    files = [db_path, *sidecars]
    if metrics_path(db_path).exists():
        files.append(metrics_path(db_path))
    return files


def publish(db_path: str | Path, config: PublishConfig, directory: str | Path | None = None,
            timestamp: dt.datetime | None = None) -> Path:
    """Write a bundle directory; an existing bundle is replaced atomically."""
    if config.license not in LICENSES:
        raise UnknownLicense(f"{config.license!r} is not a recognized SPDX identifier; known: {', '.join(sorted(LICENSES))}")
    db_path = Path(db_path)
    target = Path(directory or config.directory or db_path.with_name(f"{db_path.stem}_publication"))
    now = timestamp or utc_now()
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        files = bundle_files(db_path)
        staging = Path(tempfile.mkdtemp(prefix=f".{target.name}-", dir=target.parent))
    except OSError as exc:
        raise IoFailure(f"cannot prepare bundle {target}: {exc.strerror or exc}") from exc
    try:
        entries = []
        for f in files:
            shutil.copyfile(f, staging / f.name)
            entries.append({"path": f.name, "sha256": _sha256_file(staging / f.name), "bytes": (staging / f.name).stat().st_size})
        (staging / "LICENSE").write_text(license_text(config.license, config.title, config.creators, now.year), encoding="utf-8")
        entries.append({"path": "LICENSE", "sha256": _sha256_file(staging / "LICENSE"),
                        "bytes": (staging / "LICENSE").stat().st_size})
        descriptor = {
            "descriptor_version": DESCRIPTOR_VERSION,
            "title": config.title,
            "creators": list(config.creators),
            "license": {"spdx": config.license, "name": LICENSES[config.license][0], "url": LICENSES[config.license][1]},
            "published": now.isoformat(),
            "citation": {"doi": config.citation_doi, "text": config.citation},
            "files": entries,
        }
        (staging / DESCRIPTOR).write_text(json.dumps(descriptor, indent=2) + "\n", encoding="utf-8")
        old = None
        if target.exists():
            old = target.with_name(f".{target.name}-old-{os.getpid()}")
            os.replace(target, old)
        os.replace(staging, target)
        if old is not None:
            shutil.rmtree(old, ignore_errors=True)
    except OSError as exc:
        shutil.rmtree(staging, ignore_errors=True)
        raise IoFailure(f"cannot write bundle {target}: {exc.strerror or exc}") from exc
    return target


def verify_bundle(directory: str | Path) -> list[str]:
    """Files whose checksum no longer matches the descriptor."""
    directory = Path(directory)
    doc = json.loads((directory / DESCRIPTOR).read_text(encoding="utf-8"))
    return [e["path"] for e in doc["files"] if _sha256_file(directory / e["path"]) != e["sha256"]]
