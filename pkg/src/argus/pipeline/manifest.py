"""Run manifests: a TOML file naming the site, inputs, dictionary, enrichment
steps, coverage targets, analysis SQL and publication details."""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from argus.crs.registry import REGISTRY
from argus.errors import DanglingReference, IoFailure, ParseError, UnknownKey
from argus.ingest import EXTENSIONS, ExtractionPattern, Format, SourceDescriptor
from argus.model import Geometry, SiteConfig, ValueType, snake_case
from argus.query.qa import RemoteQaConfig

TOP_KEYS = {"output", "dictionary", "crs", "working_crs", "site", "input", "step", "coverage", "analysis", "publish", "qa"}
SITE_KEYS = {"id", "centroid", "boundary"}
INPUT_KEYS = {"id", "path", "format", "crs", "encoding", "lon_col", "lat_col", "pattern"}
PATTERN_KEYS = {"field", "regex", "type", "unit"}
COVERAGE_KEYS = {"name", "points", "radius", "raster"}
ANALYSIS_KEYS = {"sql"}
PUBLISH_KEYS = {"license", "title", "creators", "citation_doi", "citation", "directory"}
QA_KEYS = {"endpoint", "timeout"}

STEP_COMMON = {"kind", "source", "output"}
# kind -> (required parameters, optional parameters)
STEP_KEYS: dict[str, tuple[set[str], set[str]]] = {
    "idw": ({"column", "cell_size"}, {"power", "max_radius", "extent", "pad"}),
    "kriging": ({"column", "cell_size"}, {"variogram", "n_bins", "extent", "pad", "variance_output", "jitter"}),
    "kde": ({"cell_size"}, {"bandwidth", "extent", "pad"}),
    "one_hot": ({"column"}, set()),
    "augment": ({"n", "sigma"}, {"seed"}),
}
RASTER_STEPS = {"idw", "kriging", "kde"}

_TOML_LINE = re.compile(r"at line (\d+)")


@dataclass(frozen=True)
class StepConfig:
    kind: str
    source: str
    output: str
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def outputs(self) -> tuple[str, ...]:
        if self.kind == "kriging":
            return self.output, self.params.get("variance_output", f"{self.output}_variance")
        return (self.output,)

    @property
    def makes_raster(self) -> bool:
        return self.kind in RASTER_STEPS


@dataclass(frozen=True)
class CoverageTarget:
    name: str
    points: str
    radius: float
    raster: str


@dataclass(frozen=True)
class PublishConfig:
    license: str
    title: str = ""
    creators: tuple[str, ...] = ()
    citation_doi: str | None = None
    citation: str | None = None
    directory: Path | None = None


@dataclass(frozen=True)
class PipelineManifest:
    site: SiteConfig
    inputs: tuple[SourceDescriptor, ...]
    dictionary_path: Path | None
    enrichment_steps: tuple[StepConfig, ...]
    output_gpkg: Path
    crs: int = 4326
    working_crs: int = 2100
    coverage: tuple[CoverageTarget, ...] = ()
    analysis_sql: tuple[str, ...] = ()
    publish: PublishConfig | None = None
    qa_endpoint: RemoteQaConfig | None = None
    base_dir: Path = Path(".")

    @property
    def input_ids(self) -> list[str]:
        return [s.id for s in self.inputs]

    def layer_names(self) -> list[str]:
        """Every dataset the run will integrate, in write order."""
        return self.input_ids + [o for s in self.enrichment_steps for o in s.outputs]


def _line_of(text: str, pattern: str, occurrence: int = 1) -> int | None:
    seen = 0
    rx = re.compile(pattern)
    for i, line in enumerate(text.splitlines(), start=1):
        if rx.search(line):
            seen += 1
            if seen == occurrence:
                return i
    return None


def _check_keys(table: dict, allowed: set[str], where: str) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise UnknownKey(f"unknown key {extra[0]!r} in {where}; allowed: {', '.join(sorted(allowed))}")


def _require(table: dict, key: str, where: str, kind=None):
    if key not in table:
        raise ParseError(f"{where} lacks required key {key!r}")
    value = table[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"{where}.{key} has the wrong type ({type(value).__name__})")
    return value


def _number(table: dict, key: str, where: str, default=None, positive: bool = False):
    if key not in table:
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}.{key} must be a number")
    if positive and not v > 0:
        raise ParseError(f"{where}.{key} must be positive")
    return v


def _crs(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value not in REGISTRY:
        raise ParseError(f"{where}: {value!r} is not a registered CRS code")
    return value


def _resolve(base: Path, p: str) -> Path:
    path = Path(p)
    return path if path.is_absolute() else base / path


def _site(table: dict) -> SiteConfig:
    _check_keys(table, SITE_KEYS, "[site]")
    site_id = _require(table, "id", "[site]", str)
    centroid = _require(table, "centroid", "[site]", list)
    ring = _require(table, "boundary", "[site]", list)
    try:
        pts = [(float(x), float(y)) for x, y in ring]
        c = (float(centroid[0]), float(centroid[1]))
    except (TypeError, ValueError):
        raise ParseError("[site] centroid and boundary must be [lon, lat] pairs") from None
    if pts and pts[0] != pts[-1]:
        pts.append(pts[0])
    return SiteConfig(site_id, c, Geometry.polygon(pts))


def _input(table: dict, base: Path, k: int) -> SourceDescriptor:
    where = f"[[input]] #{k + 1}"
    _check_keys(table, INPUT_KEYS, where)
    path = _require(table, "path", where, str)
    fmt = table.get("format", "auto")
    if fmt != "auto":
        try:
            Format(fmt)
        except ValueError:
            raise ParseError(f"{where}: unknown format {fmt!r}") from None
    patterns = []
    for j, p in enumerate(table.get("pattern", [])):
        pw = f"{where} pattern #{j + 1}"
        _check_keys(p, PATTERN_KEYS, pw)
        try:
            vtype = ValueType(p.get("type", "real"))
        except ValueError:
            raise ParseError(f"{pw}: unknown type {p.get('type')!r}") from None
        patterns.append(ExtractionPattern(_require(p, "field", pw, str), _require(p, "regex", pw, str), vtype, p.get("unit")))
    ident = table.get("id") or snake_case(Path(path).stem)
    if not isinstance(ident, str) or snake_case(ident) != ident:
        raise ParseError(f"{where}: id {ident!r} must be a lowercase identifier")
    return SourceDescriptor(
        path=str(_resolve(base, path)),
        declared_format=fmt,
        crs_override=_crs(table["crs"], where) if "crs" in table else None,
        encoding=table.get("encoding", "utf-8"),
        id=ident,
        lon_col=table.get("lon_col"),
        lat_col=table.get("lat_col"),
        patterns=tuple(patterns),
    )


def _input_kind(src: SourceDescriptor) -> str:
    """Best guess before reading: the declared format, else the file extension."""
    fmt = src.declared_format if src.declared_format != "auto" else EXTENSIONS.get(Path(src.path).suffix.lower())
    if fmt is None:
        return "unknown"
    return "raster" if Format(fmt) in (Format.ASCII_GRID, Format.GEOTIFF) else "vector"


def _step(table: dict, k: int) -> StepConfig:
    where = f"[[step]] #{k + 1}"
    kind = _require(table, "kind", where, str)
    if kind not in STEP_KEYS:
        raise ParseError(f"{where}: unknown step kind {kind!r}; expected one of {', '.join(STEP_KEYS)}")
    required, optional = STEP_KEYS[kind]
    _check_keys(table, STEP_COMMON | required | optional, f"{where} ({kind})")
    source = _require(table, "source", where, str)
    output = _require(table, "output", where, str)
    if snake_case(output) != output:
        raise ParseError(f"{where}: output {output!r} must be a lowercase identifier")
    for key in sorted(required):
        _require(table, key, where)
    params = {key: table[key] for key in sorted(table) if key not in STEP_COMMON}
    for key in ("cell_size", "power", "max_radius", "bandwidth", "sigma"):
        _number(params, key, where, positive=key != "sigma")
    if "sigma" in params and params["sigma"] < 0:
        raise ParseError(f"{where}.sigma must be >= 0")
    for key in ("n", "n_bins", "seed"):
        if key in params and (isinstance(params[key], bool) or not isinstance(params[key], int) or params[key] < 0):
            raise ParseError(f"{where}.{key} must be a non-negative integer")
    extent = params.get("extent", "site")
    if not (extent in ("site", "data") or isinstance(extent, list) and len(extent) == 4):
        raise ParseError(f"{where}.extent must be \"site\", \"data\" or [xmin, ymin, xmax, ymax]")
    return StepConfig(kind, source, output, params)


def load_manifest(text: str, base_dir: str | Path = ".") -> PipelineManifest:
    """Parse and fully validate a manifest; relative paths resolve against ``base_dir``."""
    base = Path(base_dir)
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = _TOML_LINE.search(str(exc))
        raise ParseError(str(exc), int(m.group(1)) if m else None) from None
    _check_keys(doc, TOP_KEYS, "manifest")
    if "site" not in doc:
        raise ParseError("manifest lacks a [site] section")
    site = _site(doc["site"])
    inputs = [_input(t, base, k) for k, t in enumerate(doc.get("input", []))]
    if not inputs:
        raise ParseError("manifest declares no [[input]]")
    seen: dict[str, int] = {}
    for s in inputs:
        seen[s.id] = seen.get(s.id, 0) + 1
        if seen[s.id] == 2:
            line = _line_of(text, rf"^\s*id\s*=\s*[\"']{re.escape(s.id)}[\"']", 2)
            raise ParseError(f"duplicate input id {s.id!r}", line)

    steps = [_step(t, k) for k, t in enumerate(doc.get("step", []))]
    known = set(seen)
    kinds = {s.id: _input_kind(s) for s in inputs}
    for s in steps:
        if s.source not in known:
            raise DanglingReference(f"{s.kind} -> {s.output}", s.source)
        for out in s.outputs:
            if out in known:
                raise ParseError(f"step output {out!r} reuses an existing layer name",
                                 _line_of(text, rf"^\s*output\s*=\s*[\"']{re.escape(out)}[\"']"))
            known.add(out)
            kinds[out] = "raster" if s.makes_raster else "vector"

    coverage = []
    for k, t in enumerate(doc.get("coverage", [])):
        where = f"[[coverage]] #{k + 1}"
        _check_keys(t, COVERAGE_KEYS, where)
        _require(t, "radius", where)
        target = CoverageTarget(
            _require(t, "name", where, str),
            _require(t, "points", where, str),
            float(_number(t, "radius", where, positive=True)),
            _require(t, "raster", where, str),
        )
        for ref in (target.points, target.raster):
            if ref not in known:
                raise DanglingReference(f"coverage {target.name}", ref)
        if kinds[target.raster] == "vector" or kinds[target.points] == "raster":
            raise ParseError(f"{where}: points must name a vector layer and raster a raster")
        coverage.append(target)

    analysis = doc.get("analysis", {})
    _check_keys(analysis, ANALYSIS_KEYS, "[analysis]")
    sql = analysis.get("sql", [])
    if isinstance(sql, str):
        sql = [sql]
    if not all(isinstance(q, str) for q in sql):
        raise ParseError("[analysis].sql must be a string or a list of strings")

    publish = None
    if "publish" in doc:
        p = doc["publish"]
        _check_keys(p, PUBLISH_KEYS, "[publish]")
        creators = p.get("creators", [])
        publish = PublishConfig(
            license=_require(p, "license", "[publish]", str),
            title=p.get("title", ""),
            creators=tuple([creators] if isinstance(creators, str) else creators),
            citation_doi=p.get("citation_doi"),
            citation=p.get("citation"),
            directory=_resolve(base, p["directory"]) if "directory" in p else None,
        )

    qa = None
    if "qa" in doc:
        q = doc["qa"]
        _check_keys(q, QA_KEYS, "[qa]")
        # the auth token is only ever read from the environment
        env = RemoteQaConfig.from_env()
        qa = RemoteQaConfig(_require(q, "endpoint", "[qa]", str), float(_number(q, "timeout", "[qa]", 30.0, True)),
                            env.token if env else None)
    else:
        qa = RemoteQaConfig.from_env()

    output = _require(doc, "output", "manifest", str)
    dictionary = doc.get("dictionary")
    return PipelineManifest(
        site=site,
        inputs=tuple(inputs),
        dictionary_path=_resolve(base, dictionary) if dictionary else None,
        enrichment_steps=tuple(steps),
        output_gpkg=_resolve(base, output),
        crs=_crs(doc.get("crs", 4326), "crs"),
        working_crs=_crs(doc.get("working_crs", 2100), "working_crs"),
        coverage=tuple(coverage),
        analysis_sql=tuple(sql),
        publish=publish,
        qa_endpoint=qa,
        base_dir=base,
    )


def load_manifest_file(path: str | Path) -> PipelineManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read manifest {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"manifest is not UTF-8: {exc}") from None
    return load_manifest(text, path.parent)
