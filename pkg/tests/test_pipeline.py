import hashlib
import json

import pytest

from argus.errors import DanglingReference, ParseError, PartialRunArtifactsRemoved, UnknownKey, UnknownLicense
from argus.gpkg import check_conformance, open_database
from argus.model import Stage
from argus.pipeline import (
    MetricsReport,
    PublishConfig,
    load_manifest,
    load_manifest_file,
    metrics_path,
    publish,
    run,
    verify_bundle,
    write_report,
)
from argus.pipeline.manifest import StepConfig
from argus.pipeline.run import _step_waves

from conftest import IDW_STEP, SITE, write_manifest as _manifest


# -- manifest ---------------------------------------------------------------

def test_minimal_manifest(tmp_path):
    (tmp_path / "a.csv").write_text("lon,lat,v\n25.27,37.39,1\n", encoding="utf-8")
    m = load_manifest('output = "o.gpkg"\n' + SITE + '[[input]]\npath = "a.csv"\n', tmp_path)
    assert m.input_ids == ["a"]
    assert m.enrichment_steps == ()
    assert m.output_gpkg == tmp_path / "o.gpkg"
    assert m.crs == 4326 and m.working_crs == 2100


def test_dangling_step_source(tmp_path):
    text = ('output = "o.gpkg"\n' + SITE + '[[input]]\nid = "a"\npath = "a.csv"\n'
            '[[step]]\nkind = "one_hot"\nsource = "foo"\noutput = "b"\ncolumn = "x"\n')
    with pytest.raises(DanglingReference) as e:
        load_manifest(text)
    assert e.value.missing == "foo"


def test_duplicate_input_id_reports_line():
    text = ('output = "o.gpkg"\n' + SITE + '[[input]]\nid = "a"\npath = "a.csv"\n'
            '[[input]]\nid = "a"\npath = "b.csv"\n')
    with pytest.raises(ParseError) as e:
        load_manifest(text)
    lines = text.splitlines()
    assert e.value.line is not None and lines[e.value.line - 1] == 'id = "a"'
    assert lines.index('id = "a"') + 1 < e.value.line


@pytest.mark.parametrize(
    "snippet",
    [
        'colour = "red"\n',
        '[[input]]\nid = "b"\npath = "b.csv"\nsheet = 1\n',
        '[[step]]\nkind = "idw"\nsource = "a"\noutput = "g"\ncolumn = "v"\ncell_size = 10.0\nbandwidth = 3.0\n',
    ],
)
def test_unknown_keys(snippet):
    text = 'output = "o.gpkg"\n' + snippet + SITE + '[[input]]\nid = "a"\npath = "a.csv"\n'
    if not snippet.startswith("colour"):
        text = 'output = "o.gpkg"\n' + SITE + '[[input]]\nid = "a"\npath = "a.csv"\n' + snippet
    with pytest.raises(UnknownKey):
        load_manifest(text)


def test_toml_syntax_error_carries_line():
    with pytest.raises(ParseError) as e:
        load_manifest('output = "o.gpkg"\n[site\n')
    assert e.value.line == 2


@pytest.mark.parametrize(
    "step",
    [
        '[[step]]\nkind = "spline"\nsource = "a"\noutput = "g"\n',
        '[[step]]\nkind = "idw"\nsource = "a"\noutput = "g"\ncolumn = "v"\n',
        '[[step]]\nkind = "idw"\nsource = "a"\noutput = "g"\ncolumn = "v"\ncell_size = -1.0\n',
        '[[step]]\nkind = "augment"\nsource = "a"\noutput = "a"\nn = 3\nsigma = 1.0\n',
    ],
)
def test_invalid_steps(step):
    text = 'output = "o.gpkg"\n' + SITE + '[[input]]\nid = "a"\npath = "a.csv"\n' + step
    with pytest.raises(ParseError):
        load_manifest(text)


@pytest.mark.parametrize("points, raster", [("a", "a"), ("g", "g"), ("a", "b")])
def test_coverage_kinds_checked(points, raster):
    text = ('output = "o.gpkg"\n' + SITE + '[[input]]\nid = "a"\npath = "a.csv"\n'
            '[[input]]\nid = "g"\npath = "g.asc"\n[[input]]\nid = "b"\npath = "b.shp"\n'
            f'[[coverage]]\nname = "c"\npoints = "{points}"\nradius = 10.0\nraster = "{raster}"\n')
    with pytest.raises(ParseError):
        load_manifest(text)


def test_coverage_on_raster_input_accepted():
    text = ('output = "o.gpkg"\n' + SITE + '[[input]]\nid = "a"\npath = "a.csv"\n'
            '[[input]]\nid = "g"\npath = "g.asc"\n'
            '[[coverage]]\nname = "c"\npoints = "a"\nradius = 10.0\nraster = "g"\n')
    assert load_manifest(text).coverage[0].raster == "g"


def test_step_waves_respect_dependencies():
    steps = [
        StepConfig("augment", "a", "a2", {"n": 1, "sigma": 1.0}),
        StepConfig("kde", "a2", "d", {"cell_size": 1.0}),
        StepConfig("one_hot", "b", "b1", {"column": "x"}),
    ]
    waves = _step_waves(steps)
    assert [[s.output for s in w] for w in waves] == [["a2", "b1"], ["d"]]


# -- run --------------------------------------------------------------------

def test_three_csv_run(tmp_path):
    m = load_manifest_file(_manifest(tmp_path))
    db, metrics, records = run(m)
    with db:
        assert [s.name for s in db.list_layers()] == ["meteo", "quakes", "stations"]
        assert metrics.n_input_datasets == 3 and metrics.n_databases == 1
        assert metrics.standardized_ratio_after == 1.0
        assert metrics.standardized_ratio_before < metrics.standardized_ratio_after
        meteo = db.read_layer("meteo")
        speeds = [r.values[meteo.column_index("wind_speed")] for r in meteo.rows]
        assert speeds == pytest.approx([10.0, 5.0, 7.5])
        temps = [r.values[meteo.column_index("air_temperature")] for r in meteo.rows]
        assert temps == pytest.approx([15.0, 20.0, 25.0])
        assert check_conformance(db.path) == []
        assert len(db.read_provenance()) == len(records)
    assert [p.name for p in (tmp_path / "out").iterdir() if p.suffix == ".gpkg"] == ["site.gpkg"]
    assert metrics_path(tmp_path / "out" / "site.gpkg").exists()


def test_provenance_lineage(tmp_path):
    m = load_manifest_file(_manifest(tmp_path, IDW_STEP))
    db, _, records = run(m)
    db.close()
    ingests = {r.input_id: r for r in records if r.stage == Stage.INGEST}
    raw = (tmp_path / "stations.csv").read_bytes()
    assert ingests["stations"].sha256 == hashlib.sha256(raw).hexdigest()
    assert ingests["stations"].parameters["path"] == "stations.csv"
    integrated = [r for r in records if r.stage == Stage.INTEGRATE]
    assert {r.input_id for r in integrated} == {"meteo", "quakes", "stations", "wind_idw"}
    for r in integrated:
        assert all(i in ingests for i in r.parameters["inputs"])
    idw = next(r for r in integrated if r.input_id == "wind_idw")
    assert idw.sha256 == ingests["stations"].sha256
    stages = [r.stage for r in records]
    assert stages.index(Stage.INTEGRATE) > stages.index(Stage.ENRICH) > stages.index(Stage.STANDARDIZE)


def test_run_with_idw_reports_coverage_gain(tmp_path):
    m = load_manifest_file(_manifest(tmp_path, IDW_STEP))
    db, metrics, _ = run(m)
    db.close()
    assert metrics.coverage_before["wind"] < metrics.coverage_after["wind"] == 1.0
    text = metrics.to_text()
    assert "Number of distinct datasets" in text and "3" in text and "1 integrated database" in text
    assert MetricsReport.from_json(metrics.to_json()) == metrics
    assert metrics.cross_dataset_query_seconds < 10


def test_run_twice_is_deterministic(tmp_path):
    m = load_manifest_file(_manifest(tmp_path, IDW_STEP))
    db, _, rec1 = run(m)
    with db:
        d1 = db.content_digest()
    db, _, rec2 = run(m)
    with db:
        d2 = db.content_digest()
    assert d1 == d2
    assert [(r.input_id, r.stage, r.sha256) for r in rec1] == [(r.input_id, r.stage, r.sha256) for r in rec2]


def test_workers_do_not_change_content(tmp_path):
    m = load_manifest_file(_manifest(tmp_path, IDW_STEP))
    digests = []
    for workers in (1, 8):
        db, _, _ = run(m, workers=workers)
        with db:
            digests.append(db.content_digest())
    assert digests[0] == digests[1]


def test_unreadable_input_names_it(tmp_path):
    extra = '\n[[input]]\nid = "ghost"\npath = "missing.csv"\n'
    m = load_manifest_file(_manifest(tmp_path, extra_inputs=extra))
    with pytest.raises(PartialRunArtifactsRemoved) as e:
        run(m, workers=4)
    assert e.value.input_id == "ghost" and e.value.stage == "ingest"
    assert e.value.exit_code == 3
    out = tmp_path / "out"
    assert not (out / "site.gpkg").exists()
    assert list(out.iterdir()) == []


def test_failed_rerun_keeps_previous_database(tmp_path):
    path = _manifest(tmp_path)
    db, _, _ = run(load_manifest_file(path))
    with db:
        before = db.content_digest()
    (tmp_path / "meteo.csv").write_text("stn,lon,lat\nA,25.27\n", encoding="utf-8")
    with pytest.raises(PartialRunArtifactsRemoved) as e:
        run(load_manifest_file(path))
    assert e.value.input_id == "meteo" and e.value.exit_code == 2
    with open_database(tmp_path / "out" / "site.gpkg") as db:
        assert db.content_digest() == before


def test_zero_workers_rejected(tmp_path):
    with pytest.raises(ValueError):
        run(load_manifest_file(_manifest(tmp_path)), workers=0)


# -- publish ----------------------------------------------------------------

def test_publish_bundle(tmp_path):
    m = load_manifest_file(_manifest(tmp_path, IDW_STEP))
    db, _, _ = run(m)
    db.close()
    bundle = publish(m.output_gpkg, m.publish)
    doc = json.loads((bundle / "publication.json").read_text(encoding="utf-8"))
    assert doc["license"]["spdx"] == "CC-BY-4.0"
    assert "CC-BY-4.0" in (bundle / "LICENSE").read_text(encoding="utf-8")
    assert doc["title"] == "Test site" and doc["creators"] == ["A. Author"]
    names = {e["path"] for e in doc["files"]}
    assert {"site.gpkg", "site_wind_idw.asc", "site.metrics.json", "LICENSE"} <= names
    for e in doc["files"]:
        data = (bundle / e["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == e["sha256"]
        assert len(data) == e["bytes"]
    assert verify_bundle(bundle) == []
    (bundle / "LICENSE").write_text("tampered", encoding="utf-8")
    assert verify_bundle(bundle) == ["LICENSE"]
    again = publish(m.output_gpkg, m.publish)
    assert again == bundle and verify_bundle(bundle) == []
    assert [p.name for p in bundle.parent.iterdir() if p.name.startswith(".")] == []


def test_publish_unknown_license(tmp_path):
    m = load_manifest_file(_manifest(tmp_path))
    run(m)[0].close()
    with pytest.raises(UnknownLicense):
        publish(m.output_gpkg, PublishConfig("NOT-A-LICENSE"))


# -- report -----------------------------------------------------------------

def test_report_files(tmp_path):
    m = load_manifest_file(_manifest(tmp_path, IDW_STEP))
    db, _, _ = run(m)
    with db:
        files = write_report(db, tmp_path / "report")
    names = {f.name for f in files}
    assert {"layers.csv", "metrics.csv", "metrics.png", "overview.png", "raster_wind_idw.png"} == names
    for f in files:
        if f.suffix == ".png":
            assert f.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    rows = (tmp_path / "report" / "layers.csv").read_text(encoding="utf-8").splitlines()
    assert rows[0].startswith("name,kind") and len(rows) == 5
