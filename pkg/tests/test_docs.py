import re
from pathlib import Path

from argus.pipeline import load_manifest
from argus.pipeline.stepfile import load_step_config
from argus.standardize import AttributeDictionary

DOC = Path(__file__).resolve().parent.parent / "docs" / "manifest.md"


def _blocks(lang):
    return re.findall(rf"```{lang}\n(.*?)```", DOC.read_text(encoding="utf-8"), re.S)


def test_documented_manifest_parses(tmp_path):
    m = load_manifest(_blocks("toml")[0], tmp_path)
    assert m.input_ids == ["stations", "soil", "monuments", "dem", "notes"]
    assert m.layer_names()[-4:] == ["wind_idw", "moisture", "moisture_variance", "monument_types"]
    assert m.publish.license == "CC-BY-4.0" and m.coverage[0].raster == "wind_idw"
    assert [p.field_name for p in m.inputs[-1].patterns] == ["observed_on", "wind"]


def test_documented_step_file_parses(tmp_path):
    path = tmp_path / "steps.toml"
    path.write_text(_blocks("toml")[1], encoding="utf-8")
    config = load_step_config(path)
    assert config.database == tmp_path / "build" / "site.gpkg"
    assert [s.kind for s in config.steps] == ["kde"]


def test_documented_dictionary_parses():
    text = _blocks("text")[0]
    d = AttributeDictionary.parse(text)
    assert d.lookup("mean wind").canonical_name == "wind_speed"
