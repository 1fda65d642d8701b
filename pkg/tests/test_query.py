import json
import math
import statistics
import threading
import time
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from argus.crs import GREEK_GRID, WGS84
from argus.errors import (
    AmbiguousLayer,
    HttpError,
    MalformedResponse,
    NlQueryError,
    NotReadOnly,
    QaTimeout,
    SqlError,
    UnknownColumn,
    UnparsableQuestion,
)
from argus.gpkg import create_database
from argus.model import AttributeField, Feature, FeatureLayer, Geometry, ValueType
from argus.query import (
    Aggregate,
    Catalog,
    NlCase,
    Op,
    QueryResult,
    RemoteQaConfig,
    ast_to_sql,
    evaluate_nl_suite,
    normalize_sql,
    parse_nl,
    remote_qa,
    serialize_table_for_qa,
    sql_query,
)

F = AttributeField


def meteo_layer():
    schema = (F("station", value_type=ValueType.TEXT), F("wind_speed", value_type=ValueType.REAL),
              F("air_temperature", value_type=ValueType.REAL))
    rows = [("north", 3.0, 20.0), ("north", 5.0, 22.5), ("south", 7.5, 25.0), ("south", 2.0, 19.0),
            ("east", 4.0, 21.0), ("east", 6.0, None), ("west", 1.5, 18.0)]
    return FeatureLayer("meteo", WGS84, schema, tuple(Feature(r, Geometry.point(25.27, 37.39)) for r in rows))


def quakes_layer():
    schema = (F("magnitude", value_type=ValueType.REAL), F("depth", value_type=ValueType.REAL),
              F("station", value_type=ValueType.TEXT))
    rows = [(4.1, 10.0, "north"), (5.3, 12.0, "south"), (6.0, 8.0, "north"), (5.0, 20.0, "east")]
    return FeatureLayer("earthquakes", WGS84, schema, tuple(Feature(r, Geometry.point(25.0 + i / 10, 37.0)) for i, r in enumerate(rows)))


def stations_layer():
    schema = (F("station", value_type=ValueType.TEXT), F("elevation", value_type=ValueType.INTEGER))
    rows = [("north", 110), ("south", 12), ("east", 40)]
    return FeatureLayer("stations", WGS84, schema, tuple(Feature(r, Geometry.point(25.27, 37.39 + i / 100)) for i, r in enumerate(rows)))


@pytest.fixture
def db(tmp_path):
    d = create_database(tmp_path / "q.gpkg")
    for layer in (meteo_layer(), quakes_layer(), stations_layer()):
        d.write_layer(layer)
    yield d
    d.close()


@pytest.fixture
def catalog(db):
    return Catalog.from_database(db)


# ---------------------------------------------------------------- SQL


def test_count(db):
    assert sql_query(db, "SELECT COUNT(*) FROM meteo").scalar() == 7


@pytest.mark.parametrize(
    "sql",
    ["DROP TABLE meteo", "delete from meteo", "SELECT 1; DROP TABLE meteo", "  -- hi\nINSERT INTO meteo DEFAULT VALUES",
     "WITH x AS (SELECT 1) DELETE FROM meteo", "PRAGMA user_version = 3"],
)
def test_not_read_only(db, sql):
    with pytest.raises(NotReadOnly):
        sql_query(db, sql)
    assert sql_query(db, "SELECT COUNT(*) FROM meteo").scalar() == 7


def test_semicolons_inside_literals_are_fine(db):
    assert sql_query(db, "SELECT 'a;b' AS x;").rows == [("a;b",)]
    assert sql_query(db, "/* lead */ SELECT 1 -- trailing; comment").scalar() == 1


def test_sql_error_passthrough(db):
    with pytest.raises(SqlError, match="no such table"):
        sql_query(db, "SELECT * FROM nope")


def test_join_matches_hand_enumeration(db):
    res = sql_query(
        db,
        'SELECT q.magnitude, s.elevation FROM earthquakes q JOIN stations s ON q.station = s.station '
        "WHERE q.magnitude >= 5 ORDER BY q.magnitude",
    )
    assert res.columns == ["magnitude", "elevation"]
    assert res.rows == [(5.0, 40), (5.3, 12), (6.0, 110)]


def test_geometry_as_wkt(db):
    assert sql_query(db, "SELECT geom FROM stations ORDER BY fid LIMIT 1").scalar() == "POINT (25.27 37.39)"


def test_normalize_sql():
    assert normalize_sql('select  AVG("wind_speed")\nfrom "meteo";') == normalize_sql("SELECT avg(wind_speed) FROM meteo")
    assert normalize_sql("SELECT 'Abc'") != normalize_sql("SELECT 'abc'")


# ---------------------------------------------------------------- NL parsing


def test_parse_average(catalog):
    ast = parse_nl("what is the average wind_speed in meteo", catalog)
    assert (ast.aggregate, ast.target_column, ast.layer, ast.filters, ast.group_by) == (Aggregate.AVG, "wind_speed", "meteo", (), None)
    assert ast_to_sql(ast) == 'SELECT AVG("wind_speed") FROM "meteo"'


def test_parse_how_many_layer_noun(catalog):
    ast = parse_nl("how many earthquakes where magnitude above 5", catalog)
    assert ast.aggregate is Aggregate.COUNT and ast.target_column is None and ast.layer == "earthquakes"
    assert [(f.column, f.op, f.values) for f in ast.filters] == [("magnitude", Op.GT, (5,))]
    assert ast_to_sql(ast) == 'SELECT COUNT(*) FROM "earthquakes" WHERE "magnitude" > 5'


def test_out_of_grammar(catalog):
    with pytest.raises(UnparsableQuestion):
        parse_nl("tell me a story about Delos", catalog)


@pytest.mark.parametrize(
    "question,sql",
    [
        ("max magnitude in earthquakes", 'SELECT MAX("magnitude") FROM "earthquakes"'),
        ("show the minimum depth from earthquakes with magnitude at least 5",
         'SELECT MIN("depth") FROM "earthquakes" WHERE "magnitude" >= 5'),
        ("total wind speed in meteo where station is north", 'SELECT SUM("wind_speed") FROM "meteo" WHERE "station" = \'north\''),
        ("mean air_temperature in meteo by station",
         'SELECT "station", AVG("air_temperature") FROM "meteo" GROUP BY "station" ORDER BY "station"'),
        ("number of rows in meteo", 'SELECT COUNT(*) FROM "meteo"'),
        ("count wind_speed in meteo", 'SELECT COUNT("wind_speed") FROM "meteo"'),
        ("how many earthquakes with depth between 9 and 15 and magnitude under 6",
         'SELECT COUNT(*) FROM "earthquakes" WHERE "depth" BETWEEN 9 AND 15 AND "magnitude" < 6'),
        ("which elevation in stations where station = 'north'", 'SELECT "elevation" FROM "stations" WHERE "station" = \'north\''),
        ("average elevation?", 'SELECT AVG("elevation") FROM "stations"'),
        ("What is the AVERAGE Wind Speed in METEO", 'SELECT AVG("wind_speed") FROM "meteo"'),
        ("average wind_speed in meteo where air_temperature <= 21.5",
         'SELECT AVG("wind_speed") FROM "meteo" WHERE "air_temperature" <= 21.5'),
    ],
)
def test_grammar_examples(catalog, question, sql):
    assert ast_to_sql(parse_nl(question, catalog)) == sql


def test_fuzzy_correction_noted(catalog):
    ast = parse_nl("average magnitud in earthquaks", catalog)
    assert (ast.target_column, ast.layer) == ("magnitude", "earthquakes")
    assert len(ast.corrections) == 2


def test_unknown_column_suggestions(catalog):
    with pytest.raises(UnknownColumn) as info:
        parse_nl("average zzzzzzzz in meteo", catalog)
    assert len(info.value.suggestions) == 3


def test_column_missing_from_named_layer(catalog):
    with pytest.raises(UnknownColumn) as info:
        parse_nl("average magnitude in meteo", catalog)
    assert "wind_speed" in info.value.suggestions


def test_ambiguous_layer(catalog):
    with pytest.raises(AmbiguousLayer) as info:
        parse_nl("show station", catalog)
    assert info.value.candidates == ["earthquakes", "meteo", "stations"]


def test_unparsable_reports_prefix(catalog):
    with pytest.raises(UnparsableQuestion) as info:
        parse_nl("average wind_speed in meteo sideways", catalog)
    assert info.value.prefix == "average wind_speed in meteo"


@settings(max_examples=300, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.text(max_size=80))
def test_parser_never_panics(catalog, text):
    try:
        ast = parse_nl(text, catalog)
    except NlQueryError:
        return
    ast_to_sql(ast)


# ---------------------------------------------------------------- property: NL vs in-memory oracle

AGG_WORDS = {Aggregate.AVG: ["average", "mean"], Aggregate.MAX: ["max", "maximum"], Aggregate.MIN: ["min", "minimum"],
             Aggregate.SUM: ["sum", "total"], Aggregate.COUNT: ["count", "number of"]}
OPS = {Op.GT: ["above", ">", "over"], Op.LT: ["below", "<", "under"], Op.GE: ["at least", ">="], Op.LE: ["at most", "<="]}


def _random_catalog(rng):
    layers = []
    for li in range(int(rng.integers(1, 4))):
        ncols = int(rng.integers(2, 5))
        names = [f"v{li}{c}x" for c in "abcd"[:ncols]]
        schema = tuple(F(n, value_type=ValueType.INTEGER if j == 0 else ValueType.REAL) for j, n in enumerate(names))
        schema += (F(f"g{li}kind", value_type=ValueType.TEXT),)
        nrows = int(rng.integers(0, 25))
        rows = []
        for _ in range(nrows):
            vals = [int(rng.integers(-20, 20))] + [float(np.round(rng.normal(0, 10), 2)) if rng.random() > 0.1 else None for _ in names[1:]]
            rows.append(Feature(tuple(vals) + (str(rng.choice(["a", "b", "c"])),), Geometry.point(0.0, 0.0)))
        layers.append(FeatureLayer(f"lay{li}er", GREEK_GRID, schema, tuple(rows)))
    return layers


def _oracle(layer, agg, target, filters, group):
    idx = {f.column_name: i for i, f in enumerate(layer.schema)}

    def keep(r):
        for col, op, vals in filters:
            v = r.values[idx[col]]
            if v is None:
                return False
            if op is Op.GT and not v > vals[0]: return False
            if op is Op.LT and not v < vals[0]: return False
            if op is Op.GE and not v >= vals[0]: return False
            if op is Op.LE and not v <= vals[0]: return False
            if op is Op.BETWEEN and not vals[0] <= v <= vals[1]: return False
        return True

    def aggregate(rows):
        if agg is Aggregate.COUNT and target is None:
            return len(rows)
        vals = [r.values[idx[target]] for r in rows if r.values[idx[target]] is not None]
        if agg is Aggregate.COUNT:
            return len(vals)
        if not vals:
            return None
        return {Aggregate.AVG: statistics.fmean, Aggregate.MAX: max, Aggregate.MIN: min, Aggregate.SUM: math.fsum}[agg](vals)

    rows = [r for r in layer.rows if keep(r)]
    if group is None:
        return [(aggregate(rows),)]
    keys = sorted({r.values[idx[group]] for r in rows})
    return [(k, aggregate([r for r in rows if r.values[idx[group]] == k])) for k in keys]


def _same(a, b):
    if len(a) != len(b):
        return False
    for ra, rb in zip(a, b):
        for x, y in zip(ra, rb):
            if isinstance(x, float) or isinstance(y, float):
                if x is None or y is None or not math.isclose(x, y, rel_tol=1e-9, abs_tol=1e-9):
                    return False
            elif x != y:
                return False
    return True


def generate_question(rng, layers):
    layer = layers[int(rng.integers(len(layers)))]
    numeric = [f.column_name for f in layer.schema if f.value_type in (ValueType.INTEGER, ValueType.REAL)]
    agg = list(AGG_WORDS)[int(rng.integers(5))]
    target = None if agg is Aggregate.COUNT and rng.random() < 0.4 else str(rng.choice(numeric))
    words = [str(rng.choice(["what is the", "show", ""]))] if agg is not Aggregate.COUNT or target else []
    if agg is Aggregate.COUNT and target is None:
        words += [str(rng.choice(["how many", "number of", "count"])), str(rng.choice(["rows", "records"])), "in", layer.name]
    else:
        words += [str(rng.choice(AGG_WORDS[agg])), target, str(rng.choice(["in", "from"])), layer.name]
    filters = []
    for k in range(int(rng.integers(0, 3))):
        col = str(rng.choice(numeric))
        words.append("where" if k == 0 else "and")
        if rng.random() < 0.25:
            lo = int(rng.integers(-15, 5))
            hi = lo + int(rng.integers(0, 20))
            words += [col, "between", str(lo), "and", str(hi)]
            filters.append((col, Op.BETWEEN, (lo, hi)))
        else:
            op = list(OPS)[int(rng.integers(4))]
            lit = float(np.round(rng.uniform(-15, 15), 1))
            words += [col, str(rng.choice(OPS[op])), repr(lit)]
            filters.append((col, op, (lit,)))
    group = None
    if rng.random() < 0.3:
        group = layer.schema[-1].column_name
        words += [str(rng.choice(["per", "by", "grouped by"])), group]
    return " ".join(w for w in words if w), layer, agg, target, filters, group


def test_nl_property_500(tmp_path):
    rng = np.random.default_rng(2024)
    correct = total = 0
    for k in range(25):
        layers = _random_catalog(rng)
        with create_database(tmp_path / f"r{k}.gpkg") as d:
            for layer in layers:
                d.write_layer(layer)
            catalog = Catalog.from_database(d)
            for _ in range(20):
                question, layer, agg, target, filters, group = generate_question(rng, layers)
                sql = ast_to_sql(parse_nl(question, catalog))
                got = sql_query(d, sql).rows
                total += 1
                correct += _same(got, _oracle(layer, agg, target, filters, group))
    assert total == 500
    assert correct == 500


# ---------------------------------------------------------------- serialization


def test_serialize_small():
    assert serialize_table_for_qa(QueryResult(["a", "b"], [(1, 2), (3, 4)]), 10, 1000) == "a | b\n1 | 2\n3 | 4"


def test_serialize_truncates_rows():
    res = QueryResult(["n"], [(i,) for i in range(100)])
    text = serialize_table_for_qa(res, 5, 1000)
    assert text.splitlines() == ["n", "0", "1", "2", "3", "4", "… (95 more rows)"]


def test_serialize_tiny_budget():
    res = QueryResult(["alpha", "beta"], [(1, 2), (3, 4), (5, 6)])
    text = serialize_table_for_qa(res, 5, 20)
    assert text == "alph\n… (3 more rows)"


@settings(max_examples=200)
@given(st.lists(st.lists(st.one_of(st.none(), st.integers(), st.text(max_size=12)), min_size=2, max_size=2), max_size=30),
       st.integers(1, 40), st.integers(0, 400))
def test_serialize_budget_holds(rows, max_rows, max_chars):
    text = serialize_table_for_qa(QueryResult(["col_a", "col_b"], [tuple(r) for r in rows]), max_rows, max_chars)
    assert len(text) <= max_chars


# ---------------------------------------------------------------- remote QA


class _Stub(BaseHTTPRequestHandler):
    behaviour = "echo"
    seen = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        _Stub.seen.append((body, self.headers.get("Authorization")))
        mode = _Stub.behaviour
        if mode == "slow":
            time.sleep(1.0)
        if mode == "500":
            self.send_response(500)
            self.end_headers()
            return
        payload = b"not json" if mode == "garbage" else json.dumps({"answer": "42"}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub():
    server = HTTPServer(("127.0.0.1", 0), _Stub)
    t = threading.Thread(target=server.serve_forever, daemon=True)
    t.start()
    _Stub.seen.clear()
    yield f"http://127.0.0.1:{server.server_address[1]}/qa"
    server.shutdown()
    server.server_close()


def test_remote_qa_echo(stub):
    _Stub.behaviour = "echo"
    log = []
    cfg = RemoteQaConfig(stub, 5.0, "s3cret")
    assert remote_qa("what?", "a | b\n1 | 2", cfg, log.append) == "42"
    body, auth = _Stub.seen[0]
    assert body == {"question": "what?", "table": "a | b\n1 | 2"} and auth == "Bearer s3cret"
    assert "s3cret" not in repr(log[0]) and "s3cret" not in repr(cfg)
    assert log[0].answer == "42" and len(log[0].table_sha256) == 64


@pytest.mark.parametrize("mode,error", [("500", HttpError), ("garbage", MalformedResponse), ("slow", QaTimeout)])
def test_remote_qa_failures(stub, mode, error):
    _Stub.behaviour = mode
    with pytest.raises(error) as info:
        remote_qa("q", "t", RemoteQaConfig(stub, 0.3))
    if mode == "500":
        assert info.value.status == 500


def test_config_from_env():
    assert RemoteQaConfig.from_env({}) is None
    cfg = RemoteQaConfig.from_env({"ARGUS_QA_ENDPOINT": "http://x", "ARGUS_QA_TIMEOUT": "2"})
    assert (cfg.url, cfg.timeout, cfg.token) == ("http://x", 2.0, None)


# ---------------------------------------------------------------- suites


def test_evaluate_suite(db):
    cases = [
        NlCase("average wind_speed in meteo", expected_sql='SELECT AVG("wind_speed") FROM "meteo"'),
        NlCase("how many earthquakes where magnitude above 5", expected_answer="2"),
        NlCase("max elevation in stations", expected_answer="110"),
        NlCase("min elevation in stations", expected_answer=""),
        NlCase("tell me a story about Delos"),
    ]
    report = evaluate_nl_suite(db, cases)
    assert [o.status for o in report.outcomes] == ["correct", "correct", "correct", "incorrect", "unparsable"]
    assert report.accuracy == pytest.approx(3 / 5)
    assert "accuracy: 3/5" in report.to_text()
