"""A synthetic Delos-like corpus: 53 heterogeneous datasets, a complete
attribute dictionary, a run manifest and a 20-question NL suite.

Every vector dataset has seven fields of which exactly one is already in its
canonical form, so the raw corpus is 1/7 standardized.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from argus.crs import transform_coords
from argus.crs.registry import GREEK_GRID, WGS84
from argus.ingest import write_ascii_grid, write_geotiff_minimal, write_shapefile
from argus.model import AttributeField, Feature, FeatureLayer, Geometry, RasterGrid, ValueType, points_in_polygon
from argus.query import NlCase

SEED = 1453
SITE_ID = "delos"
CENTROID = (25.2700, 37.3970)
# simplified island outline, lon/lat, clockwise from the north tip
BOUNDARY = [
    (25.2705, 37.4095), (25.2745, 37.4060), (25.2790, 37.4010), (25.2810, 37.3960),
    (25.2790, 37.3905), (25.2740, 37.3870), (25.2690, 37.3855), (25.2640, 37.3875),
    (25.2620, 37.3920), (25.2600, 37.3975), (25.2590, 37.4030), (25.2630, 37.4075),
    (25.2705, 37.4095),
]
STATIONS = [("Kynthos", 25.2735, 37.3925), ("Harbour", 25.2660, 37.4005), ("Stadium", 25.2745, 37.4035)]
STATION_RADIUS_M = 250.0

N_SURVEYS = 10
MONUMENT_SECTORS = [
    "sanctuary_of_apollo", "sacred_lake", "theatre_quarter", "stadium_district", "kynthos_slope",
    "agora_of_the_italians", "agora_of_the_competaliasts", "house_of_dionysus", "house_of_the_dolphins",
    "terrace_of_the_lions", "heraion", "sanctuary_of_foreign_gods", "gymnasium", "skardana_bay",
    "fourni_bay", "south_harbour", "sacred_way", "granite_palaestra",
]
GEOGRAPHIC_MONUMENTS = {"heraion", "gymnasium", "fourni_bay"}
N_DEM = 10
N_NDVI = 2
N_MAG = 5

DICTIONARY = """\
canonical_name|description|unit|type|synonyms|conversions
# stations and weather
station|Weather station name||text|stn;station name;station_id|
longitude|WGS84 longitude|deg|real|lon;lng;long;x_wgs84|
latitude|WGS84 latitude|deg|real|lat;y_wgs84|
wind_speed|Mean wind speed|m/s|real|ws;wind;mean wind;windspeed|km/h=1/3.6;kn=1852/3600
air_temperature|Air temperature|degC|real|temp;temp_c;t_air|degF=5/9,-160/9
relative_humidity|Relative humidity|%|real|rh;humidity|
observed_on|Observation date||date|obs_date;obs;date|
elevation|Height above mean sea level|m|real|elev;alt;altitude|ft=0.3048
install_year|Year the station was installed||integer|installed;year installed|
operator|Operating body||text|owner;run_by|
# soil
soil_moisture|Volumetric soil water content|%|real|moisture;vwc;sm|
soil_ph|Soil pH||real|ph;ph value|
sample_id|Soil sample identifier||text|sample;smp|
sampling_depth|Depth of the soil sample|m|real|samp depth;sample depth|cm=0.01
# seismicity
event_id|Seismic event identifier||text|evid;event|
magnitude|Local magnitude||real|mag;ml|
focal_depth|Hypocentre depth|km|real|depth;dep|m=0.001
event_date|Origin date||date|origin_date;evdate|
agency|Reporting network||text|network;src_agency|
# monuments and excavation
monument_name|Monument name||text|name;mon_name;label|
monument_type|Monument class||text|type;mon_type;category|
period|Chronological period||text|era;phase;chron|
condition|State of preservation||text|cond;state;preserv|
area|Footprint area|m2|real|area_m2;shp_area|
height|Maximum preserved height|m|real|ht;max_ht|
excavation_year|Year of first excavation||integer|exc_year;year_exc|
trench|Trench identifier||text|trench_id;tr|
find_count|Number of finds||integer|finds;n_finds|
material|Find material||text|mat;fabric|
sherd_weight|Total weight of finds|g|real|weight;wt|kg=1000
context_depth|Depth of the stratigraphic context|m|real|ctx depth;context depth|cm=0.01
recorded_by|Recorder||text|recorder;author|
notes|Free-text remarks||text|remarks;comment|
inventory_number|Museum inventory number||text|inv_no;inv|
language|Language of the inscription||text|lang;script|
visitor_count|Visitors counted that day||integer|visitors;n_visitors|
"""

ANALYSIS_SQL = [
    # wind climate per station joined with station metadata
    'SELECT s.station, s.elevation, COUNT(m.fid) AS n_obs, AVG(m.wind_speed) AS mean_wind, '
    'MAX(m.air_temperature) AS max_temp FROM stations s JOIN meteo m ON m.station = s.station '
    'GROUP BY s.station ORDER BY s.station',
    # finds per excavated trench, across all survey layers
    'SELECT t.trench, t.period, COUNT(f.trench) AS n_records, SUM(f.find_count) AS finds, '
    'SUM(f.sherd_weight) AS weight_g FROM trenches t LEFT JOIN ('
    + " UNION ALL ".join(f"SELECT trench, find_count, sherd_weight FROM trench_finds_{k:02d}" for k in range(1, N_SURVEYS + 1))
    + ') f ON f.trench = t.trench GROUP BY t.trench ORDER BY t.trench',
    # monuments by period next to the mean on-site soil moisture
    'SELECT m.period, COUNT(*) AS monuments, (SELECT AVG(soil_moisture) FROM soil_samples) AS mean_moisture '
    'FROM monuments_sanctuary_of_apollo m GROUP BY m.period ORDER BY m.period',
]

NL_SUITE = [
    NlCase("what is the average wind_speed in meteo", expected_sql='SELECT AVG("wind_speed") FROM "meteo"'),
    NlCase("maximum air temperature in meteo", expected_sql='SELECT MAX("air_temperature") FROM "meteo"'),
    NlCase("min relative_humidity from meteo where station is Harbour",
           expected_sql="SELECT MIN(\"relative_humidity\") FROM \"meteo\" WHERE \"station\" = 'Harbour'"),
    NlCase("mean wind_speed in meteo by station",
           expected_sql='SELECT "station", AVG("wind_speed") FROM "meteo" GROUP BY "station" ORDER BY "station"'),
    NlCase("how many earthquakes where magnitude above 4",
           expected_sql='SELECT COUNT(*) FROM "earthquakes" WHERE "magnitude" > 4'),
    NlCase("what is the maximum magnitude in earthquakes", expected_sql='SELECT MAX("magnitude") FROM "earthquakes"'),
    NlCase("average focal_depth in earthquakes with magnitude at least 3.5",
           expected_sql='SELECT AVG("focal_depth") FROM "earthquakes" WHERE "magnitude" >= 3.5'),
    NlCase("how many earthquakes with focal_depth between 5 and 15",
           expected_sql='SELECT COUNT(*) FROM "earthquakes" WHERE "focal_depth" BETWEEN 5 AND 15'),
    NlCase("total find_count in trench_finds_01", expected_sql='SELECT SUM("find_count") FROM "trench_finds_01"'),
    NlCase("sum sherd_weight in trench_finds_02 grouped by material",
           expected_sql='SELECT "material", SUM("sherd_weight") FROM "trench_finds_02" GROUP BY "material" ORDER BY "material"'),
    NlCase("number of rows in soil_samples", expected_sql='SELECT COUNT(*) FROM "soil_samples"'),
    NlCase("average soil moisture in soil_samples where soil_ph under 7.5",
           expected_sql='SELECT AVG("soil_moisture") FROM "soil_samples" WHERE "soil_ph" < 7.5'),
    NlCase("show the maximum height in monuments_sanctuary_of_apollo",
           expected_sql='SELECT MAX("height") FROM "monuments_sanctuary_of_apollo"'),
    NlCase("count monuments_theatre_quarter per period",
           expected_sql='SELECT "period", COUNT(*) FROM "monuments_theatre_quarter" GROUP BY "period" ORDER BY "period"'),
    NlCase("which elevation in stations where station = 'Kynthos'",
           expected_sql="SELECT \"elevation\" FROM \"stations\" WHERE \"station\" = 'Kynthos'"),
    NlCase("average visitor_count in field_notes_1", expected_sql='SELECT AVG("visitor_count") FROM "field_notes_1"'),
    NlCase("minimum excavation_year from trenches", expected_sql='SELECT MIN("excavation_year") FROM "trenches"'),
    NlCase("tell me a story about Delos"),
    NlCase("why did the sanctuary of apollo decline"),
    NlCase("compare wind in meteo to stations"),
]
IN_GRAMMAR = 17


@dataclass(frozen=True)
class Corpus:
    root: Path
    manifest: Path
    dictionary: Path
    n_datasets: int


def _inside(rng: np.random.Generator, n: int, margin: float = 0.0) -> np.ndarray:
    poly = Geometry.polygon(BOUNDARY)
    xs, ys = zip(*BOUNDARY)
    out = []
    while len(out) < n:
        x = rng.uniform(min(xs) + margin, max(xs) - margin)
        y = rng.uniform(min(ys) + margin, max(ys) - margin)
        if points_in_polygon([x], [y], poly)[0]:
            out.append((x, y))
    return np.array(out)


def _to_grid(lonlat: np.ndarray) -> np.ndarray:
    e, n = transform_coords(lonlat[:, 0], lonlat[:, 1], WGS84, GREEK_GRID)
    return np.column_stack([e, n])


def _csv(path: Path, header: list[str], rows: list[list]) -> None:
    def cell(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(round(float(v), 6))
        return str(v)
    lines = [",".join(header)] + [",".join(cell(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _shapefile(path: Path, layer: FeatureLayer, with_prj: bool = True) -> None:
    shp, dbf, prj = write_shapefile(layer)
    path.with_suffix(".shp").write_bytes(shp)
    path.with_suffix(".dbf").write_bytes(dbf)
    if with_prj:
        path.with_suffix(".prj").write_text(prj, encoding="utf-8")


def _dates(start: dt.date, n: int) -> list[dt.date]:
    return [start + dt.timedelta(days=k) for k in range(n)]


def _write_weather(root: Path, rng: np.random.Generator) -> list[str]:
    rows = []
    for name, lon, lat in STATIONS:
        base = rng.uniform(4.0, 9.0)
        for day in _dates(dt.date(2023, 7, 1), 7):
            rows.append([name, lon, lat, round(base + rng.normal(0, 1.2), 2), round(rng.uniform(78, 95), 1),
                         round(rng.uniform(40, 75), 1), day.isoformat()])
    _csv(root / "meteo.csv", ["stn", "lon", "lat", "wind_speed [m/s]", "temp [degF]", "RH [%]", "obs_date"], rows)
    srows = []
    for k, (name, lon, lat) in enumerate(STATIONS):
        srows.append([name, lon, lat, round(rng.uniform(5, 110), 1), round(rng.uniform(10, 30), 1), 2015 + k, "Ephorate of Cyclades"])
    _csv(root / "stations.csv",
         ["station name", "LON", "LAT", "elevation [m]", "mean wind [km/h]", "installed", "owner"], srows)
    return ["meteo", "stations"]


def _write_soil(root: Path, rng: np.random.Generator) -> str:
    pts = _inside(rng, 30, 0.001)
    rows = []
    for k, (lon, lat) in enumerate(pts):
        # smooth moisture field: wetter towards the sacred lake in the north-west
        moisture = 12 + 10 * np.exp(-(((lon - 25.266) / 0.006) ** 2 + ((lat - 37.401) / 0.008) ** 2)) + rng.normal(0, 0.6)
        rows.append([f"S{k + 1:03d}", lon, lat, round(float(moisture), 3), round(rng.uniform(6.8, 8.4), 2),
                     int(rng.choice([10, 20, 30])), rng.choice(["A. Petrou", "M. Laurent"])])
    _csv(root / "soil_samples.csv",
         ["sample", "lon", "lat", "moisture [%]", "pH value", "samp depth [cm]", "recorded_by"], rows)
    return "soil_samples"


def _write_quakes(root: Path, rng: np.random.Generator) -> str:
    rows = []
    for k in range(40):
        lon = float(np.clip(rng.normal(25.6, 0.35), 24.6, 26.6))
        lat = float(np.clip(rng.normal(37.2, 0.25), 36.6, 37.9))
        day = dt.date(2022, 1, 1) + dt.timedelta(days=int(rng.integers(0, 365)))
        rows.append([f"EQ{k + 1:04d}", lon, lat, round(float(min(rng.gamma(2.0, 0.6) + 1.5, 6.4)), 1),
                     round(float(rng.uniform(2, 25)), 1), day.isoformat(), rng.choice(["NOA", "AUTH"])])
    _csv(root / "earthquakes.csv", ["evid", "lon", "lat", "magnitude", "depth [km]", "origin_date", "network"], rows)
    return "earthquakes"


TRENCHES = [f"T{k:02d}" for k in range(1, 9)]
MATERIALS = ["ceramic", "glass", "bronze", "marble", "bone"]
PERIODS = ["Archaic", "Classical", "Hellenistic", "Roman"]


def _write_surveys(root: Path, rng: np.random.Generator) -> list[str]:
    names = []
    for k in range(1, N_SURVEYS + 1):
        pts = _inside(rng, int(rng.integers(8, 16)), 0.001)
        rows = [[str(rng.choice(TRENCHES)), lon, lat, str(rng.choice(MATERIALS)), int(rng.integers(1, 40)),
                 round(float(rng.uniform(0.05, 3.0)), 3), int(rng.integers(10, 250))]
                for lon, lat in pts]
        name = f"trench_finds_{k:02d}"
        _csv(root / f"{name}.csv", ["trench_id", "lon", "lat", "material", "finds", "weight [kg]", "ctx depth [cm]"], rows)
        names.append(name)
    return names


def _square(e: float, n: float, half: float) -> Geometry:
    return Geometry.polygon([(e - half, n - half), (e + half, n - half), (e + half, n + half),
                              (e - half, n + half), (e - half, n - half)])


def _write_monuments(root: Path, rng: np.random.Generator) -> list[str]:
    schema = (
        AttributeField("name", value_type=ValueType.TEXT),
        AttributeField("type", value_type=ValueType.TEXT),
        AttributeField("period", value_type=ValueType.TEXT),
        AttributeField("cond", value_type=ValueType.TEXT),
        AttributeField("area_m2", value_type=ValueType.REAL),
        AttributeField("max_ht", value_type=ValueType.REAL),
        AttributeField("exc_year", value_type=ValueType.INTEGER),
    )
    kinds = ["temple", "house", "stoa", "altar", "treasury", "cistern"]
    names = []
    for sector in MONUMENT_SECTORS:
        lonlat = _inside(rng, int(rng.integers(4, 10)), 0.002)
        geographic = sector in GEOGRAPHIC_MONUMENTS
        coords = lonlat if geographic else _to_grid(lonlat)
        rows = []
        for k, (x, y) in enumerate(coords):
            half = float(rng.uniform(4, 15))
            geom = Geometry.point(float(x), float(y)) if geographic else _square(float(x), float(y), half)
            rows.append(Feature((f"{sector.replace('_', ' ').title()} {k + 1}", str(rng.choice(kinds)),
                                 str(rng.choice(PERIODS)), str(rng.choice(["good", "fair", "poor"])),
                                 round(4 * half * half, 2), round(float(rng.uniform(0.3, 6.0)), 2),
                                 int(rng.integers(1873, 1990))), geom))
        layer = FeatureLayer(f"monuments_{sector}", WGS84 if geographic else GREEK_GRID, schema, tuple(rows))
        _shapefile(root / f"monuments_{sector}", layer)
        names.append(f"monuments_{sector}")
    return names


def _write_inscriptions(root: Path, rng: np.random.Generator) -> str:
    schema = (
        AttributeField("inv_no", value_type=ValueType.TEXT),
        AttributeField("lang", value_type=ValueType.TEXT),
        AttributeField("era", value_type=ValueType.TEXT),
        AttributeField("mat", value_type=ValueType.TEXT),
        AttributeField("ht", value_type=ValueType.REAL),
        AttributeField("recorder", value_type=ValueType.TEXT),
        AttributeField("notes", value_type=ValueType.TEXT),
    )
    pts = _to_grid(_inside(rng, 6, 0.002))
    rows = tuple(
        Feature((f"A{7100 + k}", str(rng.choice(["Greek", "Latin"])), str(rng.choice(PERIODS)), "marble",
                 round(float(rng.uniform(0.2, 1.5)), 2), "M. Laurent", "dedication"), Geometry.point(float(e), float(n)))
        for k, (e, n) in enumerate(pts)
    )
    _shapefile(root / "inscriptions", FeatureLayer("inscriptions", GREEK_GRID, schema, rows))
    return "inscriptions"


def _write_trenches(root: Path, rng: np.random.Generator) -> str:
    schema = (
        AttributeField("trench_id", value_type=ValueType.TEXT),
        AttributeField("year_exc", value_type=ValueType.INTEGER),
        AttributeField("author", value_type=ValueType.TEXT),
        AttributeField("condition", value_type=ValueType.TEXT),
        AttributeField("shp_area", value_type=ValueType.REAL),
        AttributeField("phase", value_type=ValueType.TEXT),
        AttributeField("remarks", value_type=ValueType.TEXT),
    )
    pts = _to_grid(_inside(rng, len(TRENCHES), 0.002))
    rows = []
    for t, (e, n) in zip(TRENCHES, pts):
        half = float(rng.uniform(2, 5))
        rows.append(Feature((t, int(rng.integers(1990, 2023)), "A. Petrou", str(rng.choice(["open", "backfilled"])),
                             round(4 * half * half, 2), str(rng.choice(PERIODS)), ""), _square(float(e), float(n), half)))
    _shapefile(root / "trenches", FeatureLayer("trenches", GREEK_GRID, schema, tuple(rows)))
    return "trenches"


FIELD_NOTE_PATTERNS = [
    ("obs", r"^(\d{4}-\d{2}-\d{2})", "date", None),
    ("temp", r"temp ([-\d.]+) C", "real", "degC"),
    ("ws", r"wind ([\d.]+) kn", "real", "kn"),
    ("rh", r"rh ([\d.]+) %", "real", "%"),
    ("visitors", r"visitors (\d+)", "integer", None),
    ("recorder", r"by ([^|]+?) \|", "text", None),
    ("notes", r"note: (.*)$", "text", None),
]


def _write_field_notes(root: Path, rng: np.random.Generator) -> list[str]:
    names = []
    for k in (1, 2):
        lines = [f"Field diary {k}, guards' log", ""]
        for day in _dates(dt.date(2023, 6, 1 + 10 * k), 12):
            lines.append(
                f"{day.isoformat()} | temp {rng.uniform(22, 34):.1f} C | wind {rng.uniform(3, 25):.1f} kn | "
                f"rh {rng.uniform(35, 80):.0f} % | visitors {int(rng.integers(200, 2500))} | "
                f"by {rng.choice(['K. Galanis', 'E. Roussou'])} | note: {rng.choice(['calm sea', 'meltemi', 'ferry late'])}"
            )
        lines.append("-- end of log --")
        (root / f"field_notes_{k}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        names.append(f"field_notes_{k}")
    return names


def _dem(e0: float, n0: float, size: int, cell: float) -> np.ndarray:
    e = e0 + (np.arange(size) + 0.5) * cell
    n = n0 + (np.arange(size) + 0.5) * cell
    ge, gn = np.meshgrid(e, n)
    ke, kn = _to_grid(np.array([[25.2735, 37.3925]]))[0]  # Mount Kynthos
    return 112 * np.exp(-(((ge - ke) ** 2 + (gn - kn) ** 2) / (2 * 450.0 ** 2)))


def _write_rasters(root: Path, rng: np.random.Generator) -> tuple[list[str], list[str]]:
    (emin, nmin), (emax, nmax) = _to_grid(np.array([[25.258, 37.385], [25.282, 37.410]]))
    cell = 20.0
    asc, tif = [], []
    tiles = [(i, j) for i in range(5) for j in range(2)]
    tile_w = (emax - emin) / 2
    tile_h = (nmax - nmin) / 5
    size = int(np.ceil(max(tile_w, tile_h) / cell))
    for k, (i, j) in enumerate(tiles[:N_DEM], start=1):
        e0 = float(np.floor(emin + j * tile_w))
        n0 = float(np.floor(nmin + i * tile_h))
        values = np.round(_dem(e0, n0, size, cell), 3)
        grid = RasterGrid((e0, n0), cell, size, size, -9999.0, values, GREEK_GRID, {})
        (root / f"dem_tile_{k:02d}.asc").write_bytes(write_ascii_grid(grid))
        (root / f"dem_tile_{k:02d}.prj").write_text(GREEK_GRID.definition, encoding="utf-8")
        asc.append(f"dem_tile_{k:02d}")
    for k in range(1, N_NDVI + 1):
        values = np.round(rng.uniform(0.05, 0.45, size=(30, 24)), 4)
        values[0, 0] = -9999.0
        grid = RasterGrid((25.258, 37.385), 0.001, 24, 30, -9999.0, values, WGS84, {})
        (root / f"ndvi_{k}.asc").write_bytes(write_ascii_grid(grid))
        asc.append(f"ndvi_{k}")
    for k in range(1, N_MAG + 1):
        e0 = float(np.floor(emin + rng.uniform(0, tile_w)))
        n0 = float(np.floor(nmin + rng.uniform(0, 3 * tile_h)))
        values = np.round(rng.normal(0.0, 4.0, size=(40, 40)), 3)
        grid = RasterGrid((e0, n0), 0.5, 40, 40, -9999.0, values, GREEK_GRID, {})
        (root / f"magnetometry_{k}.tif").write_bytes(write_geotiff_minimal(grid))
        tif.append(f"magnetometry_{k}")
    return asc, tif


def _toml_str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def manifest_text(csvs: list[str], shps: list[str], txts: list[str], ascs: list[str], tifs: list[str]) -> str:
    out = [
        'output = "build/delos.gpkg"',
        'dictionary = "dictionary.txt"',
        "crs = 4326",
        "working_crs = 2100",
        "",
        "[site]",
        f'id = "{SITE_ID}"',
        f"centroid = [{CENTROID[0]}, {CENTROID[1]}]",
        "boundary = [" + ", ".join(f"[{x}, {y}]" for x, y in BOUNDARY) + "]",
        "",
    ]
    for name in csvs:
        out += ["[[input]]", f'id = "{name}"', f'path = "data/{name}.csv"', ""]
    for name in shps:
        out += ["[[input]]", f'id = "{name}"', f'path = "data/{name}.shp"', ""]
    for name in ascs:
        out += ["[[input]]", f'id = "{name}"', f'path = "data/{name}.asc"', ""]
    for name in tifs:
        out += ["[[input]]", f'id = "{name}"', f'path = "data/{name}.tif"', ""]
    for name in txts:
        out += ["[[input]]", f'id = "{name}"', f'path = "data/{name}.txt"', 'format = "txt"', ""]
        for fname, regex, vtype, unit in FIELD_NOTE_PATTERNS:
            out += ["[[input.pattern]]", f'field = "{fname}"', f"regex = '{regex}'", f'type = "{vtype}"']
            if unit:
                out.append(f'unit = "{unit}"')
            out.append("")
    out += [
        "[[step]]", 'kind = "idw"', 'source = "stations"', 'output = "wind_speed_idw"', 'column = "wind_speed"',
        "cell_size = 25.0", "power = 2.0", "",
        "[[step]]", 'kind = "kriging"', 'source = "soil_samples"', 'output = "soil_moisture_kriged"',
        'column = "soil_moisture"', "cell_size = 50.0", 'variogram = "spherical"', "",
        "[[step]]", 'kind = "kde"', 'source = "earthquakes"', 'output = "seismic_density"', "cell_size = 2000.0",
        'extent = "data"', "pad = 20000.0", "",
        "[[step]]", 'kind = "one_hot"', 'source = "monuments_sanctuary_of_apollo"',
        'output = "monuments_sanctuary_of_apollo_types"', 'column = "monument_type"', "",
        "[[step]]", 'kind = "augment"', 'source = "inscriptions"', 'output = "inscriptions_augmented"',
        "n = 24", "sigma = 15.0", "seed = 7", "",
        "[[coverage]]", 'name = "wind"', 'points = "stations"', f"radius = {STATION_RADIUS_M}",
        'raster = "wind_speed_idw"', "",
        "[analysis]",
        "sql = [",
        *[f"  {_toml_str(q)}," for q in ANALYSIS_SQL],
        "]",
        "",
        "[publish]",
        'license = "CC-BY-4.0"',
        'title = "Delos synthetic heritage corpus"',
        'creators = ["ARGUS demo"]',
        "",
    ]
    return "\n".join(out)


def build_corpus(directory: str | Path, seed: int = SEED) -> Corpus:
    """Write the corpus under ``directory``; returns paths to the manifest and dictionary."""
    root = Path(directory)
    data = root / "data"
    data.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    csvs = _write_weather(data, rng) + [_write_soil(data, rng), _write_quakes(data, rng)] + _write_surveys(data, rng)
    shps = _write_monuments(data, rng) + [_write_inscriptions(data, rng), _write_trenches(data, rng)]
    txts = _write_field_notes(data, rng)
    ascs, tifs = _write_rasters(data, rng)
    (root / "dictionary.txt").write_text(DICTIONARY, encoding="utf-8")
    manifest = root / "manifest.toml"
    manifest.write_text(manifest_text(csvs, shps, txts, ascs, tifs), encoding="utf-8")
    n = len(csvs) + len(shps) + len(txts) + len(ascs) + len(tifs)
    return Corpus(root, manifest, root / "dictionary.txt", n)
