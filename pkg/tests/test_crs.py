import math

import numpy as np
import pytest
from pyproj import Geod, Transformer

from argus.crs import (
    GREEK_GRID,
    LAEA_EUROPE,
    REGISTRY,
    WGS84,
    ecef_to_geodetic,
    geodetic_to_ecef,
    helmert7,
    laea_forward,
    laea_inverse,
    tm_forward,
    tm_inverse,
    transform,
    transform_coords,
)
from argus.crs.registry import GRS80_ELLIPSOID, WGS84_ELLIPSOID
from argus.errors import AntipodalPoint, LatitudeOutOfRange, OutOfProjectionDomain, UnknownCrs
from argus.model import Geometry, GeometryKind, Helmert, RasterGrid

AEGEAN = dict(lon=(19.5, 29.5), lat=(34.5, 41.5))
DELOS = (25.2686, 37.3965)


def aegean_points(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(*AEGEAN["lon"], n), rng.uniform(*AEGEAN["lat"], n)


def test_registry_preloaded():
    for code in (4326, 2100, 3035):
        assert REGISTRY.get(code).srs_id == code
    with pytest.raises(UnknownCrs):
        REGISTRY.get(9999)


def test_registry_wkt_aliases():
    assert REGISTRY.match_wkt('PROJCS["GGRS_1987_Greek_Grid",GEOGCS["GCS_GGRS_1987"]]').srs_id == 2100
    assert REGISTRY.match_wkt('GEOGCS["GCS_WGS_1984"]').srs_id == 4326
    assert REGISTRY.match_wkt(LAEA_EUROPE.definition).srs_id == 3035
    assert REGISTRY.match_wkt("LOCAL_CS[nothing]") is None


def test_ecef_equator_and_pole():
    x, y, z = geodetic_to_ecef(0.0, 0.0, WGS84_ELLIPSOID)
    assert (x, y, z) == (6378137.0, 0.0, 0.0)
    x, y, z = geodetic_to_ecef(90.0, 33.0, WGS84_ELLIPSOID)
    assert abs(x) < 1e-9 and abs(y) < 1e-9
    assert z == pytest.approx(WGS84_ELLIPSOID.b, abs=1e-9)


def test_ecef_round_trip():
    rng = np.random.default_rng(1)
    lat = rng.uniform(-90, 90, 1000)
    lon = rng.uniform(-180, 180, 1000)
    h = rng.uniform(-100, 5000, 1000)
    xyz = geodetic_to_ecef(lat, lon, WGS84_ELLIPSOID, h)
    lat2, lon2, h2 = ecef_to_geodetic(*xyz, WGS84_ELLIPSOID)
    xyz2 = geodetic_to_ecef(lat2, lon2, WGS84_ELLIPSOID, h2)
    err = np.sqrt(sum((a - b) ** 2 for a, b in zip(xyz, xyz2)))
    assert err.max() < 1e-9 * 10  # metre-scale doubles at 6.4e6 carry ~1e-9 ulp noise
    assert np.max(np.abs(np.radians(lat2 - lat))) < 1e-12


def test_ecef_matches_pyproj():
    t = Transformer.from_crs(4326, 4978, always_xy=True)
    lon, lat = aegean_points(50)
    ex, ey, ez = t.transform(lon, lat, np.zeros_like(lon))
    x, y, z = geodetic_to_ecef(lat, lon, WGS84_ELLIPSOID)
    assert np.max(np.abs(x - ex)) < 1e-6 and np.max(np.abs(y - ey)) < 1e-6 and np.max(np.abs(z - ez)) < 1e-6


def test_latitude_out_of_range():
    with pytest.raises(LatitudeOutOfRange):
        geodetic_to_ecef(91.0, 0.0, WGS84_ELLIPSOID)


def test_helmert_identity_and_translation():
    p = (4e6, 2e6, 4e6)
    assert helmert7(p, Helmert()) == p
    assert helmert7((0.0, 0.0, 0.0), Helmert(100, 0, 0)) == (100.0, 0.0, 0.0)


def test_helmert_inverse_exact():
    params = Helmert(10, -5, 3, 0.5, -0.2, 1.1, 2.5)
    p = (4.6e6, 2.2e6, 3.9e6)
    back = helmert7(helmert7(p, params), params, inverse=True)
    assert np.allclose(back, p, atol=1e-8, rtol=0)


def test_helmert_rotation_matches_pyproj():
    # position-vector convention, rotations in arc-seconds
    params = Helmert(1.0, 2.0, 3.0, 0.3, -0.4, 0.5, 1.2)
    t = Transformer.from_pipeline(
        "+proj=helmert +x=1 +y=2 +z=3 +rx=0.3 +ry=-0.4 +rz=0.5 +s=1.2 +convention=position_vector"
    )
    p = (4.6e6, 2.2e6, 3.9e6)
    assert np.allclose(helmert7(p, params), t.transform(*p), atol=1e-6, rtol=0)


def test_ggrs87_helmert_matches_registry_oracle():
    lon, lat = DELOS
    xyz = geodetic_to_ecef(lat, lon, GRS80_ELLIPSOID)
    out = helmert7(xyz, GREEK_GRID.helmert_to_wgs84)
    lat2, lon2, _ = ecef_to_geodetic(*out, WGS84_ELLIPSOID)
    elon, elat = Transformer.from_crs(4121, 4326, always_xy=True).transform(lon, lat)
    d = Geod(ellps="WGS84").inv(lon2, lat2, elon, elat)[2]
    assert d < 0.1


def test_tm_origin_maps_to_false_origin():
    e, n = tm_forward(0.0, 24.0, GREEK_GRID)
    assert (float(e), float(n)) == (500000.0, 0.0)


def test_tm_athens_matches_oracle():
    e, n = tm_forward(37.9838, 23.7275, GREEK_GRID)
    ee, en = Transformer.from_crs(4121, 2100, always_xy=True).transform(23.7275, 37.9838)
    assert math.hypot(e - ee, n - en) < 0.01


def test_tm_round_trip():
    lon, lat = aegean_points(1000, seed=2)
    e, n = tm_forward(lat, lon, GREEK_GRID)
    lat2, lon2 = tm_inverse(e, n, GREEK_GRID)
    e2, n2 = tm_forward(lat2, lon2, GREEK_GRID)
    assert np.max(np.hypot(e2 - e, n2 - n)) < 1e-6
    assert np.max(np.abs(np.radians(lat2 - lat))) < 1e-11


def test_tm_scale_factor_on_central_meridian():
    k0 = GREEK_GRID.projection_params.scale_factor_k0
    a, e2 = GRS80_ELLIPSOID.semi_major_a, GRS80_ELLIPSOID.e2
    d = 1e-6
    for lat in (0.0, 20.0, 37.4, 41.0):
        e_plus, _ = tm_forward(lat, 24.0 + d, GREEK_GRID)
        e_minus, _ = tm_forward(lat, 24.0 - d, GREEK_GRID)
        nu = a / math.sqrt(1 - e2 * math.sin(math.radians(lat)) ** 2)
        ratio = (e_plus - e_minus) / (nu * math.cos(math.radians(lat)) * math.radians(2 * d))
        assert ratio == pytest.approx(k0, abs=1e-6)
    # at the equator the prime-vertical radius equals the semi-major axis
    e_plus, _ = tm_forward(0.0, 24.0 + d, GREEK_GRID)
    assert (e_plus - 500000.0) / (a * math.radians(d)) == pytest.approx(k0, abs=1e-6)


def test_tm_domain():
    with pytest.raises(OutOfProjectionDomain) as info:
        tm_forward(np.array([37.0, 37.0]), np.array([24.0, 60.0]), GREEK_GRID)
    assert info.value.index == 1


def test_laea_false_origin():
    e, n = laea_forward(52.0, 10.0, LAEA_EUROPE)
    assert float(e) == pytest.approx(4321000.0, abs=1e-9)
    assert float(n) == pytest.approx(3210000.0, abs=1e-9)
    lat, lon = laea_inverse(4321000.0, 3210000.0, LAEA_EUROPE)
    assert float(lat) == pytest.approx(52.0, abs=1e-12) and float(lon) == pytest.approx(10.0, abs=1e-12)


def test_laea_delos_matches_oracle():
    e, n = laea_forward(DELOS[1], DELOS[0], LAEA_EUROPE)
    ee, en = Transformer.from_crs(4258, 3035, always_xy=True).transform(*DELOS)
    assert math.hypot(e - ee, n - en) < 0.01


def test_laea_round_trip():
    lon, lat = aegean_points(1000, seed=3)
    e, n = laea_forward(lat, lon, LAEA_EUROPE)
    lat2, lon2 = laea_inverse(e, n, LAEA_EUROPE)
    e2, n2 = laea_forward(lat2, lon2, LAEA_EUROPE)
    assert np.max(np.hypot(e2 - e, n2 - n)) < 1e-6


def test_laea_antipode():
    with pytest.raises(AntipodalPoint):
        laea_forward(-52.0, -170.0, LAEA_EUROPE)


def _ellipsoidal_quad_area(lat1, lat2, dlon_deg, ell):
    # area of a graticule quad: a^2/2 * dlon * (q(lat2) - q(lat1)), computed by quadrature
    from scipy.integrate import quad

    a, e2 = ell.semi_major_a, ell.e2

    def integrand(phi):
        return a * a * (1 - e2) * math.cos(phi) / (1 - e2 * math.sin(phi) ** 2) ** 2

    val, _ = quad(integrand, math.radians(lat1), math.radians(lat2))
    return val * math.radians(dlon_deg)


def test_laea_preserves_area():
    lat1, lon1, d = 37.38, 25.25, 0.02
    n = 50
    t = np.linspace(0, 1, n, endpoint=False)
    lons = np.concatenate([lon1 + t * d, np.full(n, lon1 + d), lon1 + d - t * d, np.full(n, lon1)])
    lats = np.concatenate([np.full(n, lat1), lat1 + t * d, np.full(n, lat1 + d), lat1 + d - t * d])
    x, y = laea_forward(lats, lons, LAEA_EUROPE)
    projected = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    exact = _ellipsoidal_quad_area(lat1, lat1 + d, d, GRS80_ELLIPSOID)
    assert abs(projected / exact - 1) < 1e-3


def test_transform_identity_is_same_object():
    g = Geometry.point(*DELOS)
    assert transform(g, 4326, 4326) is g


@pytest.mark.parametrize("target", [2100, 3035])
def test_transform_matches_oracle(target):
    lon, lat = aegean_points(100, seed=4)
    x, y = transform_coords(lon, lat, 4326, target)
    ex, ey = Transformer.from_crs(4326, target, always_xy=True).transform(lon, lat)
    assert np.max(np.hypot(x - ex, y - ey)) < 0.01
    blon, blat = transform_coords(x, y, target, 4326)
    x2, y2 = transform_coords(blon, blat, 4326, target)
    assert np.max(np.hypot(x2 - x, y2 - y)) < 0.01


def test_delos_centroid_to_greek_grid():
    g = transform(Geometry.point(*DELOS), 4326, 2100)
    ex, ey = Transformer.from_crs(4326, 2100, always_xy=True).transform(*DELOS)
    assert math.hypot(g.coordinates[0] - ex, g.coordinates[1] - ey) < 0.01


def test_round_trip_all_pairs():
    lon, lat = aegean_points(1000, seed=5)
    codes = (4326, 2100, 3035)
    native = {c: transform_coords(lon, lat, 4326, c) for c in codes}
    for a in codes:
        for b in codes:
            xa, ya = native[a]
            xb, yb = transform_coords(xa, ya, a, b)
            xr, yr = transform_coords(xb, yb, b, a)
            if REGISTRY.get(a).is_geographic:
                # compare in metres on the ground
                d = Geod(ellps="WGS84").inv(xa, ya, xr, yr)[2]
            else:
                d = np.hypot(xr - xa, yr - ya)
            assert np.max(d) < 0.01, (a, b)


def test_polygon_transform_keeps_structure():
    ring = [(25.26, 37.38), (25.28, 37.38), (25.28, 37.41), (25.26, 37.38)]
    g = transform(Geometry(GeometryKind.MULTIPOLYGON, [[ring]]), 4326, 2100)
    assert g.kind is GeometryKind.MULTIPOLYGON
    assert g.coordinates[0][0][0] == g.coordinates[0][0][-1]


def test_raster_regrid_nearest():
    src = transform(Geometry.point(*DELOS), 4326, 2100).coordinates
    values = np.arange(100, dtype=float).reshape(10, 10)
    grid = RasterGrid((src[0] - 500, src[1] - 500), 100.0, 10, 10, -9999.0, values, GREEK_GRID)
    out = transform(grid, None, 4326)
    assert out.crs is WGS84
    assert out.valid_mask.any()
    # every sampled value exists in the source
    assert set(np.unique(out.values[out.valid_mask])) <= set(values.ravel())
    # value at the centroid cell equals the source cell containing it
    cx = int((DELOS[0] - out.origin[0]) // out.cell_size)
    cy = int((DELOS[1] - out.origin[1]) // out.cell_size)
    assert out.values[cy, cx] in (44.0, 45.0, 54.0, 55.0)
