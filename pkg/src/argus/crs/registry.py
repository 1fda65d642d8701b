"""Built-in CRS definitions and lookup by EPSG code or WKT alias."""

from __future__ import annotations

from argus.errors import UnknownCrs
from argus.model import CrsDef, CrsKind, Ellipsoid, Helmert, ProjectionParams

WGS84_ELLIPSOID = Ellipsoid(6378137.0, 298.257223563)
GRS80_ELLIPSOID = Ellipsoid(6378137.0, 298.257222101)

# Definition strings are the EPSG registry's WKT1 renderings.
WKT_4326 = (
    'GEOGCS["WGS 84",DATUM["WGS_1984",SPHEROID["WGS 84",6378137,298.257223563,'
    'AUTHORITY["EPSG","7030"]],AUTHORITY["EPSG","6326"]],PRIMEM["Greenwich",0,'
    'AUTHORITY["EPSG","8901"]],UNIT["degree",0.0174532925199433,AUTHORITY["EPSG","9122"]],'
    'AUTHORITY["EPSG","4326"]]'
)
WKT_2100 = (
    'PROJCS["GGRS87 / Greek Grid",GEOGCS["GGRS87",DATUM["Greek_Geodetic_Reference_System_1987",'
    'SPHEROID["GRS 1980",6378137,298.257222101,AUTHORITY["EPSG","7019"]],'
    'TOWGS84[-199.87,74.79,246.62,0,0,0,0],AUTHORITY["EPSG","6121"]],'
    'PRIMEM["Greenwich",0,AUTHORITY["EPSG","8901"]],UNIT["degree",0.0174532925199433,'
    'AUTHORITY["EPSG","9122"]],AUTHORITY["EPSG","4121"]],PROJECTION["Transverse_Mercator"],'
    'PARAMETER["latitude_of_origin",0],PARAMETER["central_meridian",24],'
    'PARAMETER["scale_factor",0.9996],PARAMETER["false_easting",500000],'
    'PARAMETER["false_northing",0],UNIT["metre",1,AUTHORITY["EPSG","9001"]],'
    'AXIS["Easting",EAST],AXIS["Northing",NORTH],AUTHORITY["EPSG","2100"]]'
)
WKT_3035 = (
    'PROJCS["ETRS89-extended / LAEA Europe",GEOGCS["ETRS89",DATUM["European_Terrestrial_Reference_System_1989",'
    'SPHEROID["GRS 1980",6378137,298.257222101,AUTHORITY["EPSG","7019"]],AUTHORITY["EPSG","6258"]],'
    'PRIMEM["Greenwich",0,AUTHORITY["EPSG","8901"]],UNIT["degree",0.0174532925199433,'
    'AUTHORITY["EPSG","9122"]],AUTHORITY["EPSG","4258"]],PROJECTION["Lambert_Azimuthal_Equal_Area"],'
    'PARAMETER["latitude_of_center",52],PARAMETER["longitude_of_center",10],'
    'PARAMETER["false_easting",4321000],PARAMETER["false_northing",3210000],'
    'UNIT["metre",1,AUTHORITY["EPSG","9001"]],AUTHORITY["EPSG","3035"]]'
)

WGS84 = CrsDef(
    srs_id=4326,
    kind=CrsKind.GEOGRAPHIC,
    ellipsoid=WGS84_ELLIPSOID,
    name="WGS 84",
    wkt_aliases=("GCS_WGS_1984", "WGS 84", "WGS_1984", "WGS84"),
    definition=WKT_4326,
)

# EPSG:1272, GGRS87 to WGS 84 (1): translation only.
GREEK_GRID = CrsDef(
    srs_id=2100,
    kind=CrsKind.TRANSVERSE_MERCATOR,
    ellipsoid=GRS80_ELLIPSOID,
    helmert_to_wgs84=Helmert(-199.87, 74.79, 246.62),
    projection_params=ProjectionParams(0.0, 24.0, 0.9996, 500000.0, 0.0),
    name="GGRS87 / Greek Grid",
    wkt_aliases=("GGRS87", "GGRS_1987", "Greek_Grid", "Greek Grid", "Greek_Geodetic_Reference_System_1987"),
    definition=WKT_2100,
)

# ETRS89 is treated as coincident with WGS 84 (EPSG:1149).
LAEA_EUROPE = CrsDef(
    srs_id=3035,
    kind=CrsKind.LAMBERT_AZIMUTHAL_EQUAL_AREA,
    ellipsoid=GRS80_ELLIPSOID,
    projection_params=ProjectionParams(52.0, 10.0, 1.0, 4321000.0, 3210000.0),
    name="ETRS89-extended / LAEA Europe",
    wkt_aliases=(
        "ETRS89-extended / LAEA Europe",
        "ETRS89_extended_LAEA_Europe",
        "ETRS89_LAEA",
        "ETRS_1989_LAEA",
        "LAEA_Europe",
        "LAEA Europe",
    ),
    definition=WKT_3035,
)


class CrsRegistry:
    """srs_id -> CrsDef mapping; 4326, 2100 and 3035 are always present."""

    def __init__(self, extra: list[CrsDef] | None = None):
        self.entries: dict[int, CrsDef] = {c.srs_id: c for c in (WGS84, GREEK_GRID, LAEA_EUROPE)}
        for c in extra or ():
            self.register(c)

    def register(self, crs: CrsDef) -> None:
        self.entries[crs.srs_id] = crs

    def get(self, srs_id: int | CrsDef) -> CrsDef:
        if isinstance(srs_id, CrsDef):
            return srs_id
        try:
            return self.entries[int(srs_id)]
        except (KeyError, ValueError, TypeError):
            raise UnknownCrs(f"EPSG:{srs_id} is not in the CRS registry") from None

    def __contains__(self, srs_id: int) -> bool:
        return srs_id in self.entries

    def __iter__(self):
        return iter(sorted(self.entries.values(), key=lambda c: c.srs_id))

    def match_wkt(self, wkt: str) -> CrsDef | None:
        """Match PRJ text by alias substring; projected systems are tried first
        because their WKT embeds the geographic base CRS name."""
        text = wkt.lower()
        ordered = sorted(self.entries.values(), key=lambda c: c.is_geographic)
        for crs in ordered:
            for alias in crs.wkt_aliases:
                if alias.lower() in text:
                    return crs
        return None


REGISTRY = CrsRegistry()


def get_crs(srs_id: int | CrsDef) -> CrsDef:
    return REGISTRY.get(srs_id)
