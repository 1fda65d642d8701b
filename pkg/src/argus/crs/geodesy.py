"""Geodetic <-> ECEF conversion and 7-parameter Helmert datum shifts.

Functions accept scalars or numpy arrays; angles are in degrees.
"""

from __future__ import annotations

import numpy as np

from argus.errors import LatitudeOutOfRange
from argus.model import Ellipsoid, Helmert

ARCSEC = np.pi / (180.0 * 3600.0)


def geodetic_to_ecef(lat, lon, ellipsoid: Ellipsoid, h=0.0):
    lat = np.asarray(lat, dtype=float)
    if np.any(np.abs(lat) > 90.0):
        bad = int(np.argmax(np.abs(np.atleast_1d(lat)) > 90.0))
        raise LatitudeOutOfRange(f"latitude {np.atleast_1d(lat)[bad]} outside [-90, 90] (vertex {bad})")
    phi = np.radians(lat)
    lam = np.radians(lon)
    a, e2 = ellipsoid.semi_major_a, ellipsoid.e2
    sphi = np.sin(phi)
    n = a / np.sqrt(1.0 - e2 * sphi * sphi)
    x = (n + h) * np.cos(phi) * np.cos(lam)
    y = (n + h) * np.cos(phi) * np.sin(lam)
    z = (n * (1.0 - e2) + h) * sphi
    return x, y, z


def ecef_to_geodetic(x, y, z, ellipsoid: Ellipsoid, tol: float = 1e-14, max_iter: int = 50):
    """Return (lat, lon, h); latitude is refined until it moves < ``tol`` rad."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    a, e2 = ellipsoid.semi_major_a, ellipsoid.e2
    p = np.hypot(x, y)
    lam = np.arctan2(y, x)
    phi = np.arctan2(z, p * (1.0 - e2))
    for _ in range(max_iter):
        sphi = np.sin(phi)
        n = a / np.sqrt(1.0 - e2 * sphi * sphi)
        nxt = np.arctan2(z + e2 * n * sphi, p)
        done = np.max(np.abs(nxt - phi)) < tol
        phi = nxt
        if done:
            break
    sphi = np.sin(phi)
    h = p * np.cos(phi) + z * sphi - a * np.sqrt(1.0 - e2 * sphi * sphi)
    return np.degrees(phi), np.degrees(lam), h


def _rotation(params: Helmert) -> np.ndarray:
    rx, ry, rz = (params.rx * ARCSEC, params.ry * ARCSEC, params.rz * ARCSEC)
    return np.array([[1.0, -rz, ry], [rz, 1.0, -rx], [-ry, rx, 1.0]])


def helmert7(p, params: Helmert, inverse: bool = False):
    """Position-vector transform ``p' = (1 + s) R p + t``.

    ``p`` is an (X, Y, Z) triple of scalars or equal-length arrays.  With
    ``inverse=True`` the exact algebraic inverse is applied.
    """
    pts = np.vstack([np.atleast_1d(np.asarray(c, dtype=float)) for c in p])
    t = np.array([[params.dx], [params.dy], [params.dz]])
    scale = 1.0 + params.scale_ppm * 1e-6
    rot = _rotation(params)
    if inverse:
        out = np.linalg.solve(rot, (pts - t) / scale)
    else:
        out = scale * (rot @ pts) + t
    if np.ndim(p[0]) == 0:
        return float(out[0, 0]), float(out[1, 0]), float(out[2, 0])
    return out[0], out[1], out[2]
