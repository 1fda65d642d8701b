"""Ellipsoidal Lambert azimuthal equal-area (oblique aspect), authalic-latitude form."""

from __future__ import annotations

import numpy as np

from argus.errors import AntipodalPoint
from argus.model import CrsDef


def _q(sinphi, e: float):
    e2 = e * e
    return (1 - e2) * (sinphi / (1 - e2 * sinphi**2) - np.log((1 - e * sinphi) / (1 + e * sinphi)) / (2 * e))


def _constants(crs: CrsDef):
    ell = crs.ellipsoid
    a, e, e2 = ell.semi_major_a, ell.e, ell.e2
    phi1 = np.radians(crs.projection_params.lat_origin)
    qp = _q(1.0, e)
    rq = a * np.sqrt(qp / 2)
    beta1 = np.arcsin(_q(np.sin(phi1), e) / qp)
    m1 = np.cos(phi1) / np.sqrt(1 - e2 * np.sin(phi1) ** 2)
    d = a * m1 / (rq * np.cos(beta1))
    return qp, rq, beta1, d


def laea_forward(lat, lon, crs: CrsDef):
    pp = crs.projection_params
    e = crs.ellipsoid.e
    qp, rq, beta1, d = _constants(crs)
    lat = np.asarray(lat, dtype=float)
    lam = np.radians(np.asarray(lon, dtype=float) - pp.lon_origin)
    beta = np.arcsin(np.clip(_q(np.sin(np.radians(lat)), e) / qp, -1.0, 1.0))
    denom = 1 + np.sin(beta1) * np.sin(beta) + np.cos(beta1) * np.cos(beta) * np.cos(lam)
    bad = np.atleast_1d(denom < 1e-12)
    if bad.any():
        raise AntipodalPoint("point is antipodal to the projection centre", int(np.argmax(bad)))
    b = rq * np.sqrt(2 / denom)
    x = b * d * np.cos(beta) * np.sin(lam)
    y = (b / d) * (np.cos(beta1) * np.sin(beta) - np.sin(beta1) * np.cos(beta) * np.cos(lam))
    return pp.false_easting + x, pp.false_northing + y


def _lat_from_q(q, e: float, tol: float = 1e-15, max_iter: int = 30):
    e2 = e * e
    phi = np.arcsin(np.clip(q / 2, -1.0, 1.0))
    for _ in range(max_iter):
        s = np.sin(phi)
        c = np.cos(phi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (1 - e2 * s * s) ** 2 / (2 * c) * (
                q / (1 - e2) - s / (1 - e2 * s * s) + np.log((1 - e * s) / (1 + e * s)) / (2 * e)
            )
        step = np.where(np.isfinite(step), step, 0.0)
        phi = phi + step
        if np.all(np.abs(step) < tol):
            break
    return phi


def laea_inverse(easting, northing, crs: CrsDef):
    pp = crs.projection_params
    e = crs.ellipsoid.e
    qp, rq, beta1, d = _constants(crs)
    x = np.asarray(easting, dtype=float) - pp.false_easting
    y = np.asarray(northing, dtype=float) - pp.false_northing
    rho = np.hypot(x / d, d * y)
    ce = 2 * np.arcsin(np.clip(rho / (2 * rq), -1.0, 1.0))
    safe_rho = np.where(rho == 0, 1.0, rho)
    sin_beta = np.cos(ce) * np.sin(beta1) + d * y * np.sin(ce) * np.cos(beta1) / safe_rho
    sin_beta = np.where(rho == 0, np.sin(beta1), sin_beta)
    lam = np.arctan2(
        x * np.sin(ce),
        d * rho * np.cos(beta1) * np.cos(ce) - d * d * y * np.sin(beta1) * np.sin(ce),
    )
    q = qp * np.clip(sin_beta, -1.0, 1.0)
    phi = _lat_from_q(q, e)
    return np.degrees(phi), pp.lon_origin + np.degrees(lam)
