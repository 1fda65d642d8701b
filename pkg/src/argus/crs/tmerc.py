"""Ellipsoidal Transverse Mercator via Krüger series in the third flattening.

Series are carried to sixth order in n, which keeps truncation error in the
nanometre range for the few degrees of longitude any national grid spans.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from argus.errors import OutOfProjectionDomain
from argus.model import CrsDef, Ellipsoid

MAX_LON_OFFSET = 30.0


@lru_cache(maxsize=16)
def _coefficients(n: float):
    n2, n3, n4, n5, n6 = n**2, n**3, n**4, n**5, n**6
    alpha = (
        n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288 + 7891 * n6 / 37800,
        13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630 - 1983433 * n6 / 1935360,
        61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 + 167603 * n6 / 181440,
        49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600,
        34729 * n5 / 80640 - 3418889 * n6 / 1995840,
        212378941 * n6 / 319334400,
    )
    beta = (
        n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512 + 96199 * n6 / 604800,
        n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 - 1118711 * n6 / 3870720,
        17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720,
        4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600,
        4583 * n5 / 161280 - 108847 * n6 / 3991680,
        20648693 * n6 / 638668800,
    )
    return alpha, beta


def rectifying_radius(ell: Ellipsoid) -> float:
    n = ell.n
    return ell.semi_major_a / (1 + n) * (1 + n**2 / 4 + n**4 / 64 + n**6 / 256)


def conformal_tau(tau, e: float):
    """tan of conformal latitude from tan of geodetic latitude."""
    sig = np.sinh(e * np.arctanh(e * tau / np.hypot(1.0, tau)))
    return tau * np.hypot(1.0, sig) - sig * np.hypot(1.0, tau)


def geodetic_tau(taup, e: float, tol: float = 1e-15, max_iter: int = 20):
    """Invert :func:`conformal_tau` by Newton's method."""
    e2 = e * e
    tau = np.array(taup, dtype=float, copy=True)
    for _ in range(max_iter):
        tp = conformal_tau(tau, e)
        dtau = (taup - tp) / np.hypot(1.0, tp) * (1 + (1 - e2) * tau * tau) / ((1 - e2) * np.hypot(1.0, tau))
        tau = tau + dtau
        if np.all(np.abs(dtau) <= tol * np.maximum(1.0, np.abs(tau))):
            break
    return tau


def _xi0(crs: CrsDef) -> float:
    ell = crs.ellipsoid
    alpha, _ = _coefficients(ell.n)
    chi = np.arctan(conformal_tau(np.tan(np.radians(crs.projection_params.lat_origin)), ell.e))
    return float(chi + sum(a * np.sin(2 * (j + 1) * chi) for j, a in enumerate(alpha)))


def tm_forward(lat, lon, crs: CrsDef):
    """Geodetic degrees -> (easting, northing) metres."""
    pp = crs.projection_params
    ell = crs.ellipsoid
    lat = np.asarray(lat, dtype=float)
    dlon = (np.asarray(lon, dtype=float) - pp.lon_origin + 180.0) % 360.0 - 180.0
    bad = np.atleast_1d(np.abs(dlon) >= MAX_LON_OFFSET)
    if bad.any():
        i = int(np.argmax(bad))
        raise OutOfProjectionDomain(
            f"longitude offset {np.atleast_1d(dlon)[i]:.3f} deg from central meridian exceeds {MAX_LON_OFFSET}", i
        )
    alpha, _ = _coefficients(ell.n)
    lam = np.radians(dlon)
    taup = conformal_tau(np.tan(np.radians(lat)), ell.e)
    xip = np.arctan2(taup, np.cos(lam))
    etap = np.arcsinh(np.sin(lam) / np.hypot(taup, np.cos(lam)))
    xi = xip.copy() if isinstance(xip, np.ndarray) else xip
    eta = etap.copy() if isinstance(etap, np.ndarray) else etap
    for j, a in enumerate(alpha, start=1):
        xi = xi + a * np.sin(2 * j * xip) * np.cosh(2 * j * etap)
        eta = eta + a * np.cos(2 * j * xip) * np.sinh(2 * j * etap)
    k0a = pp.scale_factor_k0 * rectifying_radius(ell)
    easting = pp.false_easting + k0a * eta
    northing = pp.false_northing + k0a * (xi - _xi0(crs))
    return easting, northing


def tm_inverse(easting, northing, crs: CrsDef):
    """(easting, northing) metres -> geodetic (lat, lon) degrees."""
    pp = crs.projection_params
    ell = crs.ellipsoid
    _, beta = _coefficients(ell.n)
    k0a = pp.scale_factor_k0 * rectifying_radius(ell)
    xi = (np.asarray(northing, dtype=float) - pp.false_northing) / k0a + _xi0(crs)
    eta = (np.asarray(easting, dtype=float) - pp.false_easting) / k0a
    xip, etap = xi, eta
    for j, b in enumerate(beta, start=1):
        xip = xip - b * np.sin(2 * j * xi) * np.cosh(2 * j * eta)
        etap = etap - b * np.cos(2 * j * xi) * np.sinh(2 * j * eta)
    taup = np.sin(xip) / np.hypot(np.sinh(etap), np.cos(xip))
    lam = np.arctan2(np.sinh(etap), np.cos(xip))
    tau = geodetic_tau(taup, ell.e)
    lat = np.degrees(np.arctan(tau))
    lon = pp.lon_origin + np.degrees(lam)
    return lat, lon
