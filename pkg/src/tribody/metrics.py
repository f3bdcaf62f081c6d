"""Kinetic-energy cometrics of the reduced three-body problem.

The kinetic energy in every representation is the quadratic form
``p^T G(q) p`` (no factor 1/2); the matrices G built here are the
"tensors of inertia" of that form, in the fixed edge basis (12, 23, 31)
for the distance charts and (P, S, T) / (P, S) for the shape charts.

Each determinant has an exact factorized form; both the matrix route and
the factorized route are exposed so the identity can be tested rather
than assumed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BinaryCollision, DegenerateMetric
from .geometry import MassTriple, area_sq_cayley_menger, moment_of_inertia

DEGENERACY_EPS = 1e-10


def cometric_r(r, m: MassTriple):
    """Cometric in the mutual-distance chart; singular at binary collisions."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise BinaryCollision(f"r-representation cometric undefined at r={r!r}")
    r12, r23, r31 = r[..., 0], r[..., 1], r[..., 2]
    q12, q23, q31 = r12 * r12, r23 * r23, r31 * r31
    mp = m.pair
    g = np.zeros(r.shape[:-1] + (3, 3))
    g[..., 0, 0] = 1.0 / (2.0 * mp[0])
    g[..., 1, 1] = 1.0 / (2.0 * mp[1])
    g[..., 2, 2] = 1.0 / (2.0 * mp[2])
    g[..., 0, 1] = g[..., 1, 0] = (q12 + q23 - q31) / (4.0 * m.m2 * r12 * r23)
    g[..., 0, 2] = g[..., 2, 0] = (q12 + q31 - q23) / (4.0 * m.m1 * r12 * r31)
    g[..., 1, 2] = g[..., 2, 1] = (q23 + q31 - q12) / (4.0 * m.m3 * r23 * r31)
    return g


def det_cometric_r(r, m: MassTriple):
    """Factorized determinant: M^2/(2 prod m^2) * I * S / (r12 r23 r31)^2."""
    r = np.asarray(r, dtype=float)
    rho = r * r
    i = moment_of_inertia(rho, m)
    s = area_sq_cayley_menger(rho)
    return (m.total ** 2 / (2.0 * m.product ** 2)) * i * s / (rho[..., 0] * rho[..., 1] * rho[..., 2])


def cometric_rho(rho, m: MassTriple):
    """Cometric in the squared-distance chart; entries linear in rho and
    regular at binary collisions."""
    rho = np.asarray(rho, dtype=float)
    a, b, c = rho[..., 0], rho[..., 1], rho[..., 2]
    mp = m.pair
    g = np.zeros(rho.shape[:-1] + (3, 3))
    g[..., 0, 0] = 2.0 * a / mp[0]
    g[..., 1, 1] = 2.0 * b / mp[1]
    g[..., 2, 2] = 2.0 * c / mp[2]
    g[..., 0, 1] = g[..., 1, 0] = (a + b - c) / m.m2
    g[..., 0, 2] = g[..., 2, 0] = (a + c - b) / m.m1
    g[..., 1, 2] = g[..., 2, 1] = (b + c - a) / m.m3
    return g


def det_cometric_rho(rho, m: MassTriple):
    """Factorized determinant, linear-times-quadratic form:
    2 M / (prod m)^2 * (m1 m2 rho12 + m1 m3 rho31 + m2 m3 rho23) * 16 S."""
    rho = np.asarray(rho, dtype=float)
    a, b, c = rho[..., 0], rho[..., 1], rho[..., 2]
    lin = m.m1 * m.m2 * a + m.m1 * m.m3 * c + m.m2 * m.m3 * b
    return 2.0 * m.total / m.product ** 2 * lin * 16.0 * area_sq_cayley_menger(rho)


def det_cometric_rho_inertia(rho, m: MassTriple):
    """Same determinant through the moment of inertia: 32 M^2 I S / (prod m)^2."""
    rho = np.asarray(rho, dtype=float)
    return (32.0 * m.total ** 2 / m.product ** 2
            * moment_of_inertia(rho, m) * area_sq_cayley_menger(rho))


def cometric_geo(geo):
    """Cometric in the (P, S, T) chart (unit masses); polynomial entries."""
    geo = np.asarray(geo, dtype=float)
    p, s, t = geo[..., 0], geo[..., 1], geo[..., 2]
    g = np.zeros(geo.shape[:-1] + (3, 3))
    g[..., 0, 0] = 3.0 * p
    g[..., 0, 1] = g[..., 1, 0] = 6.0 * s
    g[..., 0, 2] = g[..., 2, 0] = 9.0 * t
    g[..., 1, 1] = p * s
    g[..., 1, 2] = g[..., 2, 1] = 4.0 * s * (4.0 * s + p * p)
    g[..., 2, 2] = 4.0 * (12.0 * s + p * p) * t
    return g


def geo_bracket(geo):
    """The isosceles factor 4PT(36S + P^2) - 16S(4S + P^2)^2 - 27T^2.

    Vanishes exactly when two squared sides coincide; equals the
    discriminant of the side-recovery cubic (``geometry.cubic_discriminant``).
    """
    geo = np.asarray(geo, dtype=float)
    p, s, t = geo[..., 0], geo[..., 1], geo[..., 2]
    q = 4.0 * s + p * p
    return 4.0 * p * t * (36.0 * s + p * p) - 16.0 * s * q * q - 27.0 * t * t


def det_cometric_geo(geo):
    """Factorized determinant 3 P S * bracket."""
    geo = np.asarray(geo, dtype=float)
    return 3.0 * geo[..., 0] * geo[..., 1] * geo_bracket(geo)


def cometric_vol(p, s):
    """Cometric of the two-variable (P, S) reduction, unit masses."""
    p = np.asarray(p, dtype=float)
    s = np.asarray(s, dtype=float)
    g = np.zeros(np.broadcast(p, s).shape + (2, 2))
    g[..., 0, 0] = 3.0 * p
    g[..., 0, 1] = g[..., 1, 0] = 6.0 * s
    g[..., 1, 1] = p * s
    return g


def det_cometric_vol(p, s):
    p = np.asarray(p, dtype=float)
    s = np.asarray(s, dtype=float)
    return 3.0 * s * (p * p - 12.0 * s)


def cometric_vol_mass(pm, sm, m: MassTriple):
    """Mass form of the volume cometric: the unit-mass matrix in (Pm, Sm)
    scaled by M / (3 m1 m2 m3)."""
    return (m.total / (3.0 * m.product)) * cometric_vol(pm, sm)


def det_cometric_vol_mass(pm, sm, m: MassTriple):
    pm = np.asarray(pm, dtype=float)
    sm = np.asarray(sm, dtype=float)
    return (m.total ** 2 / (3.0 * m.product ** 2)) * sm * (pm * pm - 12.0 * sm)


class DegeneracyClass(enum.Enum):
    REGULAR = "regular"
    TRIPLE_COLLISION = "triple_collision"
    COLLINEAR = "collinear"
    ISOSCELES = "isosceles"


def classify_degeneracy(geo, eps: float = DEGENERACY_EPS) -> DegeneracyClass:
    """Which factor of the geo determinant vanishes, if any.

    The loci nest, so the order is fixed: collision beats collinear beats
    isosceles.
    """
    p, s, t = (float(v) for v in np.asarray(geo, dtype=float))
    if p < eps:
        return DegeneracyClass.TRIPLE_COLLISION
    if s < eps * p * p:
        return DegeneracyClass.COLLINEAR
    if abs(geo_bracket(np.array([p, s, t]))) < eps * p ** 6:
        return DegeneracyClass.ISOSCELES
    return DegeneracyClass.REGULAR


# ---------------------------------------------------------------------------
# Curvature of the two-variable metric
# ---------------------------------------------------------------------------
#
# The covariant metric (inverse of cometric_vol) simplifies to
#   E = P / (3 W),  F = -2 / W,  G = P / (S W),   W = P^2 - 12 S,
# and its Gaussian curvature follows from the Brioschi formula.  The
# analytic partial derivatives below were checked against symbolic
# differentiation; a finite-difference variant of the same pipeline is
# kept for the order-of-convergence test.


def vol_metric_covariant(p, s):
    """Covariant entries (E, F, G) of the two-variable metric."""
    w = p * p - 12.0 * s
    return p / (3.0 * w), -2.0 / w, p / (s * w)


def _vol_metric_partials(p, s):
    w = p * p - 12.0 * s
    e, f, g = vol_metric_covariant(p, s)
    w2, w3 = w * w, w * w * w
    ep = -(p * p + 12.0 * s) / (3.0 * w2)
    es = 4.0 * p / w2
    fp = 4.0 * p / w2
    fs = -24.0 / w2
    gp = -(p * p + 12.0 * s) / (s * w2)
    gs = p * (24.0 * s - p * p) / (s * s * w2)
    ess = 96.0 * p / w3
    fps = 96.0 * p / w3
    gpp = (2.0 * p / s) * (p * p + 36.0 * s) / w3
    return e, f, g, ep, es, fp, fs, gp, gs, ess, fps, gpp


def brioschi_gaussian(e, f, g, ep, es, fp, fs, gp, gs, ess, fps, gpp):
    """Gaussian curvature from first/second partials of a 2D metric."""
    m1 = np.array([
        [-0.5 * ess + fps - 0.5 * gpp, 0.5 * ep, fp - 0.5 * es],
        [fs - 0.5 * gp, e, f],
        [0.5 * gs, f, g],
    ])
    m2 = np.array([
        [0.0, 0.5 * es, 0.5 * gp],
        [0.5 * es, e, f],
        [0.5 * gp, f, g],
    ])
    det = e * g - f * f
    return (np.linalg.det(m1) - np.linalg.det(m2)) / (det * det)


def gaussian_curvature_fd(metric_fn, x, y, h):
    """Gaussian curvature with all metric partials by central differences.

    ``metric_fn(x, y) -> (E, F, G)``.  Order-2 accurate in ``h``; used to
    validate the analytic pipeline and for the convergence test.
    """
    def d_dx(fn, i):
        return (fn(x + h, y)[i] - fn(x - h, y)[i]) / (2 * h)

    def d_dy(fn, i):
        return (fn(x, y + h)[i] - fn(x, y - h)[i]) / (2 * h)

    e, f, g = metric_fn(x, y)
    ep, fp, gp = (d_dx(metric_fn, i) for i in range(3))
    es, fs, gs = (d_dy(metric_fn, i) for i in range(3))
    ess = (metric_fn(x, y + h)[0] - 2 * e + metric_fn(x, y - h)[0]) / h ** 2
    gpp = (metric_fn(x + h, y)[2] - 2 * g + metric_fn(x - h, y)[2]) / h ** 2
    fps = (metric_fn(x + h, y + h)[1] - metric_fn(x + h, y - h)[1]
           - metric_fn(x - h, y + h)[1] + metric_fn(x - h, y - h)[1]) / (4 * h ** 2)
    return brioschi_gaussian(e, f, g, ep, es, fp, fs, gp, gs, ess, fps, gpp)


@dataclass(frozen=True)
class RicciReport:
    """Independent curvature value next to the closed-form claim."""

    value: float           # Ricci scalar from the metric itself (2 * Gaussian)
    claimed: float         # the closed-form expression under test
    difference: float      # |value - claimed|


def _check_vol_regular(p, s):
    d = det_cometric_vol(p, s)
    scale = 3.0 * abs(s) * (p * p + 12.0 * abs(s)) + 1e-300
    if abs(d) < 1e-12 * scale:
        raise DegenerateMetric(f"volume metric degenerate at P={p}, S={s} (det={d:.3e})")


def ricci_scalar_vol(p: float, s: float) -> RicciReport:
    """Ricci scalar of the two-variable metric at (P, S).

    ``value`` is computed from analytic metric derivatives via Brioschi
    (it comes out flat: zero up to rounding); ``claimed`` evaluates
    3 S P (S - 3) / D_vol^2, which is dimensionally inhomogeneous and is
    reported as a claim under test, not used anywhere downstream.
    """
    p, s = float(p), float(s)
    _check_vol_regular(p, s)
    value = 2.0 * brioschi_gaussian(*_vol_metric_partials(p, s))
    d = det_cometric_vol(p, s)
    claimed = 3.0 * s * p * (s - 3.0) / (d * d)
    return RicciReport(value=value, claimed=claimed, difference=abs(value - claimed))


def ricci_scalar_vol_fd(p: float, s: float, h: float) -> float:
    """Finite-difference variant of ``ricci_scalar_vol``'s independent value."""
    p, s = float(p), float(s)
    _check_vol_regular(p, s)
    return 2.0 * gaussian_curvature_fd(vol_metric_covariant, p, s, h)


def ricci_scalar_vol_mass(pm: float, sm: float, m: MassTriple) -> RicciReport:
    """Mass version: the cometric is a constant multiple c of the unit
    form, so the independent value is c times the unit-form scalar."""
    pm, sm = float(pm), float(sm)
    _check_vol_regular(pm, sm)
    c = m.total / (3.0 * m.product)
    value = 2.0 * c * brioschi_gaussian(*_vol_metric_partials(pm, sm))
    w = pm * pm - 12.0 * sm
    claimed = m.product * pm * (sm - 3.0) / (m.total * sm * w * w)
    return RicciReport(value=value, claimed=claimed, difference=abs(value - claimed))
