"""Coordinates on the triangle of interaction and maps between them.

Three charts are used throughout the package, always with edge order
(12, 23, 31):

* ``r``   -- mutual distances r_ij,
* ``rho`` -- squared mutual distances rho_ij = r_ij**2,
* ``geo`` -- permutation-invariant triple (P, S, T): half the sum of the
  rho's, the squared triangle area, and the product of the rho's.

All maps broadcast over leading axes; shape-changing inversions
(``rho_from_geo``) are scalar.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoPhysicalPreimage

# Tolerances for root clamping and physicality flags (dimensionless ratios).
ROOT_CLAMP_TOL = 1e-12
PHYSICAL_TOL = 1e-10


@dataclass(frozen=True)
class MassTriple:
    """Three positive body masses with the derived pair masses.

    ``mu_ij = m_i m_j / M`` and ``m_ij = m_i m_j / (m_i + m_j)``; both are
    exposed in the fixed pair order (12, 23, 31).
    """

    m1: float
    m2: float
    m3: float

    def __post_init__(self):
        if not (self.m1 > 0 and self.m2 > 0 and self.m3 > 0):
            raise ValueError(f"masses must be positive, got {(self.m1, self.m2, self.m3)}")

    @property
    def total(self) -> float:
        return self.m1 + self.m2 + self.m3

    @property
    def product(self) -> float:
        return self.m1 * self.m2 * self.m3

    @property
    def mu(self) -> np.ndarray:
        """Center-of-mass reduced masses (mu12, mu23, mu31)."""
        M = self.total
        return np.array([self.m1 * self.m2 / M, self.m2 * self.m3 / M, self.m3 * self.m1 / M])

    @property
    def pair(self) -> np.ndarray:
        """Two-body reduced masses (m12, m23, m31)."""
        return np.array([
            self.m1 * self.m2 / (self.m1 + self.m2),
            self.m2 * self.m3 / (self.m2 + self.m3),
            self.m3 * self.m1 / (self.m3 + self.m1),
        ])

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3])

    @property
    def is_unit(self) -> bool:
        return self.m1 == self.m2 == self.m3 == 1.0


UNIT_MASSES = MassTriple(1.0, 1.0, 1.0)


def rho_from_r(r):
    """Square the mutual distances: (r12, r23, r31) -> (rho12, rho23, rho31)."""
    r = np.asarray(r, dtype=float)
    return r * r


def r_from_rho(rho):
    rho = np.asarray(rho, dtype=float)
    return np.sqrt(rho)


def area_sq_cayley_menger(rho):
    """Squared area of the triangle with squared sides ``rho``.

    Negative values mean the triple violates the triangle inequality; they
    are returned as-is so that callers probing slightly outside the
    physical region can decide what to do (see ``rho_is_physical``).

    The inputs are sorted before combining, which makes the value exactly
    invariant under permutations of the edges (float addition is not).
    """
    rho = np.sort(np.asarray(rho, dtype=float), axis=-1)
    a, b, c = rho[..., 0], rho[..., 1], rho[..., 2]
    return (2 * a * b + 2 * a * c + 2 * b * c - a * a - b * b - c * c) / 16.0


def rho_is_physical(rho, tol: float = PHYSICAL_TOL):
    """True where the squared area is nonnegative up to ``-tol * P**2``."""
    rho = np.asarray(rho, dtype=float)
    s = area_sq_cayley_menger(rho)
    p = rho.sum(axis=-1) / 2.0
    return s >= -tol * p * p


def geo_from_rho(rho):
    """Map squared sides to the invariant triple (P, S, T).

    P is half the sum, S the squared area (Cayley-Menger), T the product.
    Inputs are sorted first, so the result is exactly invariant under all
    six permutations of ``rho``.
    """
    rho = np.sort(np.asarray(rho, dtype=float), axis=-1)
    p = rho.sum(axis=-1) / 2.0
    s = area_sq_cayley_menger(rho)
    t = rho[..., 0] * rho[..., 1] * rho[..., 2]
    return np.stack([p, s, t], axis=-1)


def geo_jacobian(rho):
    """d(P,S,T)/d(rho); rows are gradients of P, S, T."""
    rho = np.asarray(rho, dtype=float)
    a, b, c = rho
    dS = np.array([b + c - a, a + c - b, a + b - c]) / 8.0
    return np.array([
        [0.5, 0.5, 0.5],
        dS,
        [b * c, a * c, a * b],
    ])


def cubic_discriminant(geo):
    """Discriminant of t^3 - 2P t^2 + (4S + P^2) t - T whose roots are the rho's.

    Algebraically identical to the bracketed factor of the geo-metric
    determinant (see ``metrics.geo_bracket``); kept as an independent
    evaluation route for the identity tests.
    """
    geo = np.asarray(geo, dtype=float)
    p = -2.0 * geo[..., 0]
    q = 4.0 * geo[..., 1] + geo[..., 0] ** 2
    r = -geo[..., 2]
    return (18.0 * p * q * r - 4.0 * p ** 3 * r + p * p * q * q
            - 4.0 * q ** 3 - 27.0 * r * r)


def rho_from_geo(geo, clamp_tol: float = ROOT_CLAMP_TOL):
    """Invert ``geo_from_rho``: recover the sorted squared sides.

    The rho's are the roots of t^3 - sigma1 t^2 + sigma2 t - sigma3 with
    sigma1 = 2P, sigma2 = 4S + P^2, sigma3 = T, solved in closed
    trigonometric form for the three-real-root case.  Roots slightly
    negative (within ``clamp_tol`` of zero relative to the root scale) are
    clamped to zero; anything worse raises ``NoPhysicalPreimage``.

    Returns ``(rho_sorted, multiplicity)`` where multiplicity counts the
    permutation-equivalent labelled solutions (1, 3 or 6).
    """
    P, S, T = (float(v) for v in np.asarray(geo, dtype=float))
    sigma1 = 2.0 * P
    sigma2 = 4.0 * S + P * P
    sigma3 = T
    # depressed cubic y^3 + p y + q, t = y + sigma1/3
    shift = sigma1 / 3.0
    p = sigma2 - sigma1 * sigma1 / 3.0
    q = -2.0 * sigma1 ** 3 / 27.0 + sigma1 * sigma2 / 3.0 - sigma3
    scale = max(abs(P), abs(S) ** 0.5, abs(T) ** (1.0 / 3.0), 1e-300)
    if p > 4.0 * ROOT_CLAMP_TOL * scale * scale:
        raise NoPhysicalPreimage(f"complex pair of roots for geo={geo!r} (p={p:.3e})")
    p = min(p, 0.0)
    if p == 0.0:
        if abs(q) > ROOT_CLAMP_TOL * scale ** 3:
            raise NoPhysicalPreimage(f"complex pair of roots for geo={geo!r} (q={q:.3e})")
        roots = np.full(3, shift)
    else:
        m = 2.0 * np.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        if abs(arg) > 1.0 + 1e-9:
            raise NoPhysicalPreimage(f"complex pair of roots for geo={geo!r} (cos arg {arg:.6f})")
        theta = np.arccos(np.clip(arg, -1.0, 1.0)) / 3.0
        k = np.array([0.0, 1.0, 2.0])
        roots = m * np.cos(theta - 2.0 * np.pi * k / 3.0) + shift
    roots = np.sort(roots)
    neg = -clamp_tol * max(scale, roots[-1])
    if roots[0] < neg:
        raise NoPhysicalPreimage(f"negative root {roots[0]:.3e} for geo={geo!r}")
    roots = np.clip(roots, 0.0, None)
    # repeated roots are recovered only to ~sqrt(eps) relative accuracy
    tol = 1e-7 * max(scale, roots[-1])
    distinct = 1 + (roots[1] - roots[0] > tol) + (roots[2] - roots[1] > tol)
    multiplicity = {1: 1, 2: 3, 3: 6}[distinct]
    return roots, multiplicity


def moment_of_inertia(rho, m: MassTriple):
    """Moment of inertia about the center of mass: sum of mu_ij * rho_ij."""
    rho = np.asarray(rho, dtype=float)
    return rho @ m.mu


def modified_volume(rho, m: MassTriple):
    """Mass-weighted pair (Pm, Sm).

    Pm is the mass-weighted sum of squared edges (equal to
    M/(2 m1 m2 m3) times the moment of inertia); Sm carries the weight
    3 m1 m2 m3 / M on the squared area.  Reduces to (P, S) at unit masses.
    """
    rho = np.asarray(rho, dtype=float)
    pm = 0.5 * (rho[..., 0] / m.m3 + rho[..., 1] / m.m1 + rho[..., 2] / m.m2)
    sm = (3.0 * m.product / m.total) * area_sq_cayley_menger(rho)
    return np.stack([pm, sm], axis=-1)


def volume_form_weight(m: MassTriple) -> float:
    """Area-squared weight for which the reduced (Pm, Sm) kinetic block
    takes the unit-mass volume form exactly (checked by the push-forward
    tests in the metrics suite)."""
    return m.total / (3.0 * m.product)


def volume_form_coords(rho, m: MassTriple):
    """(Pm, Sm) in the volume-form normalization (see ``volume_form_weight``).

    This is the coordinate pair in which mass-independent trajectories of
    two-variable potentials are realized; it differs from
    ``modified_volume`` only by the constant weight on the area term.
    """
    rho = np.asarray(rho, dtype=float)
    pm = 0.5 * (rho[..., 0] / m.m3 + rho[..., 1] / m.m1 + rho[..., 2] / m.m2)
    sm = volume_form_weight(m) * area_sq_cayley_menger(rho)
    return np.stack([pm, sm], axis=-1)


def volume_form_gradients(rho, m: MassTriple):
    """Gradients (d Pm / d rho, d Sm_form / d rho) as two length-3 arrays."""
    rho = np.asarray(rho, dtype=float)
    a, b, c = rho
    d_pm = np.array([0.5 / m.m3, 0.5 / m.m1, 0.5 / m.m2])
    d_s = np.array([b + c - a, a + c - b, a + b - c]) / 8.0
    return d_pm, volume_form_weight(m) * d_s
