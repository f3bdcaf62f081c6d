"""Potential families, their gradients in every chart, and the gravity quartic.

All potentials are functions of the squared mutual distances alone; each
family also declares which reduced variables it factors through so flows
in the smaller charts can reject unsupported combinations early.

Edge order is (12, 23, 31) everywhere.  Note the harmonic-chain
convention: the spring constant nu13 couples to rho31 (same pair).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import CollisionSingularity, DegenerateQuartic, NoPhysicalPreimage
from .geometry import (
    MassTriple,
    UNIT_MASSES,
    area_sq_cayley_menger,
    modified_volume,
    rho_from_geo,
)

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class NewtonGravity:
    """V = -gamma * sum 1/r_ij, the d=3 pairwise gravity potential."""
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class LogGravity2D:
    """Planar gravity V = gamma * ln(r12 r23 r31) = (gamma/2) ln T."""
    gamma: float = 1.0


@dataclass(frozen=True)
class HarmonicChain:
    """Closed chain of springs: V = 2 omega^2 (nu12 rho12 + nu13 rho13 + nu23 rho23)."""
    omega: float = 1.0
    nu12: float = 1.0
    nu13: float = 1.0
    nu23: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if min(self.nu12, self.nu13, self.nu23) < 0:
            raise ValueError("spring constants must be nonnegative")

    @property
    def rho_coefficients(self) -> np.ndarray:
        """Coefficients of (rho12, rho23, rho31) in V."""
        w2 = 2.0 * self.omega ** 2
        return np.array([w2 * self.nu12, w2 * self.nu23, w2 * self.nu13])


@dataclass(frozen=True)
class Lemniscate:
    """The figure-eight choreography potential (1/4) ln T - (sqrt(3)/12) P."""


@dataclass(frozen=True)
class AnharmonicPS:
    """Polynomial volume-variable potential V = A P + B P^2 + C S."""
    A: float
    B: float = 0.0
    C: float = 0.0


@dataclass(frozen=True)
class ScaleFamily:
    """V = U(P / sqrt(S)) / sqrt(S) for an arbitrary profile U.

    Every member satisfies 2 S dV/dS + P dV/dP + V = 0; the profile handle
    must be side-effect free.
    """
    U: Callable[[float], float]


@dataclass(frozen=True)
class VolumeMass:
    """Mass-weighted two-variable potential, evaluated as
    M/(3 m1 m2 m3) * inner(Pm, Sm) with (Pm, Sm) from ``modified_volume``.

    ``inner`` is an AnharmonicPS (closed-form gradients, kernel support) or
    any callable V(Pm, Sm).
    """
    inner: Union[AnharmonicPS, Callable[[float, float], float]]
    masses: MassTriple = field(default=UNIT_MASSES)

    @property
    def prefactor(self) -> float:
        return self.masses.total / (3.0 * self.masses.product)


PotentialSpec = Union[
    NewtonGravity, LogGravity2D, HarmonicChain, Lemniscate,
    AnharmonicPS, ScaleFamily, VolumeMass, None,
]


def depends_on(spec: PotentialSpec) -> str:
    """Which reduced variables the potential factors through:
    one of 'rho', 'geo', 'vol', 'p', 'volm', 'pm' ('none' for V=0)."""
    if spec is None:
        return "none"
    if isinstance(spec, NewtonGravity):
        return "rho"
    if isinstance(spec, (LogGravity2D, Lemniscate)):
        return "geo"
    if isinstance(spec, HarmonicChain):
        if spec.nu12 == spec.nu13 == spec.nu23:
            return "p"
        return "rho"
    if isinstance(spec, AnharmonicPS):
        return "vol" if spec.C != 0.0 else "p"
    if isinstance(spec, ScaleFamily):
        return "vol"
    if isinstance(spec, VolumeMass):
        if isinstance(spec.inner, AnharmonicPS) and spec.inner.C == 0.0:
            return "pm"
        return "volm"
    raise TypeError(f"unknown potential spec {spec!r}")


# ---------------------------------------------------------------------------
# Evaluation and gradients in the rho chart
# ---------------------------------------------------------------------------

def eval_potential(spec: PotentialSpec, rho, m: MassTriple = UNIT_MASSES) -> float:
    """Potential energy at the squared distances ``rho``."""
    if spec is None:
        return 0.0
    rho = np.asarray(rho, dtype=float)
    if isinstance(spec, NewtonGravity):
        if np.any(rho <= 0):
            raise CollisionSingularity(f"gravity singular at rho={rho!r}")
        return -spec.gamma * float(np.sum(rho ** -0.5))
    if isinstance(spec, LogGravity2D):
        t = float(np.prod(rho))
        if t <= 0:
            raise CollisionSingularity(f"log gravity singular at rho={rho!r}")
        return 0.5 * spec.gamma * math.log(t)
    if isinstance(spec, HarmonicChain):
        return float(spec.rho_coefficients @ rho)
    if isinstance(spec, Lemniscate):
        t = float(np.prod(rho))
        if t <= 0:
            raise CollisionSingularity(f"lemniscate potential singular at rho={rho!r}")
        p = float(rho.sum()) / 2.0
        return 0.25 * math.log(t) - SQRT3 / 12.0 * p
    if isinstance(spec, AnharmonicPS):
        p = float(rho.sum()) / 2.0
        s = float(area_sq_cayley_menger(rho))
        return spec.A * p + spec.B * p * p + spec.C * s
    if isinstance(spec, ScaleFamily):
        p = float(rho.sum()) / 2.0
        s = float(area_sq_cayley_menger(rho))
        return _scale_family_value(spec.U, p, s)
    if isinstance(spec, VolumeMass):
        pm, sm = modified_volume(rho, spec.masses)
        return spec.prefactor * _volume_inner_value(spec.inner, float(pm), float(sm))
    raise TypeError(f"unknown potential spec {spec!r}")


def grad_potential_rho(spec: PotentialSpec, rho, m: MassTriple = UNIT_MASSES) -> np.ndarray:
    """Analytic dV/drho (length 3)."""
    rho = np.asarray(rho, dtype=float)
    if spec is None:
        return np.zeros(3)
    if isinstance(spec, NewtonGravity):
        if np.any(rho <= 0):
            raise CollisionSingularity(f"gravity singular at rho={rho!r}")
        return 0.5 * spec.gamma * rho ** -1.5
    if isinstance(spec, LogGravity2D):
        return 0.5 * spec.gamma / rho
    if isinstance(spec, HarmonicChain):
        return spec.rho_coefficients.copy()
    if isinstance(spec, Lemniscate):
        return 0.25 / rho - SQRT3 / 24.0
    if isinstance(spec, AnharmonicPS):
        p = float(rho.sum()) / 2.0
        return (spec.A + 2.0 * spec.B * p) * 0.5 + spec.C * _ds_drho(rho)
    if isinstance(spec, ScaleFamily):
        p = float(rho.sum()) / 2.0
        s = float(area_sq_cayley_menger(rho))
        vp, vs = _scale_family_grad(spec.U, p, s)
        return vp * 0.5 + vs * _ds_drho(rho)
    if isinstance(spec, VolumeMass):
        mm = spec.masses
        pm, sm = modified_volume(rho, mm)
        vp, vs = _volume_inner_grad(spec.inner, float(pm), float(sm))
        d_pm = np.array([0.5 / mm.m3, 0.5 / mm.m1, 0.5 / mm.m2])
        d_sm = (3.0 * mm.product / mm.total) * _ds_drho(rho)
        return spec.prefactor * (vp * d_pm + vs * d_sm)
    raise TypeError(f"unknown potential spec {spec!r}")


def _ds_drho(rho):
    a, b, c = rho
    return np.array([b + c - a, a + c - b, a + b - c]) / 8.0


# ---------------------------------------------------------------------------
# Evaluation and gradients in the reduced charts
# ---------------------------------------------------------------------------

def eval_potential_geo(spec: PotentialSpec, geo) -> float:
    p, s, t = (float(v) for v in np.asarray(geo, dtype=float))
    if spec is None:
        return 0.0
    if isinstance(spec, LogGravity2D):
        return 0.5 * spec.gamma * math.log(t)
    if isinstance(spec, Lemniscate):
        return 0.25 * math.log(t) - SQRT3 / 12.0 * p
    if isinstance(spec, AnharmonicPS):
        return spec.A * p + spec.B * p * p + spec.C * s
    if isinstance(spec, HarmonicChain) and depends_on(spec) == "p":
        return 4.0 * spec.omega ** 2 * spec.nu12 * p
    if isinstance(spec, ScaleFamily):
        return _scale_family_value(spec.U, p, s)
    raise ValueError(f"{type(spec).__name__} does not factor through (P, S, T)")


def grad_potential_geo(spec: PotentialSpec, geo) -> np.ndarray:
    """(dV/dP, dV/dS, dV/dT) for potentials factoring through the shape chart."""
    p, s, t = (float(v) for v in np.asarray(geo, dtype=float))
    if spec is None:
        return np.zeros(3)
    if isinstance(spec, LogGravity2D):
        return np.array([0.0, 0.0, 0.5 * spec.gamma / t])
    if isinstance(spec, Lemniscate):
        return np.array([-SQRT3 / 12.0, 0.0, 0.25 / t])
    if isinstance(spec, AnharmonicPS):
        return np.array([spec.A + 2.0 * spec.B * p, spec.C, 0.0])
    if isinstance(spec, HarmonicChain) and depends_on(spec) == "p":
        return np.array([4.0 * spec.omega ** 2 * spec.nu12, 0.0, 0.0])
    if isinstance(spec, ScaleFamily):
        vp, vs = _scale_family_grad(spec.U, p, s)
        return np.array([vp, vs, 0.0])
    raise ValueError(f"{type(spec).__name__} does not factor through (P, S, T)")


def eval_potential_vol(spec: PotentialSpec, p: float, s: float, m: MassTriple = UNIT_MASSES) -> float:
    """Potential on the two-variable chart; (Pm, Sm) inputs for VolumeMass."""
    if spec is None:
        return 0.0
    if isinstance(spec, VolumeMass):
        return spec.prefactor * _volume_inner_value(spec.inner, p, s)
    if isinstance(spec, (AnharmonicPS, ScaleFamily)):
        return eval_potential_geo(spec, np.array([p, s, 1.0]))
    if isinstance(spec, HarmonicChain) and depends_on(spec) == "p":
        return 4.0 * spec.omega ** 2 * spec.nu12 * p
    raise ValueError(f"{type(spec).__name__} does not factor through (P, S)")


def grad_potential_vol(spec: PotentialSpec, p: float, s: float, m: MassTriple = UNIT_MASSES) -> np.ndarray:
    if spec is None:
        return np.zeros(2)
    if isinstance(spec, VolumeMass):
        vp, vs = _volume_inner_grad(spec.inner, p, s)
        return spec.prefactor * np.array([vp, vs])
    if isinstance(spec, (AnharmonicPS, ScaleFamily)) or (
            isinstance(spec, HarmonicChain) and depends_on(spec) == "p"):
        return grad_potential_geo(spec, np.array([p, s, 1.0]))[:2]
    raise ValueError(f"{type(spec).__name__} does not factor through (P, S)")


def grad_potential_r(spec: PotentialSpec, r, m: MassTriple = UNIT_MASSES) -> np.ndarray:
    """dV/dr = 2 r dV/drho."""
    r = np.asarray(r, dtype=float)
    return 2.0 * r * grad_potential_rho(spec, r * r, m)


def _volume_inner_value(inner, pm: float, sm: float) -> float:
    if isinstance(inner, AnharmonicPS):
        return inner.A * pm + inner.B * pm * pm + inner.C * sm
    return float(inner(pm, sm))


def _volume_inner_grad(inner, pm: float, sm: float):
    if isinstance(inner, AnharmonicPS):
        return inner.A + 2.0 * inner.B * pm, inner.C
    hp = _fd_step(pm)
    hs = _fd_step(sm)
    vp = (inner(pm + hp, sm) - inner(pm - hp, sm)) / (2 * hp)
    vs = (inner(pm, sm + hs) - inner(pm, sm - hs)) / (2 * hs)
    return vp, vs


def _fd_step(x: float) -> float:
    return (np.finfo(float).eps) ** (1.0 / 3.0) * max(1.0, abs(x))


# ---------------------------------------------------------------------------
# The scale family V = U(P/sqrt(S)) / sqrt(S)
# ---------------------------------------------------------------------------

def _scale_family_value(u, p: float, s: float) -> float:
    if s <= 0:
        raise CollisionSingularity("scale-family potential needs S > 0")
    return u(p / math.sqrt(s)) / math.sqrt(s)


def _scale_family_grad(u, p: float, s: float):
    """(dV/dP, dV/dS) by the chain rule; U' by central difference."""
    if s <= 0:
        raise CollisionSingularity("scale-family potential needs S > 0")
    rs = math.sqrt(s)
    z = p / rs
    h = _fd_step(z)
    du = (u(z + h) - u(z - h)) / (2 * h)
    uv = u(z)
    vp = du / s
    vs = -p * du / (2 * s * s) - uv / (2 * s * rs)
    return vp, vs


def scale_family_check(u: Callable[[float], float], p: float, s: float) -> float:
    """Residual of 2 S dV/dS + P dV/dP + V for V = U(P/sqrt(S))/sqrt(S).

    Identically zero for any profile U; the U' pieces cancel exactly, so
    even the finite-difference derivative leaves only rounding noise.
    """
    vp, vs = _scale_family_grad(u, p, s)
    return 2.0 * s * vs + p * vp + _scale_family_value(u, p, s)


# ---------------------------------------------------------------------------
# The Newton-gravity quartic in shape variables
# ---------------------------------------------------------------------------

def quartic_coefficients(geo, gamma: float) -> np.ndarray:
    """Coefficients (descending powers) of the quartic satisfied by the
    gravity potential in shape variables:
    T^2 V^4 - 2 g^2 (4S+P^2) T V^2 + 8 g^3 T^{3/2} V + g^4 ((4S+P^2)^2 - 8 T P).

    The positive branch of sqrt(T) is used; that choice is what makes
    -gamma * sum rho^{-1/2} a root.
    """
    p, s, t = (float(v) for v in np.asarray(geo, dtype=float))
    if t <= 0:
        raise DegenerateQuartic(f"quartic degenerates at T={t}")
    q = 4.0 * s + p * p
    g = gamma
    return np.array([
        t * t,
        0.0,
        -2.0 * g * g * q * t,
        8.0 * g ** 3 * t ** 1.5,
        g ** 4 * (q * q - 8.0 * t * p),
    ])


def quartic_residual(geo, gamma: float, v: float) -> float:
    """Value of the quartic polynomial at trial potential ``v``."""
    c = quartic_coefficients(geo, gamma)
    return float(np.polyval(c, v))


def quartic_discriminant(geo, gamma: float) -> float:
    """Closed-form discriminant 4096 g^12 T^8 * (isosceles bracket)."""
    from .metrics import geo_bracket
    p, s, t = (float(v) for v in np.asarray(geo, dtype=float))
    return 4096.0 * gamma ** 12 * t ** 8 * float(geo_bracket(np.array([p, s, t])))


@dataclass(frozen=True)
class QuarticRoots:
    """Roots of the gravity quartic with their sign-pattern labels.

    ``labels[i]`` identifies roots[i] with one of the four Coulomb-type
    sums: 'V' = -(a+b+c), 'V1' = -a+b+c, 'V2' = a-b+c, 'V3' = a+b-c where
    (a, b, c) = gamma / sqrt(rho_sorted).  Labels are None when the shape
    point has no real triangle preimage.
    """

    roots: np.ndarray
    labels: tuple | None
    discriminant: float


def newton_quartic_roots(geo, gamma: float = 1.0) -> QuarticRoots:
    """Solve the gravity quartic by companion-matrix eigenvalues.

    Robust near the isosceles locus where roots collide (exactly the
    physically interesting case); a closed-form resolvent would lose
    accuracy there.
    """
    coeffs = quartic_coefficients(geo, gamma)
    roots = np.roots(coeffs)
    roots = roots[np.argsort(roots.real)]
    disc = quartic_discriminant(geo, gamma)
    labels = None
    try:
        rho, _ = rho_from_geo(geo)
    except NoPhysicalPreimage:
        rho = None
    if rho is not None and np.all(rho > 0):
        a, b, c = gamma / np.sqrt(rho)
        patterns = {"V": -(a + b + c), "V1": -a + b + c, "V2": a - b + c, "V3": a + b - c}
        names = list(patterns)
        used = []
        out = []
        for root in roots:
            best = min((n for n in names if n not in used),
                       key=lambda n: abs(root - patterns[n]))
            used.append(best)
            out.append(best)
        labels = tuple(out)
    return QuarticRoots(roots=roots, labels=labels, discriminant=disc)


def lagrange_equilateral_value(p: float, gamma: float = 1.0) -> float:
    """Gravity potential of the equilateral central configuration,
    -3^{3/2} gamma / sqrt(2P)."""
    return -(3.0 ** 1.5) * gamma / math.sqrt(2.0 * p)


# ---------------------------------------------------------------------------
# Superintegrability of the harmonic chain
# ---------------------------------------------------------------------------

class Superintegrability(enum.Enum):
    MAXIMAL = "maximal"
    MINIMAL = "minimal"
    GENERIC = "generic"


def superintegrability_class(m: MassTriple, nu12: float, nu13: float, nu23: float,
                             rtol: float = 1e-12) -> Superintegrability:
    """Count which of the mass-spring balance relations hold.

    The three relations m2 nu13 = m3 nu12, m1 nu23 = m2 nu13,
    m3 nu12 = m1 nu23 are cyclically dependent: any two imply the third,
    so two matches are already the maximal case.
    """
    if min(nu12, nu13, nu23) < 0:
        raise ValueError("spring constants must be nonnegative")

    def close(x, y):
        return abs(x - y) <= rtol * max(abs(x), abs(y), 1e-300)

    hits = sum([
        close(m.m2 * nu13, m.m3 * nu12),
        close(m.m1 * nu23, m.m2 * nu13),
        close(m.m3 * nu12, m.m1 * nu23),
    ])
    if hits >= 2:
        return Superintegrability.MAXIMAL
    if hits == 1:
        return Superintegrability.MINIMAL
    return Superintegrability.GENERIC
