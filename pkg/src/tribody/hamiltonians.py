"""Reduced Hamiltonians of the three-body problem at and away from zero
total angular momentum.

Every kinetic energy is the plain quadratic form p^T G(q) p (no 1/2); the
explicit coefficient layouts pin this convention, e.g. the (P,S,T)
Hamiltonian carries 3 P P_P^2 against the metric entry g^PP = 3P.  The
flip side is that velocities are q_dot = 2 G p everywhere.

Representations: 'r', 'rho', 'geo', 'vol', 'volm', 'p', 'pm'.  The
angular-momentum parameter p_omega is honored only by 'r' and 'rho' (the
planar reduction); all other charts assume it vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics, potentials
from .errors import DegenerateModulus, RepresentationMismatch, SingularJacobian
from .geometry import (
    MassTriple,
    UNIT_MASSES,
    area_sq_cayley_menger,
    geo_from_rho,
    geo_jacobian,
)

REPRESENTATIONS = ("r", "rho", "geo", "vol", "volm", "p", "pm")
_DOF = {"r": 3, "rho": 3, "geo": 3, "vol": 2, "volm": 2, "p": 1, "pm": 1}


def dof(rep: str) -> int:
    return _DOF[rep]


@dataclass(frozen=True)
class HamiltonianSpec:
    """A reduced Hamiltonian: representation, masses, potential, p_omega."""

    rep: str
    masses: MassTriple = field(default=UNIT_MASSES)
    potential: potentials.PotentialSpec = None
    p_omega: float = 0.0

    def __post_init__(self):
        if self.rep not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.rep!r}")
        if self.p_omega != 0.0 and self.rep not in ("r", "rho"):
            raise ValueError("p_omega != 0 is only meaningful in the 'r' and 'rho' charts")
        if self.rep in ("geo", "vol", "p") and not self.masses.is_unit:
            raise ValueError(f"the {self.rep!r} chart is defined for unit masses; "
                             "use 'volm'/'pm' for arbitrary masses")

    @property
    def mass_prefactor(self) -> float:
        """Constant metric factor of the mass-weighted volume charts."""
        if self.rep in ("volm", "pm"):
            return self.masses.total / (3.0 * self.masses.product)
        return 1.0


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Coordinates and conjugate momenta in one representation."""

    rep: str
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        n = dof(self.rep)
        if self.q.shape != (n,) or self.p.shape != (n,):
            raise ValueError(f"{self.rep!r} state needs q, p of shape ({n},)")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])


def kinetic_matrix(spec: HamiltonianSpec, q) -> np.ndarray:
    """The cometric G(q) of the representation (the p^T G p form)."""
    q = np.asarray(q, dtype=float)
    if spec.rep == "r":
        return metrics.cometric_r(q, spec.masses)
    if spec.rep == "rho":
        return metrics.cometric_rho(q, spec.masses)
    if spec.rep == "geo":
        return metrics.cometric_geo(q)
    if spec.rep == "vol":
        return metrics.cometric_vol(q[0], q[1])
    if spec.rep == "volm":
        return metrics.cometric_vol_mass(q[0], q[1], spec.masses)
    if spec.rep == "p":
        return np.array([[3.0 * q[0]]])
    if spec.rep == "pm":
        return np.array([[3.0 * q[0] * spec.mass_prefactor]])
    raise RepresentationMismatch(spec.rep)


def kinetic_energy(spec: HamiltonianSpec, q, p) -> float:
    p = np.asarray(p, dtype=float)
    g = kinetic_matrix(spec, q)
    return float(p @ g @ p)


def potential_energy(spec: HamiltonianSpec, q) -> float:
    """Potential part in the spec's own chart (no p_omega terms)."""
    q = np.asarray(q, dtype=float)
    pot = spec.potential
    if pot is None:
        return 0.0
    if spec.rep == "r":
        return potentials.eval_potential(pot, q * q, spec.masses)
    if spec.rep == "rho":
        return potentials.eval_potential(pot, q, spec.masses)
    if spec.rep == "geo":
        return potentials.eval_potential_geo(pot, q)
    if spec.rep == "vol":
        return potentials.eval_potential_vol(pot, q[0], q[1])
    if spec.rep == "volm":
        return _volm_potential(spec, q[0], q[1])
    if spec.rep == "p":
        return potentials.eval_potential_vol(pot, q[0], 0.0)
    if spec.rep == "pm":
        return _volm_potential(spec, q[0], 0.0)
    raise RepresentationMismatch(spec.rep)


def _volm_potential(spec: HamiltonianSpec, pm: float, sm: float) -> float:
    """Mass-chart potential: the two-variable inner potential times the
    same constant prefactor that scales the kinetic block."""
    pot = spec.potential
    if isinstance(pot, potentials.VolumeMass):
        return potentials.eval_potential_vol(pot, pm, sm)
    return spec.mass_prefactor * potentials.eval_potential_vol(pot, pm, sm)


def eval_H(spec: HamiltonianSpec, state: PhaseState) -> float:
    """Total energy of a phase-space state."""
    if state.rep != spec.rep:
        raise RepresentationMismatch(f"state is {state.rep!r}, spec is {spec.rep!r}")
    h = kinetic_energy(spec, state.q, state.p) + potential_energy(spec, state.q)
    if spec.p_omega != 0.0:
        if spec.rep == "rho":
            h += _angular_terms_rho(state.q, state.p, spec.masses, spec.p_omega)
        elif spec.rep == "r":
            h += _angular_terms_r(state.q, state.p, spec.masses, spec.p_omega)
    return h


def _angular_coefficients_rho(rho, m: MassTriple) -> np.ndarray:
    """Coefficients of the momenta in the angular cross-term, as printed.

    The third entry is not the cyclic image of the first two; see
    ``angular_cyclic_report`` for the measured discrepancy.
    """
    a, b, c = rho
    return np.array([
        (m.m1 * c - m.m2 * b) / (m.m1 * m.m2 * b * c),
        (m.m2 * a - m.m3 * c) / (m.m2 * m.m3 * a * c),
        (m.m3 * b - m.m1 * a) / (m.m1 * m.m3 * b * c),
    ])


def _centrifugal_rho(rho, m: MassTriple) -> float:
    """The p_omega^2/9 bracket of the effective potential."""
    a, b, c = rho
    mp = m.pair
    return (1.0 / (mp[0] * a) + 1.0 / (mp[1] * b) + 1.0 / (mp[2] * c)
            - a / (2.0 * m.m3 * b * c) - b / (2.0 * m.m1 * a * c) - c / (2.0 * m.m2 * a * b))


def _angular_terms_rho(rho, p, m: MassTriple, p_omega: float) -> float:
    s = area_sq_cayley_menger(rho)
    s_delta = math.sqrt(max(s, 0.0))
    lin = float(_angular_coefficients_rho(rho, m) @ p)
    return (4.0 / 3.0) * p_omega * s_delta * lin + p_omega ** 2 / 9.0 * _centrifugal_rho(rho, m)


def _angular_terms_r(r, p, m: MassTriple, p_omega: float) -> float:
    r12, r23, r31 = r
    q12, q23, q31 = r12 * r12, r23 * r23, r31 * r31
    s = area_sq_cayley_menger(np.array([q12, q23, q31]))
    s_delta = math.sqrt(max(s, 0.0))
    lin = (p[0] * (m.m1 * q31 - m.m2 * q23) / (m.m1 * m.m2 * r12 * q23 * q31)
           + p[1] * (m.m2 * q12 - m.m3 * q31) / (m.m2 * m.m3 * r23 * q12 * q31)
           + p[2] * (m.m3 * q23 - m.m1 * q12) / (m.m1 * m.m3 * r31 * q23 * q31))
    return (2.0 / 3.0) * p_omega * s_delta * lin \
        + p_omega ** 2 / 9.0 * _centrifugal_rho(np.array([q12, q23, q31]), m)


def angular_cyclic_report(rho, m: MassTriple) -> dict:
    """Measure whether the printed third angular coefficient follows the
    cyclic label rule.  The printed denominator is m1 m3 rho23 rho31; the
    cyclic image of the second term would give m1 m3 rho12 rho23.  Both
    values are returned; downstream code uses the printed form.
    """
    a, b, c = np.asarray(rho, dtype=float)
    printed = (m.m3 * b - m.m1 * a) / (m.m1 * m.m3 * b * c)
    cyclic = (m.m3 * b - m.m1 * a) / (m.m1 * m.m3 * a * b)
    return {
        "printed": printed,
        "cyclic": cyclic,
        "consistent": bool(np.isclose(printed, cyclic, rtol=1e-12)),
    }


def eval_H_anharmonic_energy(A: float, B: float, k: float) -> float:
    """Closed-form energy of the sn^2 orbit of H = 3 P P_P^2 + A P + B P^2."""
    if B == 0.0:
        raise DegenerateModulus("B = 0 is the harmonic case; its energy is c1 * A")
    if abs(k) == 1.0:
        raise DegenerateModulus("|k| = 1 degenerates the elliptic modulus")
    return A * A * k * k / (B * (1.0 - k * k) ** 2)


# ---------------------------------------------------------------------------
# Cross-representation energy consistency
# ---------------------------------------------------------------------------

def rho_to_geo_state(q_rho, p_rho) -> PhaseState:
    """Push a rho-chart phase point to the shape chart (unit masses).

    Momenta follow the point-transformation rule p_rho = J^T p_geo with
    J = d(P,S,T)/d(rho); singular exactly on isosceles shapes.
    """
    q_rho = np.asarray(q_rho, dtype=float)
    jac = geo_jacobian(q_rho)
    det = np.linalg.det(jac)
    scale = max(float(np.max(np.abs(q_rho))), 1e-300)
    if abs(det) < 1e-12 * scale ** 2:
        raise SingularJacobian(f"shape chart is singular at rho={q_rho!r} (isosceles/degenerate)")
    p_geo = np.linalg.solve(jac.T, np.asarray(p_rho, dtype=float))
    return PhaseState("geo", geo_from_rho(q_rho), p_geo)


def consistency_check_representations(q_rho, p_rho, m: MassTriple,
                                      potential: potentials.PotentialSpec = None) -> dict:
    """Evaluate the same physical state in every applicable chart.

    Returns the energies and their maximum relative spread; the shape
    chart is attempted only at unit masses and is skipped (reported as
    such) where its Jacobian degenerates.
    """
    q_rho = np.asarray(q_rho, dtype=float)
    p_rho = np.asarray(p_rho, dtype=float)
    energies = {}
    h_rho = eval_H(HamiltonianSpec("rho", m, potential), PhaseState("rho", q_rho, p_rho))
    energies["rho"] = h_rho
    r = np.sqrt(q_rho)
    energies["r"] = eval_H(HamiltonianSpec("r", m, potential),
                           PhaseState("r", r, 2.0 * r * p_rho))
    geo_skipped = None
    if m.is_unit:
        try:
            state_geo = rho_to_geo_state(q_rho, p_rho)
            pot_geo = potential
            try:
                energies["geo"] = eval_H(HamiltonianSpec("geo", m, pot_geo), state_geo)
            except ValueError:
                # potential does not factor through (P,S,T); compare kinetic + rho-chart V
                energies["geo"] = (kinetic_energy(HamiltonianSpec("geo", m), state_geo.q, state_geo.p)
                                   + potentials.eval_potential(potential, q_rho, m))
        except SingularJacobian as exc:
            geo_skipped = str(exc)
    vals = np.array(list(energies.values()))
    scale = max(np.max(np.abs(vals)), 1e-300)
    report = {
        "energies": energies,
        "max_rel_spread": float((vals.max() - vals.min()) / scale),
        "geo_skipped": geo_skipped,
    }
    return report
