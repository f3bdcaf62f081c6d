"""Hamiltonian flows, Newton-form shape equations, canonical transforms
and integrators.

Integration runs through the compiled kernels (see ``kernels.py``); this
module owns state encoding, monitor extraction and error policy.  The
one-variable charts ('p', 'pm') are integrated in the regular radial
coordinate x = sqrt(P) internally, because the (P, P_P) momentum blows up
in finite time whenever P touches zero (every oscillator node); the
radial chart is canonically equivalent away from the node and extends
smoothly through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, metrics, potentials
from .errors import DegenerateMetric, RepresentationMismatch, SingularJacobian, StepFailure
from .geometry import MassTriple, UNIT_MASSES, geo_from_rho, geo_jacobian, rho_from_geo
from .hamiltonians import HamiltonianSpec, PhaseState, eval_H, rho_to_geo_state
from .metrics import DegeneracyClass, classify_degeneracy

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class IntegratorSpec:
    """Which stepper to use and how accurately."""

    method: str = "rk45"                 # rk45 | rk4 | implicit_midpoint
    rel_tol: float = DEFAULT_TOL
    abs_tol: float = DEFAULT_TOL
    step: float | None = None            # fixed-step methods
    max_steps: int = 200_000

    def __post_init__(self):
        if self.method not in ("rk45", "rk4", "implicit_midpoint"):
            raise ValueError(f"unknown integrator {self.method!r}")
        if self.method == "rk45" and not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.method in ("rk4", "implicit_midpoint") and not (self.step and self.step > 0):
            raise ValueError(f"{self.method} needs a positive fixed step")


@dataclass
class Trajectory:
    """Accepted integration samples plus per-sample monitor values."""

    rep: str
    t: np.ndarray
    y: np.ndarray                        # (n_samples, 2 * dof), chart coordinates
    monitors: dict = field(default_factory=dict)

    @property
    def q(self):
        return self.y[:, : self.y.shape[1] // 2]

    @property
    def p(self):
        return self.y[:, self.y.shape[1] // 2:]


# ---------------------------------------------------------------------------
# Kernel encoding
# ---------------------------------------------------------------------------

def _encode_potential(spec: HamiltonianSpec):
    """Map a potential spec to the kernel (kind, params) pair for the
    representation's chart; rejects what the chart cannot express."""
    pot = spec.potential
    rep = spec.rep
    if pot is None:
        return kernels.POT_NONE, np.zeros(1)
    if isinstance(pot, potentials.NewtonGravity):
        if rep in ("r", "rho", "cartesian"):
            return kernels.POT_NEWTON, np.array([pot.gamma])
        raise ValueError("gravity does not have closed-form gradients in the reduced charts")
    if isinstance(pot, potentials.LogGravity2D):
        return kernels.POT_LOG, np.array([pot.gamma])
    if isinstance(pot, potentials.HarmonicChain):
        coeff = pot.rho_coefficients
        if rep in ("r", "rho", "cartesian"):
            return kernels.POT_CHAIN, coeff
        if potentials.depends_on(pot) == "p":
            # equal springs: V = 2 c P, a pure P potential in the shape charts
            return kernels.POT_ANHARMONIC, np.array([2.0 * coeff[0], 0.0, 0.0])
        raise ValueError("an uneven harmonic chain does not factor through the shape chart")
    if isinstance(pot, potentials.Lemniscate):
        return kernels.POT_LEMNISCATE, np.zeros(1)
    if isinstance(pot, potentials.AnharmonicPS):
        if rep in ("volm", "pm"):
            # the mass charts scale the whole bracket, potential included
            return kernels.POT_VOLMASS_ANH, np.array([pot.A, pot.B, pot.C])
        return kernels.POT_ANHARMONIC, np.array([pot.A, pot.B, pot.C])
    if isinstance(pot, potentials.VolumeMass):
        if not isinstance(pot.inner, potentials.AnharmonicPS):
            raise ValueError("flows need a closed-form inner potential (AnharmonicPS)")
        if pot.masses != spec.masses:
            raise ValueError("VolumeMass masses must match the Hamiltonian masses in flows")
        return kernels.POT_VOLMASS_ANH, np.array([pot.inner.A, pot.inner.B, pot.inner.C])
    raise ValueError(f"potential {type(pot).__name__} has no kernel encoding")


_KERNEL_NAME = {"r": "r", "rho": "rho", "geo": "geo", "vol": "vol",
                "volm": "vol", "p": "ponly", "pm": "ponly"}


def _encode(spec: HamiltonianSpec):
    kind, params = _encode_potential(spec)
    rep = spec.rep
    if rep in ("r", "rho"):
        aux = np.array([spec.p_omega])
    elif rep in ("vol", "volm", "p", "pm"):
        aux = np.array([spec.mass_prefactor])
    else:
        aux = np.zeros(1)
    return _KERNEL_NAME[rep], spec.masses.as_array(), kind, params, aux


def _to_internal(spec: HamiltonianSpec, y: np.ndarray) -> np.ndarray:
    """Chart state -> kernel state (radial chart for the P-only flows)."""
    if spec.rep in ("p", "pm"):
        pval, pp = y
        if pval < 0:
            raise ValueError("P must be nonnegative")
        x = math.sqrt(pval)
        return np.array([x, 2.0 * x * pp])
    return np.asarray(y, dtype=float)


def _from_internal(spec: HamiltonianSpec, ys: np.ndarray) -> np.ndarray:
    if spec.rep in ("p", "pm"):
        x = ys[:, 0]
        px = ys[:, 1]
        q = x * x
        with np.errstate(divide="ignore", invalid="ignore"):
            pp = np.where(np.abs(x) > 1e-150, px / (2.0 * x), np.nan)
        return np.column_stack([q, pp])
    return ys


# ---------------------------------------------------------------------------
# Flow right-hand side and Newton form
# ---------------------------------------------------------------------------

def flow_rhs(spec: HamiltonianSpec, q, p):
    """(q_dot, p_dot) of Hamilton's equations in the spec's own chart.

    Needs no metric inversion, so it is regular through collinear and
    isosceles shapes; only the P-only charts keep a removable node at
    P = 0 (handled inside ``integrate`` by the radial chart).
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if spec.rep in ("p", "pm"):
        # H = c * 3 P P_P^2 + W(P) with W the prefactored chart potential
        c = spec.mass_prefactor
        kind, params = _encode_potential(spec)
        gp, _ = kernels.pot_grad_vol(q[0], 0.0, *spec.masses.as_array(), kind, params)
        return np.array([6.0 * c * q[0] * p[0]]), np.array([-(3.0 * c * p[0] * p[0] + gp)])
    name, m, kind, params, aux = _encode(spec)
    out = kernels.RHS_KERNELS[name](np.concatenate([q, p]), m, kind, params, aux)
    n = q.shape[0]
    return out[:n], out[n:]


def newton_rhs_geo(q, qdot, potential: potentials.PotentialSpec):
    """Second-order shape equations (P'', S'', T'') at (q, q_dot).

    Unlike the first-order flow these divide by the metric determinant, so
    degenerate shapes (isosceles, collinear, collision) are rejected.
    """
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    _require_geo_regular(q)
    spec = HamiltonianSpec("geo", UNIT_MASSES, potential)
    kind, params = _encode_potential(spec)
    out = kernels.rhs_newton_geo(np.concatenate([q, qdot]), np.ones(3), kind, params, np.zeros(1))
    return out[3:]


def _require_geo_regular(geo):
    p, s, t = geo
    d = float(metrics.det_cometric_geo(np.asarray(geo, dtype=float)))
    scale = max(p, abs(s) ** 0.5, abs(t) ** (1.0 / 3.0), 1e-300) ** 2
    if abs(d) < 1e-10 * scale ** 9:
        raise DegenerateMetric(f"geo metric degenerate at {tuple(geo)!r} (det={d:.3e})")


# ---------------------------------------------------------------------------
# Canonical transforms and momentum maps
# ---------------------------------------------------------------------------

def momentum_transform(from_rep: str, to_rep: str, state: PhaseState,
                       m: MassTriple = UNIT_MASSES) -> PhaseState:
    """Point-transformation of a phase state between charts.

    Momenta follow p_old = J^T p_new with J the Jacobian of the coordinate
    map, which preserves the energy exactly.  Supported: r <-> rho for any
    masses, rho <-> geo at unit masses (and r <-> geo by composition).
    """
    if state.rep != from_rep:
        raise RepresentationMismatch(f"state is {state.rep!r}, expected {from_rep!r}")
    if from_rep == to_rep:
        return state
    if from_rep == "r" and to_rep == "rho":
        r, p = state.q, state.p
        if np.any(r <= 0):
            raise SingularJacobian("r -> rho is singular at a binary collision")
        return PhaseState("rho", r * r, p / (2.0 * r))
    if from_rep == "rho" and to_rep == "r":
        rho, pp = state.q, state.p
        if np.any(rho <= 0):
            raise SingularJacobian("rho -> r is singular at a binary collision")
        r = np.sqrt(rho)
        return PhaseState("r", r, 2.0 * r * pp)
    if from_rep == "rho" and to_rep == "geo":
        if not m.is_unit:
            raise ValueError("the shape chart is defined at unit masses")
        return rho_to_geo_state(state.q, state.p)
    if from_rep == "geo" and to_rep == "rho":
        if not m.is_unit:
            raise ValueError("the shape chart is defined at unit masses")
        rho, _ = rho_from_geo(state.q)
        jac = geo_jacobian(rho)
        det = np.linalg.det(jac)
        scale = max(float(np.max(np.abs(rho))), 1e-300)
        if abs(det) < 1e-12 * scale ** 2:
            raise SingularJacobian(f"shape chart singular at rho={rho!r}")
        return PhaseState("rho", rho, jac.T @ state.p)
    if from_rep == "r" and to_rep == "geo":
        return momentum_transform("rho", "geo", momentum_transform("r", "rho", state, m), m)
    if from_rep == "geo" and to_rep == "r":
        return momentum_transform("rho", "r", momentum_transform("geo", "rho", state, m), m)
    raise ValueError(f"unsupported transform {from_rep!r} -> {to_rep!r}")


def velocities_from_momenta(rep: str, q, p, m: MassTriple = UNIT_MASSES,
                            p_omega: float = 0.0):
    """q_dot = dH/dp = 2 G(q) p (+ the angular cross-term in 'r'/'rho')."""
    spec = HamiltonianSpec(rep, m, None, p_omega)
    qdot, _ = flow_rhs(spec, q, p)
    return qdot


def momenta_from_velocities(rep: str, q, qdot, m: MassTriple = UNIT_MASSES,
                            p_omega: float = 0.0):
    """Invert q_dot = 2 G(q) p (+ angular term); fails on degenerate G."""
    from .hamiltonians import kinetic_matrix
    spec = HamiltonianSpec(rep, m, None, p_omega)
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float).copy()
    g = kinetic_matrix(spec, q)
    if p_omega != 0.0 and rep == "rho":
        from .hamiltonians import _angular_coefficients_rho
        from .geometry import area_sq_cayley_menger
        s = max(float(area_sq_cayley_menger(q)), 0.0)
        qdot -= (4.0 / 3.0) * p_omega * math.sqrt(s) * _angular_coefficients_rho(q, m)
    det = np.linalg.det(g)
    scale = float(np.mean(np.abs(np.diagonal(g)))) + 1e-300
    if abs(det) < 1e-12 * scale ** g.shape[0]:
        raise DegenerateMetric(f"kinetic matrix singular in {rep!r} at q={q!r}")
    return np.linalg.solve(g, qdot) / 2.0


def geo_pt_from_velocities(q, qdot) -> float:
    """Closed-form P_T as a function of shape velocities (row three of the
    inverted velocity map)."""
    p, s, t = q
    pd, sd, td = qdot
    d = float(metrics.det_cometric_geo(np.asarray(q, dtype=float)))
    return 3.0 * s / (2.0 * d) * (pd * (8.0 * s * (p * p + 4.0 * s) - 3.0 * p * t)
                                  + sd * (18.0 * t - 4.0 * p * (p * p + 4.0 * s))
                                  + td * (p * p - 12.0 * s))


def vol_ps_from_velocities(q, qdot) -> float:
    """Closed-form P_S of the two-variable chart, (2 Pdot S - P Sdot) /
    (2 S (12 S - P^2))."""
    p, s = q
    pd, sd = qdot
    return (2.0 * pd * s - p * sd) / (2.0 * s * (12.0 * s - p * p))


def r_momentum_printed(r, rdot, m: MassTriple) -> float:
    """The closed-form p12 of the distance chart, with its area-squared
    symbol read as the squared area (the reading that matches generic
    inversion; see the comparison test)."""
    r12, r23, r31 = r
    rd12, rd23, rd31 = rdot
    mu12, mu23, mu31 = m.mu
    q12, q23, q31 = r12 * r12, r23 * r23, r31 * r31
    i = mu12 * q12 + mu23 * q23 + mu31 * q31
    s = (2 * q12 * q23 + 2 * q12 * q31 + 2 * q23 * q31 - q12 ** 2 - q23 ** 2 - q31 ** 2) / 16.0
    term1 = 4.0 * q12 * ((mu12 * mu23 + mu12 * mu31 + mu23 * mu31) * q23 * q31
                         + 4.0 * mu12 ** 2 * s) * rd12
    term2 = r12 * r23 * (2.0 * (mu12 + mu23) * mu31 * (q12 + q23 - q31) * q31
                         + mu12 * mu23 * ((q12 - q23) ** 2 - q31 ** 2)) * rd23
    term3 = r12 * r31 * (2.0 * (mu12 + mu31) * mu23 * (q12 - q23 + q31) * q23
                         + mu12 * mu31 * ((q12 - q31) ** 2 - q23 ** 2)) * rd31
    return (term1 - term2 - term3) / (16.0 * i * s)


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

_STATUS_MSG = {
    kernels.STATUS_STEP_FAIL: "minimum step size reached",
    kernels.STATUS_MAX_STEPS: "step budget exhausted",
}


def _run_driver(spec: HamiltonianSpec, y0: np.ndarray, t0: float, t1: float,
                integ: IntegratorSpec):
    name, m, kind, params, aux = _encode(spec)
    driver = kernels.get_driver(integ.method, name)
    if integ.method == "rk45":
        ts, ys, status = driver(y0, t0, t1, integ.rel_tol, integ.abs_tol,
                                integ.max_steps, 0.0, m, kind, params, aux)
    else:
        ts, ys, status = driver(y0, t0, t1, integ.step, m, kind, params, aux)
    if status != kernels.STATUS_OK:
        raise StepFailure(f"{integ.method} on {spec.rep!r} failed at t={ts[-1]:.6g}: "
                          f"{_STATUS_MSG[status]}")
    return ts, ys


def integrate(spec: HamiltonianSpec, state0: PhaseState, t_span,
              integ: IntegratorSpec = IntegratorSpec(),
              monitors=("energy",)) -> Trajectory:
    """Integrate Hamilton's equations, sampling monitors at accepted steps.

    Flows are regular through collinear (and, in the shape chart,
    isosceles) configurations since the right-hand side needs no metric
    inverse; monitors that cannot be evaluated at a sample record NaN
    rather than aborting the run.
    """
    if state0.rep != spec.rep:
        raise RepresentationMismatch(f"state is {state0.rep!r}, spec is {spec.rep!r}")
    t0, t1 = float(t_span[0]), float(t_span[1])
    y0 = _to_internal(spec, state0.as_vector())
    ts, ys_internal, = None, None
    ts, ys_internal = _run_driver(spec, y0, t0, t1, integ)
    ys = _from_internal(spec, ys_internal)
    traj = Trajectory(rep=spec.rep, t=ts, y=ys)
    _attach_monitors(spec, traj, ys_internal, monitors)
    return traj


def _chart_potential_value(kind, params, c, pval):
    """Total P-only potential in the chart (prefactor included)."""
    if kind == kernels.POT_ANHARMONIC:
        return params[0] * pval + params[1] * pval * pval
    if kind == kernels.POT_VOLMASS_ANH:
        return c * (params[0] * pval + params[1] * pval * pval)
    return 0.0


def _energy_series(spec: HamiltonianSpec, ys_internal: np.ndarray) -> np.ndarray:
    if spec.rep in ("p", "pm"):
        # evaluate in the radial chart: finite also at the P = 0 nodes
        c = spec.mass_prefactor
        kind, params = _encode_potential(spec)
        x = ys_internal[:, 0]
        px = ys_internal[:, 1]
        return c * 0.75 * px * px + np.array(
            [_chart_potential_value(kind, params, c, xi * xi) for xi in x])
    n = ys_internal.shape[1] // 2
    vals = np.empty(ys_internal.shape[0])
    for i in range(ys_internal.shape[0]):
        vals[i] = eval_H(spec, PhaseState(spec.rep, ys_internal[i, :n], ys_internal[i, n:]))
    return vals


def _attach_monitors(spec: HamiltonianSpec, traj: Trajectory,
                     ys_internal: np.ndarray, monitors):
    for name in monitors:
        if name == "energy":
            traj.monitors["energy"] = _energy_series(spec, ys_internal)
        elif name == "P_T" and spec.rep == "geo":
            traj.monitors["P_T"] = traj.y[:, 5].copy()
        elif name == "P_S" and spec.rep in ("geo", "vol", "volm"):
            col = 4 if spec.rep == "geo" else 3
            traj.monitors["P_S"] = traj.y[:, col].copy()
        elif name == "degeneracy" and spec.rep in ("rho", "geo"):
            vals = []
            for i in range(traj.y.shape[0]):
                q = traj.y[i, :3]
                geo = geo_from_rho(q) if spec.rep == "rho" else q
                vals.append(classify_degeneracy(geo).value)
            traj.monitors["degeneracy"] = np.array(vals)
        else:
            raise ValueError(f"monitor {name!r} not available for {spec.rep!r}")


def energy_drift(traj: Trajectory) -> float:
    """Max relative deviation of the energy monitor from its initial value."""
    e = traj.monitors["energy"]
    scale = max(abs(e[0]), 1e-300)
    return float(np.max(np.abs(e - e[0])) / scale)


def invariant_manifold_monitor(traj: Trajectory, tagged: str = "P_T") -> float:
    """sup |tagged momentum| along the trajectory."""
    return float(np.max(np.abs(traj.monitors[tagged])))


def sample_flow(spec: HamiltonianSpec, state0: PhaseState, times,
                integ: IntegratorSpec = IntegratorSpec()) -> np.ndarray:
    """States at the requested times, by chaining exact-endpoint runs.

    Rows are chart states (q, p); the first row is the initial state.
    Adaptive runs clamp their final step onto each requested time, so no
    dense output is involved.
    """
    times = np.asarray(times, dtype=float)
    y = _to_internal(spec, state0.as_vector())
    out = np.empty((len(times), y.shape[0]))
    out[0] = y
    for i in range(len(times) - 1):
        _, ys = _run_driver(spec, out[i].copy(), times[i], times[i + 1], integ)
        out[i + 1] = ys[-1]
    return _from_internal(spec, out)


def integrate_newton_geo(q0, qdot0, potential, t_span,
                         integ: IntegratorSpec = IntegratorSpec()):
    """Integrate the second-order shape equations; returns (t, (q, qdot))."""
    spec = HamiltonianSpec("geo", UNIT_MASSES, potential)
    kind, params = _encode_potential(spec)
    y0 = np.concatenate([np.asarray(q0, float), np.asarray(qdot0, float)])
    driver = kernels.get_driver(integ.method, "newton_geo")
    if integ.method == "rk45":
        ts, ys, status = driver(y0, float(t_span[0]), float(t_span[1]), integ.rel_tol,
                                integ.abs_tol, integ.max_steps, 0.0,
                                np.ones(3), kind, params, np.zeros(1))
    else:
        ts, ys, status = driver(y0, float(t_span[0]), float(t_span[1]), integ.step,
                                np.ones(3), kind, params, np.zeros(1))
    if status != kernels.STATUS_OK:
        raise StepFailure(f"newton-geo integration failed at t={ts[-1]:.6g}: "
                          f"{_STATUS_MSG[status]}")
    return ts, ys


def sample_newton_geo(q0, qdot0, potential, times,
                      integ: IntegratorSpec = IntegratorSpec()) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    y = np.concatenate([np.asarray(q0, float), np.asarray(qdot0, float)])
    out = np.empty((len(times), 6))
    out[0] = y
    spec = HamiltonianSpec("geo", UNIT_MASSES, potential)
    kind, params = _encode_potential(spec)
    driver = kernels.get_driver(integ.method, "newton_geo")
    for i in range(len(times) - 1):
        if integ.method == "rk45":
            ts, ys, status = driver(out[i].copy(), times[i], times[i + 1], integ.rel_tol,
                                    integ.abs_tol, integ.max_steps, 0.0,
                                    np.ones(3), kind, params, np.zeros(1))
        else:
            ts, ys, status = driver(out[i].copy(), times[i], times[i + 1], integ.step,
                                    np.ones(3), kind, params, np.zeros(1))
        if status != kernels.STATUS_OK:
            raise StepFailure(f"newton-geo integration failed at t={ts[-1]:.6g}")
        out[i + 1] = ys[-1]
    return out
