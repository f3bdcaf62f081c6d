"""Ground-truth Cartesian three-body integrator in d >= 2 dimensions.

The oracle never touches the reduced Hamiltonians: it integrates plain
Newtonian accelerations for potentials V(rho_ij) and reduces trajectories
to the shape coordinates afterwards, so it can arbitrate every reduced
flow.  Zero-angular-momentum initial conditions are constructed from a
triangle plus prescribed squared-distance rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, potentials
from .dynamics import IntegratorSpec, _encode_potential
from .errors import Infeasible, StepFailure
from .geometry import MassTriple, UNIT_MASSES, geo_from_rho, modified_volume
from .hamiltonians import HamiltonianSpec

COM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CartesianState:
    """Positions and velocities of the three bodies in R^d."""

    x: np.ndarray          # (3, d)
    v: np.ndarray          # (3, d)

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if self.x.shape != self.v.shape or self.x.ndim != 2 or self.x.shape[0] != 3:
            raise ValueError("positions and velocities must both be (3, d)")
        if self.x.shape[1] < 2:
            raise ValueError("dimension must be at least 2")

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.x.ravel(), self.v.ravel()])

    def in_com_frame(self, m: MassTriple, tol: float = COM_TOL) -> bool:
        marr = m.as_array()
        scale = max(float(np.max(np.abs(self.x))), 1.0)
        vscale = max(float(np.max(np.abs(self.v))), 1.0)
        com = marr @ self.x / m.total
        mom = marr @ self.v
        return bool(np.all(np.abs(com) < tol * scale) and np.all(np.abs(mom) < tol * m.total * vscale))


def rho_of(x: np.ndarray) -> np.ndarray:
    """Squared mutual distances (12, 23, 31) of a position triple."""
    return np.array([
        float(np.sum((x[0] - x[1]) ** 2)),
        float(np.sum((x[1] - x[2]) ** 2)),
        float(np.sum((x[2] - x[0]) ** 2)),
    ])


def rho_rates(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """d rho_ij / dt = 2 (x_i - x_j) . (v_i - v_j)."""
    return np.array([
        2.0 * float((x[0] - x[1]) @ (v[0] - v[1])),
        2.0 * float((x[1] - x[2]) @ (v[1] - v[2])),
        2.0 * float((x[2] - x[0]) @ (v[2] - v[0])),
    ])


def angular_momentum(x: np.ndarray, v: np.ndarray, m: MassTriple) -> np.ndarray:
    """All d(d-1)/2 components L_ab, pairs in lexicographic order."""
    marr = m.as_array()
    d = x.shape[1]
    out = []
    for a in range(d):
        for b in range(a + 1, d):
            out.append(float(np.sum(marr * (x[:, a] * v[:, b] - x[:, b] * v[:, a]))))
    return np.array(out)


def cartesian_rhs(state: CartesianState, potential: potentials.PotentialSpec,
                  m: MassTriple) -> np.ndarray:
    """Accelerations a_i = -(1/m_i) sum_j 2 (x_i - x_j) dV/drho_ij."""
    spec = HamiltonianSpec("rho", m, potential)
    kind, params = _encode_potential(spec)
    out = kernels.rhs_cartesian(state.as_vector(), m.as_array(), kind, params,
                                np.array([float(state.d)]))
    return out[3 * state.d:].reshape(3, state.d)


def total_energy(state: CartesianState, potential: potentials.PotentialSpec,
                 m: MassTriple) -> float:
    kin = 0.5 * float(m.as_array() @ np.sum(state.v ** 2, axis=1))
    return kin + potentials.eval_potential(potential, rho_of(state.x), m)


def triangle_positions(rho, m: MassTriple, d: int = 2) -> np.ndarray:
    """Embed a triangle with squared sides rho in the first two axes.

    Convention: body 1 at the origin, body 2 on the positive x-axis,
    body 3 in the upper half plane; the result is shifted to the
    center-of-mass frame.  Deterministic and orientation-fixed.
    """
    rho = np.asarray(rho, dtype=float)
    r12 = math.sqrt(rho[0])
    if r12 == 0.0:
        raise Infeasible("triangle embedding needs r12 > 0")
    x3 = (rho[0] + rho[2] - rho[1]) / (2.0 * r12)
    y3sq = rho[2] - x3 * x3
    if y3sq < -1e-10 * max(rho.max(), 1e-300):
        raise Infeasible(f"rho={rho!r} violates the triangle inequality")
    y3 = math.sqrt(max(y3sq, 0.0))
    x = np.zeros((3, d))
    x[1, 0] = r12
    x[2, 0] = x3
    x[2, 1] = y3
    com = m.as_array() @ x / m.total
    return x - com


def zero_L_initial(rho0, rhodot0, m: MassTriple, d: int = 2) -> CartesianState:
    """Center-of-mass state with all angular momentum components zero and
    the prescribed squared-distance rates.

    The velocity system (momentum + angular momentum + rates) is solved by
    least squares; when it is underdetermined (d > 2 leaves out-of-plane
    freedom) the minimal-norm solution is taken, which is reproducible.
    """
    rho0 = np.asarray(rho0, dtype=float)
    rhodot0 = np.asarray(rhodot0, dtype=float)
    x = triangle_positions(rho0, m, d)
    marr = m.as_array()
    n = 3 * d
    rows, rhs = [], []
    for a in range(d):                      # total momentum
        row = np.zeros(n)
        for i in range(3):
            row[i * d + a] = marr[i]
        rows.append(row)
        rhs.append(0.0)
    for a in range(d):                      # angular momentum components
        for b in range(a + 1, d):
            row = np.zeros(n)
            for i in range(3):
                row[i * d + b] += marr[i] * x[i, a]
                row[i * d + a] -= marr[i] * x[i, b]
            rows.append(row)
            rhs.append(0.0)
    for k, (i, j) in enumerate([(0, 1), (1, 2), (2, 0)]):   # rho rates
        row = np.zeros(n)
        row[i * d:(i + 1) * d] = 2.0 * (x[i] - x[j])
        row[j * d:(j + 1) * d] = -2.0 * (x[i] - x[j])
        rows.append(row)
        rhs.append(rhodot0[k])
    a_mat = np.array(rows)
    b_vec = np.array(rhs)
    v, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
    resid = a_mat @ v - b_vec
    scale = max(float(np.max(np.abs(b_vec))), 1.0)
    if np.max(np.abs(resid)) > 1e-9 * scale:
        raise Infeasible(f"no zero-L velocities for rho={rho0!r}, rates={rhodot0!r} "
                         f"(residual {np.max(np.abs(resid)):.2e})")
    return CartesianState(x, v.reshape(3, d))


def integrate_oracle(state0: CartesianState, potential: potentials.PotentialSpec,
                     m: MassTriple, t_span, integ: IntegratorSpec = IntegratorSpec()):
    """Integrate Newton's equations; returns (t, flat states)."""
    spec = HamiltonianSpec("rho", m, potential)
    kind, params = _encode_potential(spec)
    aux = np.array([float(state0.d)])
    driver = kernels.get_driver(integ.method, "cartesian")
    if integ.method == "rk45":
        ts, ys, status = driver(state0.as_vector(), float(t_span[0]), float(t_span[1]),
                                integ.rel_tol, integ.abs_tol, integ.max_steps, 0.0,
                                m.as_array(), kind, params, aux)
    else:
        ts, ys, status = driver(state0.as_vector(), float(t_span[0]), float(t_span[1]),
                                integ.step, m.as_array(), kind, params, aux)
    if status != kernels.STATUS_OK:
        raise StepFailure(f"oracle integration failed at t={ts[-1]:.6g}")
    return ts, ys


def sample_oracle(state0: CartesianState, potential: potentials.PotentialSpec,
                  m: MassTriple, times, integ: IntegratorSpec = IntegratorSpec()):
    """Cartesian states at the requested times (chained exact-endpoint runs)."""
    times = np.asarray(times, dtype=float)
    y = state0.as_vector()
    out = np.empty((len(times), y.shape[0]))
    out[0] = y
    d = state0.d
    for i in range(len(times) - 1):
        st = CartesianState(out[i, :3 * d].reshape(3, d), out[i, 3 * d:].reshape(3, d))
        _, ys = integrate_oracle(st, potential, m, (times[i], times[i + 1]), integ)
        out[i + 1] = ys[-1]
    return out


@dataclass
class ReducedSeries:
    """Shape-coordinate time series reduced from a Cartesian trajectory."""

    t: np.ndarray
    rho: np.ndarray       # (n, 3)
    geo: np.ndarray       # (n, 3)
    pm_sm: np.ndarray     # (n, 2), mass-weighted pair
    L: np.ndarray         # (n, d(d-1)/2)
    E: np.ndarray         # (n,)


def reduce_trajectory(ts, ys, m: MassTriple, potential: potentials.PotentialSpec,
                      d: int) -> ReducedSeries:
    n = len(ts)
    rho = np.empty((n, 3))
    ncomp = d * (d - 1) // 2
    ll = np.empty((n, ncomp))
    ee = np.empty(n)
    for i in range(n):
        x = ys[i, :3 * d].reshape(3, d)
        v = ys[i, 3 * d:].reshape(3, d)
        rho[i] = rho_of(x)
        ll[i] = angular_momentum(x, v, m)
        kin = 0.5 * float(m.as_array() @ np.sum(v ** 2, axis=1))
        ee[i] = kin + potentials.eval_potential(potential, rho[i], m)
    geo = geo_from_rho(rho)
    pm_sm = modified_volume(rho, m)
    return ReducedSeries(t=np.asarray(ts), rho=rho, geo=geo, pm_sm=pm_sm, L=ll, E=ee)
