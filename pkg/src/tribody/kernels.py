"""Hot numeric kernels: flow right-hand sides and integrator drivers.

Everything here is written in a numba-compilable subset of numpy (scalar
math, fixed-size arrays, no Python objects).  ``backend.py`` compiles
these with ``@njit`` or exposes them as-is for the pure-numpy fallback;
user-facing code never imports this module directly.

Conventions:
  * edge basis (12, 23, 31);
  * kinetic energy is p^T G(q) p, so velocities are q_dot = 2 G p;
  * potentials are passed as an integer ``kind`` plus a parameter vector,
    with masses supplied separately.

State layouts: rho/r (q0 q1 q2 p0 p1 p2), geo (P S T P_P P_S P_T),
vol (P S P_P P_S), radial P-only chart (x p_x) with P = x^2,
cartesian (x flattened 3*d, v flattened 3*d),
newton-geo second order (P S T Pdot Sdot Tdot).

Backend selection: TRIBODY_BACKEND=numba (default when numba imports) or
TRIBODY_BACKEND=numpy for the pure-numpy fallback.  The two paths run the
same source; the benchmark CLI compares them in subprocesses.
"""

import os

import numpy as np

try:
    import numba
    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False

ACTIVE_BACKEND = os.environ.get("TRIBODY_BACKEND", "numba" if _HAVE_NUMBA else "numpy").lower()
if ACTIVE_BACKEND not in ("numba", "numpy"):
    raise ValueError(f"TRIBODY_BACKEND must be 'numba' or 'numpy', got {ACTIVE_BACKEND!r}")
if ACTIVE_BACKEND == "numba" and not _HAVE_NUMBA:
    ACTIVE_BACKEND = "numpy"

if ACTIVE_BACKEND == "numba":
    jit = numba.njit(cache=True)
    jit_nocache = numba.njit(cache=False)   # closures cannot be cached
else:
    def jit(func):
        return func

    jit_nocache = jit

SQRT3 = np.sqrt(3.0)

POT_NONE = 0
POT_NEWTON = 1       # params: [gamma]
POT_LOG = 2          # params: [gamma]
POT_CHAIN = 3        # params: [c12, c23, c31] coefficients of rho
POT_LEMNISCATE = 4   # params: []
POT_ANHARMONIC = 5   # params: [A, B, C];  V = A P + B P^2 + C S
POT_VOLMASS_ANH = 6  # params: [A, B, C];  V = M/(3 m1 m2 m3) * (A Pm + B Pm^2 + C Sm)

STATUS_OK = 0
STATUS_STEP_FAIL = 1
STATUS_MAX_STEPS = 2


@jit
def pot_value_rho(r0, r1, r2, m1, m2, m3, kind, params):
    if kind == POT_NONE:
        return 0.0
    if kind == POT_NEWTON:
        g = params[0]
        return -g * (r0 ** -0.5 + r1 ** -0.5 + r2 ** -0.5)
    if kind == POT_LOG:
        return 0.5 * params[0] * np.log(r0 * r1 * r2)
    if kind == POT_CHAIN:
        return params[0] * r0 + params[1] * r1 + params[2] * r2
    if kind == POT_LEMNISCATE:
        return 0.25 * np.log(r0 * r1 * r2) - SQRT3 / 24.0 * (r0 + r1 + r2)
    if kind == POT_ANHARMONIC:
        p = 0.5 * (r0 + r1 + r2)
        s = (2 * r0 * r1 + 2 * r0 * r2 + 2 * r1 * r2 - r0 * r0 - r1 * r1 - r2 * r2) / 16.0
        return params[0] * p + params[1] * p * p + params[2] * s
    if kind == POT_VOLMASS_ANH:
        mtot = m1 + m2 + m3
        prod = m1 * m2 * m3
        pm = 0.5 * (r0 / m3 + r1 / m1 + r2 / m2)
        s = (2 * r0 * r1 + 2 * r0 * r2 + 2 * r1 * r2 - r0 * r0 - r1 * r1 - r2 * r2) / 16.0
        sm = 3.0 * prod / mtot * s
        return mtot / (3.0 * prod) * (params[0] * pm + params[1] * pm * pm + params[2] * sm)
    return np.nan


@jit
def pot_grad_rho(r0, r1, r2, m1, m2, m3, kind, params):
    g0 = 0.0
    g1 = 0.0
    g2 = 0.0
    if kind == POT_NEWTON:
        g = params[0]
        g0 = 0.5 * g * r0 ** -1.5
        g1 = 0.5 * g * r1 ** -1.5
        g2 = 0.5 * g * r2 ** -1.5
    elif kind == POT_LOG:
        g = params[0]
        g0 = 0.5 * g / r0
        g1 = 0.5 * g / r1
        g2 = 0.5 * g / r2
    elif kind == POT_CHAIN:
        g0 = params[0]
        g1 = params[1]
        g2 = params[2]
    elif kind == POT_LEMNISCATE:
        g0 = 0.25 / r0 - SQRT3 / 24.0
        g1 = 0.25 / r1 - SQRT3 / 24.0
        g2 = 0.25 / r2 - SQRT3 / 24.0
    elif kind == POT_ANHARMONIC:
        p = 0.5 * (r0 + r1 + r2)
        vp = params[0] + 2.0 * params[1] * p
        c = params[2]
        g0 = 0.5 * vp + c * (r1 + r2 - r0) / 8.0
        g1 = 0.5 * vp + c * (r0 + r2 - r1) / 8.0
        g2 = 0.5 * vp + c * (r0 + r1 - r2) / 8.0
    elif kind == POT_VOLMASS_ANH:
        mtot = m1 + m2 + m3
        prod = m1 * m2 * m3
        pref = mtot / (3.0 * prod)
        pm = 0.5 * (r0 / m3 + r1 / m1 + r2 / m2)
        vp = params[0] + 2.0 * params[1] * pm
        cc = params[2] * 3.0 * prod / mtot
        g0 = pref * (0.5 * vp / m3 + cc * (r1 + r2 - r0) / 8.0)
        g1 = pref * (0.5 * vp / m1 + cc * (r0 + r2 - r1) / 8.0)
        g2 = pref * (0.5 * vp / m2 + cc * (r0 + r1 - r2) / 8.0)
    return g0, g1, g2


@jit
def pot_grad_geo(p, s, t, kind, params):
    """(dV/dP, dV/dS, dV/dT) for shape-chart potentials."""
    gp = 0.0
    gs = 0.0
    gt = 0.0
    if kind == POT_LOG:
        gt = 0.5 * params[0] / t
    elif kind == POT_LEMNISCATE:
        gp = -SQRT3 / 12.0
        gt = 0.25 / t
    elif kind == POT_ANHARMONIC:
        gp = params[0] + 2.0 * params[1] * p
        gs = params[2]
    return gp, gs, gt


@jit
def pot_grad_vol(p, s, m1, m2, m3, kind, params):
    gp = 0.0
    gs = 0.0
    if kind == POT_ANHARMONIC:
        gp = params[0] + 2.0 * params[1] * p
        gs = params[2]
    elif kind == POT_VOLMASS_ANH:
        pref = (m1 + m2 + m3) / (3.0 * m1 * m2 * m3)
        gp = pref * (params[0] + 2.0 * params[1] * p)
        gs = pref * params[2]
    return gp, gs


# ---------------------------------------------------------------------------
# Flow right-hand sides
# ---------------------------------------------------------------------------

@jit
def rhs_rho(y, m, kind, params, aux):
    """Squared-distance flow; aux = [p_omega]."""
    r0, r1, r2 = y[0], y[1], y[2]
    p0, p1, p2 = y[3], y[4], y[5]
    m1, m2, m3 = m[0], m[1], m[2]
    mp0 = m1 * m2 / (m1 + m2)
    mp1 = m2 * m3 / (m2 + m3)
    mp2 = m3 * m1 / (m3 + m1)
    pom = aux[0]

    out = np.empty(6)
    # velocities: 2 G p
    out[0] = 4.0 * r0 * p0 / mp0 + 2.0 * (r0 + r1 - r2) / m2 * p1 + 2.0 * (r0 + r2 - r1) / m1 * p2
    out[1] = 2.0 * (r0 + r1 - r2) / m2 * p0 + 4.0 * r1 * p1 / mp1 + 2.0 * (r1 + r2 - r0) / m3 * p2
    out[2] = 2.0 * (r0 + r2 - r1) / m1 * p0 + 2.0 * (r1 + r2 - r0) / m3 * p1 + 4.0 * r2 * p2 / mp2
    # -dH/dq, kinetic part
    g0, g1, g2 = pot_grad_rho(r0, r1, r2, m1, m2, m3, kind, params)
    out[3] = -(2.0 * p0 * p0 / mp0 + 2.0 * p0 * p2 / m1 + 2.0 * p0 * p1 / m2 - 2.0 * p1 * p2 / m3) - g0
    out[4] = -(2.0 * p1 * p1 / mp1 - 2.0 * p0 * p2 / m1 + 2.0 * p0 * p1 / m2 + 2.0 * p1 * p2 / m3) - g1
    out[5] = -(2.0 * p2 * p2 / mp2 + 2.0 * p0 * p2 / m1 - 2.0 * p0 * p1 / m2 + 2.0 * p1 * p2 / m3) - g2

    if pom != 0.0:
        s = (2 * r0 * r1 + 2 * r0 * r2 + 2 * r1 * r2 - r0 * r0 - r1 * r1 - r2 * r2) / 16.0
        sd = np.sqrt(s)
        # linear-in-momentum coefficients, as printed (third one is not the
        # cyclic image of the first two; kept verbatim)
        a0 = (m1 * r2 - m2 * r1) / (m1 * m2 * r1 * r2)
        a1 = (m2 * r0 - m3 * r2) / (m2 * m3 * r0 * r2)
        a2 = (m3 * r1 - m1 * r0) / (m1 * m3 * r1 * r2)
        k = 4.0 / 3.0 * pom
        out[0] += k * sd * a0
        out[1] += k * sd * a1
        out[2] += k * sd * a2
        lin = p0 * a0 + p1 * a1 + p2 * a2
        ds0 = (r1 + r2 - r0) / 8.0
        ds1 = (r0 + r2 - r1) / 8.0
        ds2 = (r0 + r1 - r2) / 8.0
        da0_d0 = 0.0
        da0_d1 = -1.0 / (m2 * r1 * r1)
        da0_d2 = 1.0 / (m1 * r2 * r2)
        da1_d0 = 1.0 / (m2 * r0 * r0)
        da1_d1 = 0.0
        da1_d2 = -1.0 / (m3 * r2 * r2)
        da2_d0 = -1.0 / (m3 * r1 * r2)
        da2_d1 = r0 / (m3 * r1 * r1 * r2)
        da2_d2 = -1.0 / (m1 * r2 * r2) + r0 / (m3 * r1 * r2 * r2)
        out[3] -= k * (ds0 / (2.0 * sd) * lin + sd * (p0 * da0_d0 + p1 * da1_d0 + p2 * da2_d0))
        out[4] -= k * (ds1 / (2.0 * sd) * lin + sd * (p0 * da0_d1 + p1 * da1_d1 + p2 * da2_d1))
        out[5] -= k * (ds2 / (2.0 * sd) * lin + sd * (p0 * da0_d2 + p1 * da1_d2 + p2 * da2_d2))
        # centrifugal part of the effective potential
        w = pom * pom / 9.0
        out[3] -= w * (-1.0 / (mp0 * r0 * r0) - 1.0 / (2 * m3 * r1 * r2)
                       + r1 / (2 * m1 * r0 * r0 * r2) + r2 / (2 * m2 * r0 * r0 * r1))
        out[4] -= w * (-1.0 / (mp1 * r1 * r1) + r0 / (2 * m3 * r1 * r1 * r2)
                       - 1.0 / (2 * m1 * r0 * r2) + r2 / (2 * m2 * r0 * r1 * r1))
        out[5] -= w * (-1.0 / (mp2 * r2 * r2) + r0 / (2 * m3 * r1 * r2 * r2)
                       + r1 / (2 * m1 * r0 * r2 * r2) - 1.0 / (2 * m2 * r0 * r1))
    return out


@jit
def rhs_r(y, m, kind, params, aux):
    """Mutual-distance flow, via exact conjugation with the rho flow
    (rho = r^2, P = p / (2 r) is canonical)."""
    z = np.empty(6)
    z[0] = y[0] * y[0]
    z[1] = y[1] * y[1]
    z[2] = y[2] * y[2]
    z[3] = y[3] / (2.0 * y[0])
    z[4] = y[4] / (2.0 * y[1])
    z[5] = y[5] / (2.0 * y[2])
    zd = rhs_rho(z, m, kind, params, aux)
    out = np.empty(6)
    out[0] = zd[0] / (2.0 * y[0])
    out[1] = zd[1] / (2.0 * y[1])
    out[2] = zd[2] / (2.0 * y[2])
    out[3] = 2.0 * out[0] * z[3] + 2.0 * y[0] * zd[3]
    out[4] = 2.0 * out[1] * z[4] + 2.0 * y[1] * zd[4]
    out[5] = 2.0 * out[2] * z[5] + 2.0 * y[2] * zd[5]
    return out


@jit
def rhs_geo(y, m, kind, params, aux):
    """Shape-chart flow (unit masses)."""
    p, s, t = y[0], y[1], y[2]
    pp, ps, pt = y[3], y[4], y[5]
    q = 4.0 * s + p * p
    gp, gs, gt = pot_grad_geo(p, s, t, kind, params)
    out = np.empty(6)
    out[0] = 6.0 * p * pp + 12.0 * s * ps + 18.0 * t * pt
    out[1] = 2.0 * p * s * ps + 12.0 * s * pp + 8.0 * s * q * pt
    out[2] = 8.0 * (12.0 * s + p * p) * t * pt + 18.0 * t * pp + 8.0 * s * q * ps
    out[3] = -(3.0 * pp * pp + s * ps * ps + 8.0 * p * t * pt * pt
               + 16.0 * s * p * pt * ps) - gp
    out[4] = -(p * ps * ps + 48.0 * t * pt * pt + 12.0 * pp * ps
               + (64.0 * s + 8.0 * p * p) * pt * ps) - gs
    out[5] = -(4.0 * (12.0 * s + p * p) * pt * pt + 18.0 * pp * pt) - gt
    return out


@jit
def rhs_vol(y, m, kind, params, aux):
    """Two-variable flow; aux = [c] with c the constant metric prefactor
    (1 at unit masses, M/(3 m1 m2 m3) for the mass-weighted chart)."""
    p, s = y[0], y[1]
    pp, ps = y[2], y[3]
    c = aux[0]
    gp, gs = pot_grad_vol(p, s, m[0], m[1], m[2], kind, params)
    out = np.empty(4)
    out[0] = c * (6.0 * p * pp + 12.0 * s * ps)
    out[1] = c * (2.0 * p * s * ps + 12.0 * s * pp)
    out[2] = -c * (3.0 * pp * pp + s * ps * ps) - gp
    out[3] = -c * (p * ps * ps + 12.0 * pp * ps) - gs
    return out


@jit
def rhs_ponly(y, m, kind, params, aux):
    """One-variable flow in the regular radial chart x = sqrt(P).

    H = c [ (3/4) p_x^2 + V(x^2) ]; the (P, P_P) chart momentum diverges
    where P touches zero, the x chart does not.  aux = [c].
    """
    x, px = y[0], y[1]
    c = aux[0]
    gp, gs = pot_grad_vol(x * x, 0.0, m[0], m[1], m[2], kind, params)
    out = np.empty(2)
    out[0] = c * 1.5 * px
    out[1] = -2.0 * x * gp   # gp already carries any constant prefactor
    return out


@jit
def rhs_cartesian(y, m, kind, params, aux):
    """Newtonian accelerations for three bodies in d dimensions; aux = [d]."""
    d = int(aux[0])
    n = 3 * d
    out = np.empty(2 * n)
    for i in range(n):
        out[i] = y[n + i]
    r0 = 0.0
    r1 = 0.0
    r2 = 0.0
    for a in range(d):
        d01 = y[0 * d + a] - y[1 * d + a]
        d12 = y[1 * d + a] - y[2 * d + a]
        d20 = y[2 * d + a] - y[0 * d + a]
        r0 += d01 * d01
        r1 += d12 * d12
        r2 += d20 * d20
    g0, g1, g2 = pot_grad_rho(r0, r1, r2, m[0], m[1], m[2], kind, params)
    for a in range(d):
        d01 = y[0 * d + a] - y[1 * d + a]
        d12 = y[1 * d + a] - y[2 * d + a]
        d20 = y[2 * d + a] - y[0 * d + a]
        f01 = 2.0 * d01 * g0
        f12 = 2.0 * d12 * g1
        f20 = 2.0 * d20 * g2
        out[n + 0 * d + a] = -(f01 - f20) / m[0]
        out[n + 1 * d + a] = -(f12 - f01) / m[1]
        out[n + 2 * d + a] = -(f20 - f12) / m[2]
    return out


@jit
def newton_geo_bracket_det(p, s, t):
    q = 4.0 * s + p * p
    bracket = 4.0 * p * t * (36.0 * s + p * p) - 16.0 * s * q * q - 27.0 * t * t
    return 3.0 * p * s * bracket


@jit
def rhs_newton_geo(y, m, kind, params, aux):
    """Second-order shape equations of motion (velocity form).

    These are the Newton equations induced by the shape-chart Hamiltonian;
    the PdotTdot coupling in the first equation carries the coefficient
    3 P T (a flow-consistency check pins the P factor).  Valid only where
    the metric determinant is nonzero.
    """
    p, s, t = y[0], y[1], y[2]
    pd, sd, td = y[3], y[4], y[5]
    q = 4.0 * s + p * p
    dgeo = newton_geo_bracket_det(p, s, t)
    gp, gs, gt = pot_grad_geo(p, s, t, kind, params)

    pdd = 1.5 / dgeo * (
        -4.0 * s * pd * pd * (4.0 * s * q * q - p * t * (12.0 * s + p * p))
        + 3.0 * sd * sd * t * (48.0 * s * p + 4.0 * p ** 3 - 27.0 * t)
        - 3.0 * s * td * td * (12.0 * s - p * p)
        - 12.0 * s * sd * pd * t * (24.0 * s - 2.0 * p * p)
        + td * (6.0 * s * pd * (8.0 * s * q - 3.0 * p * t)
                - 12.0 * s * sd * (8.0 * s * p + 2.0 * p ** 3 - 9.0 * t))
    ) - 6.0 * (3.0 * t * gt + 2.0 * s * gs + p * gp)

    sdd = 1.5 / (dgeo * p) * (
        sd * sd * (4.0 * p * t * (-72.0 * s * s + 30.0 * s * p * p + p ** 4)
                   - 16.0 * s * p * p * q * q + 27.0 * t * t * (6.0 * s - p * p))
        + 6.0 * s * s * td * td * (12.0 * s - p * p)
        + 8.0 * s * s * pd * pd * (4.0 * s * q * q - p * t * (12.0 * s + p * p))
        + 2.0 * s * sd * pd * (4.0 * t * (72.0 * s * s + 30.0 * s * p * p + p ** 4)
                               - 16.0 * s * p * q * q - 27.0 * p * t * t)
        + td * (24.0 * s * s * sd * (8.0 * s * p + 2.0 * p ** 3 - 9.0 * t)
                - 12.0 * s * s * pd * (8.0 * s * q - 3.0 * p * t))
    ) - 2.0 * s * (4.0 * q * gt + p * gs + 6.0 * gp)

    tdd = 1.5 / (dgeo * p) * (
        8.0 * s * pd * pd * t * (96.0 * s ** 3 - 48.0 * s * s * p * p
                                 + 14.0 * s * p ** 4 - 3.0 * p ** 3 * t)
        + sd * sd * t * (16.0 * p * p * (96.0 * s * s + 12.0 * s * p * p + p ** 4)
                         - 144.0 * p * t * (6.0 * s + p * p) + 243.0 * t * t)
        + s * td * td * (-192.0 * s * s * p + 12.0 * s * (8.0 * p ** 3 + 9.0 * t)
                         + 4.0 * p ** 5 - 45.0 * p * p * t)
        - 8.0 * s * sd * pd * t * (192.0 * s * s * p - 12.0 * s * (8.0 * p ** 3 + 9.0 * t)
                                   - 4.0 * p ** 5 + 45.0 * p * p * t)
        + td * (16.0 * s * pd * (32.0 * s ** 3 * p - 4.0 * s * s * (4.0 * p ** 3 + 9.0 * t)
                                 - 3.0 * s * p * p * (2.0 * p ** 3 - 5.0 * t) + p ** 4 * t)
                - 4.0 * s * sd * (-6.0 * p * t * (36.0 * s + 13.0 * p * p)
                                  + 8.0 * p * p * q * (12.0 * s + p * p) + 81.0 * t * t))
    ) - 2.0 * (4.0 * t * (12.0 * s + p * p) * gt + 4.0 * s * q * gs + 9.0 * t * gp)

    out = np.empty(6)
    out[0] = pd
    out[1] = sd
    out[2] = td
    out[3] = pdd
    out[4] = sdd
    out[5] = tdd
    return out


# ---------------------------------------------------------------------------
# Integrator drivers (factories close over a concrete rhs kernel)
# ---------------------------------------------------------------------------

def make_rk45(rhs):
    """Dormand-Prince 4(5) embedded pair with PI step control."""

    def rk45(y0, t0, t1, rtol, atol, max_steps, h0, m, kind, params, aux):
        n = y0.shape[0]
        ts = np.empty(max_steps + 1)
        ys = np.empty((max_steps + 1, n))
        ts[0] = t0
        ys[0] = y0
        span = t1 - t0
        h = h0 if h0 > 0.0 else span * 1e-3
        hmin = 1e-14 * max(abs(t0), abs(t1), 1.0)
        t = t0
        y = y0.copy()
        nacc = 0
        err_prev = 1.0
        k = np.empty((7, n))
        while t < t1:
            if h > t1 - t:
                h = t1 - t
            k[0] = rhs(y, m, kind, params, aux)
            k[1] = rhs(y + h * (0.2 * k[0]), m, kind, params, aux)
            k[2] = rhs(y + h * (3.0 / 40.0 * k[0] + 9.0 / 40.0 * k[1]), m, kind, params, aux)
            k[3] = rhs(y + h * (44.0 / 45.0 * k[0] - 56.0 / 15.0 * k[1] + 32.0 / 9.0 * k[2]),
                       m, kind, params, aux)
            k[4] = rhs(y + h * (19372.0 / 6561.0 * k[0] - 25360.0 / 2187.0 * k[1]
                                + 64448.0 / 6561.0 * k[2] - 212.0 / 729.0 * k[3]),
                       m, kind, params, aux)
            k[5] = rhs(y + h * (9017.0 / 3168.0 * k[0] - 355.0 / 33.0 * k[1]
                                + 46732.0 / 5247.0 * k[2] + 49.0 / 176.0 * k[3]
                                - 5103.0 / 18656.0 * k[4]), m, kind, params, aux)
            ynew = y + h * (35.0 / 384.0 * k[0] + 500.0 / 1113.0 * k[2] + 125.0 / 192.0 * k[3]
                            - 2187.0 / 6784.0 * k[4] + 11.0 / 84.0 * k[5])
            k[6] = rhs(ynew, m, kind, params, aux)
            errv = h * (71.0 / 57600.0 * k[0] - 71.0 / 16695.0 * k[2] + 71.0 / 1920.0 * k[3]
                        - 17253.0 / 339200.0 * k[4] + 22.0 / 525.0 * k[5] - 1.0 / 40.0 * k[6])
            err = 0.0
            bad = False
            for i in range(n):
                sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
                e = errv[i] / sc
                err += e * e
                if not np.isfinite(ynew[i]):
                    bad = True
            err = np.sqrt(err / n)
            if bad:
                err = 1e6
            if err <= 1.0:
                t = t + h
                y = ynew
                nacc += 1
                if nacc > max_steps:
                    return ts[:nacc], ys[:nacc], STATUS_MAX_STEPS
                ts[nacc] = t
                ys[nacc] = y
                fac = 0.9 * err ** -0.14 * err_prev ** 0.08 if err > 0.0 else 10.0
                if fac > 10.0:
                    fac = 10.0
                err_prev = max(err, 1e-10)
            else:
                fac = max(0.2, 0.9 * err ** -0.2)
            if fac < 0.2:
                fac = 0.2
            h = h * fac
            if h < hmin:
                return ts[:nacc + 1], ys[:nacc + 1], STATUS_STEP_FAIL
        return ts[:nacc + 1], ys[:nacc + 1], STATUS_OK

    return rk45


def make_rk4(rhs):
    """Classic fixed-step fourth-order Runge-Kutta."""

    def rk4(y0, t0, t1, h, m, kind, params, aux):
        nsteps = int(np.ceil((t1 - t0) / h))
        n = y0.shape[0]
        ts = np.empty(nsteps + 1)
        ys = np.empty((nsteps + 1, n))
        ts[0] = t0
        ys[0] = y0
        y = y0.copy()
        t = t0
        for i in range(nsteps):
            hh = min(h, t1 - t)
            k1 = rhs(y, m, kind, params, aux)
            k2 = rhs(y + 0.5 * hh * k1, m, kind, params, aux)
            k3 = rhs(y + 0.5 * hh * k2, m, kind, params, aux)
            k4 = rhs(y + hh * k3, m, kind, params, aux)
            y = y + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = t + hh
            ts[i + 1] = t
            ys[i + 1] = y
        return ts, ys, STATUS_OK

    return rk4


def make_implicit_midpoint(rhs):
    """Symplectic implicit midpoint with a damped-free Newton inner loop.

    Used for long-run drift checks on the non-separable Hamiltonians where
    no explicit splitting exists.  The Jacobian is forward-difference.
    """

    def midpoint(y0, t0, t1, h, m, kind, params, aux):
        nsteps = int(np.ceil((t1 - t0) / h))
        n = y0.shape[0]
        ts = np.empty(nsteps + 1)
        ys = np.empty((nsteps + 1, n))
        ts[0] = t0
        ys[0] = y0
        y = y0.copy()
        t = t0
        eye = np.eye(n)
        for i in range(nsteps):
            hh = min(h, t1 - t)
            f0 = rhs(y, m, kind, params, aux)
            ynew = y + hh * f0
            converged = False
            for _ in range(50):
                mid = 0.5 * (y + ynew)
                fm = rhs(mid, m, kind, params, aux)
                res = ynew - y - hh * fm
                rn = 0.0
                sc = 0.0
                for j in range(n):
                    rn += res[j] * res[j]
                    sc += ynew[j] * ynew[j]
                if np.sqrt(rn) < 1e-13 * (1.0 + np.sqrt(sc)):
                    converged = True
                    break
                jac = np.empty((n, n))
                for j in range(n):
                    dy = 1e-8 * (1.0 + abs(mid[j]))
                    pert = mid.copy()
                    pert[j] += dy
                    fp = rhs(pert, m, kind, params, aux)
                    for ii in range(n):
                        jac[ii, j] = (fp[ii] - fm[ii]) / dy
                a = eye - 0.5 * hh * jac
                ynew = ynew - np.linalg.solve(a, res)
            if not converged:
                return ts[:i + 1], ys[:i + 1], STATUS_STEP_FAIL
            y = ynew
            t = t + hh
            ts[i + 1] = t
            ys[i + 1] = y
        return ts, ys, STATUS_OK

    return midpoint


RHS_KERNELS = {
    "rho": rhs_rho,
    "r": rhs_r,
    "geo": rhs_geo,
    "vol": rhs_vol,
    "ponly": rhs_ponly,
    "cartesian": rhs_cartesian,
    "newton_geo": rhs_newton_geo,
}

_DRIVER_FACTORIES = {
    "rk45": make_rk45,
    "rk4": make_rk4,
    "implicit_midpoint": make_implicit_midpoint,
}

_drivers = {}


def get_driver(method, rhs_name):
    """A compiled (method, rhs) integrator pair, built on first use."""
    key = (method, rhs_name)
    if key not in _drivers:
        _drivers[key] = jit_nocache(_DRIVER_FACTORIES[method](RHS_KERNELS[rhs_name]))
    return _drivers[key]
