"""Closed-form reference orbits and the figure-eight curve residual.

These are the independent solutions the integrators are checked against:
the trigonometric and elliptic orbits of the one-variable oscillator
family, and the elliptic curve traced by the squared area along the
Bernoulli-lemniscate choreography.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ellipj, ellipk

from .errors import DegenerateModulus

SQRT3 = math.sqrt(3.0)

# Invariant values of P and T on the lemniscate choreography, and the
# turning point of the squared area (positive root of 256 S^2 + 864 S - 243).
LEMNISCATE_P = 1.5 * SQRT3
LEMNISCATE_T = 1.5 * SQRT3
S_MAX = (9.0 * SQRT3 - 13.5) / 8.0


def harmonic_P(t, c1: float, c2: float, A: float):
    """P(t) = c1 cos^2(sqrt(3A) t + c2), the orbit of H = 3 P P_P^2 + A P."""
    if not (c1 > 0 and A > 0):
        raise ValueError("need c1 > 0 and A > 0")
    t = np.asarray(t, dtype=float)
    return c1 * np.cos(math.sqrt(3.0 * A) * t + c2) ** 2


def harmonic_energy(c1: float, A: float) -> float:
    return c1 * A


def jacobi_sn_imag(u, k: float):
    """sn(u, ik): the Jacobi sn with imaginary modulus, through the real
    transformation sn(u, ik) = sd(u sqrt(1+k^2), k/sqrt(1+k^2)) / sqrt(1+k^2).

    The identity is validated against an independent high-precision
    evaluator in the test suite before anything relies on it.
    """
    u = np.asarray(u, dtype=float)
    kp = math.sqrt(1.0 + k * k)
    m = k * k / (1.0 + k * k)
    sn, cn, dn, _ = ellipj(u * kp, m)
    return sn / dn / kp


def anharmonic_P(t, A: float, B: float, k: float):
    """The elliptic orbit of H = 3 P P_P^2 + A P + B P^2:
    P(t) = (A k^2 / (B (1 - k^2))) sn^2(y, ik), y = sqrt(3A/(1-k^2)) t.

    The sign freedom of y is immaterial since sn is odd.  Physical orbits
    (P >= 0) need a real modulus with |k| < 1.
    """
    if B == 0.0:
        raise DegenerateModulus("B = 0 is the harmonic case")
    if abs(k) >= 1.0:
        raise DegenerateModulus("physical elliptic orbits need |k| < 1")
    t = np.asarray(t, dtype=float)
    amp = A * k * k / (B * (1.0 - k * k))
    y = math.sqrt(3.0 * A / (1.0 - k * k)) * t
    return amp * jacobi_sn_imag(y, k) ** 2


def anharmonic_period(A: float, k: float) -> float:
    """Period of P(t) above: sn^2(., ik) has period 2 K(m) in its real
    transform variable."""
    if abs(k) >= 1.0:
        raise DegenerateModulus("physical elliptic orbits need |k| < 1")
    kp = math.sqrt(1.0 + k * k)
    m = k * k / (1.0 + k * k)
    lam = math.sqrt(3.0 * A / (1.0 - k * k))
    return 2.0 * float(ellipk(m)) / (kp * lam)


def weierstrass_residual(s, s_dot):
    """Left-hand side of the lemniscate curve equation
    S (256 S^2 + 864 S - 243) + 48 sqrt(3) Sdot^2."""
    s = np.asarray(s, dtype=float)
    s_dot = np.asarray(s_dot, dtype=float)
    return s * (256.0 * s * s + 864.0 * s - 243.0) + 48.0 * SQRT3 * s_dot * s_dot


def weierstrass_sdot_sq(s):
    """Sdot^2 along the curve (nonnegative on (0, S_MAX))."""
    s = np.asarray(s, dtype=float)
    return -s * (256.0 * s * s + 864.0 * s - 243.0) / (48.0 * SQRT3)


def weierstrass_sddot(s):
    """d^2S/dt^2 obtained by differentiating the curve equation."""
    s = np.asarray(s, dtype=float)
    return -(768.0 * s * s + 1728.0 * s - 243.0) / (96.0 * SQRT3)


def lemniscate_eqms_residuals(n_points: int = 20):
    """Consistency of the shape equations of motion with the curve.

    At P = T = 3 sqrt(3)/2, Pdot = Tdot = 0 and Sdot^2 from the curve, the
    second-order S equation driven by the choreography potential must
    reproduce the curve's own S-ddot.  Returns (S grid, relative errors).
    """
    from .dynamics import newton_rhs_geo
    from .potentials import Lemniscate

    ss = np.linspace(0.02, 0.98, n_points) * S_MAX
    errs = np.empty(n_points)
    for i, s in enumerate(ss):
        sdot = math.sqrt(float(weierstrass_sdot_sq(s)))
        q = np.array([LEMNISCATE_P, s, LEMNISCATE_T])
        qdot = np.array([0.0, sdot, 0.0])
        sddot = newton_rhs_geo(q, qdot, Lemniscate())[1]
        expect = float(weierstrass_sddot(s))
        errs[i] = abs(sddot - expect) / abs(expect)
    return ss, errs
