"""Reduced three-body dynamics in distance, squared-distance and
triangle-shape coordinates, with a Cartesian oracle and a verification
suite proving all representations produce identical trajectories."""

from .errors import (
    BinaryCollision,
    CollisionSingularity,
    ConfigError,
    DegenerateMetric,
    DegenerateModulus,
    DegenerateQuartic,
    Infeasible,
    NoPhysicalPreimage,
    RepresentationMismatch,
    SingularJacobian,
    StepFailure,
    TribodyError,
)
from .geometry import (
    MassTriple,
    UNIT_MASSES,
    area_sq_cayley_menger,
    geo_from_rho,
    modified_volume,
    moment_of_inertia,
    rho_from_geo,
    rho_from_r,
    rho_is_physical,
)
from .hamiltonians import HamiltonianSpec, PhaseState, eval_H
from .dynamics import IntegratorSpec, Trajectory, integrate, sample_flow
from .metrics import DegeneracyClass, classify_degeneracy
from .potentials import (
    AnharmonicPS,
    HarmonicChain,
    Lemniscate,
    LogGravity2D,
    NewtonGravity,
    ScaleFamily,
    VolumeMass,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
