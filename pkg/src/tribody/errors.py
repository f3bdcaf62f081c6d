"""Exception types shared across the package."""


class TribodyError(Exception):
    """Base class for all library errors."""


class NoPhysicalPreimage(TribodyError):
    """The shape invariants do not correspond to any real triangle."""


class BinaryCollision(TribodyError):
    """A mutual distance is zero where the representation is singular."""


class CollisionSingularity(TribodyError):
    """A potential was evaluated at a collision point where it diverges."""


class DegenerateMetric(TribodyError):
    """The kinetic-energy matrix is singular and cannot be inverted."""


class DegenerateQuartic(TribodyError):
    """The gravity quartic degenerates (vanishing leading coefficient)."""


class DegenerateModulus(TribodyError):
    """Elliptic modulus at a boundary value where the closed form breaks."""


class RepresentationMismatch(TribodyError):
    """A phase-space state was fed to a Hamiltonian of another representation."""


class SingularJacobian(TribodyError):
    """Coordinate change is not invertible at the requested point."""


class Infeasible(TribodyError):
    """A linear system of constraints has no solution."""


class StepFailure(TribodyError):
    """Adaptive integrator hit the minimum step size or step budget."""


class ConfigError(TribodyError):
    """Scenario configuration could not be parsed or validated."""
