"""Exception taxonomy. The CLI maps each class to a stable exit code."""


class CmcIndexError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParseError(CmcIndexError):
    """Mesh or config file could not be parsed."""

    exit_code = 2


class NonManifold(CmcIndexError):
    """An edge with more than two faces, or a vertex whose face ring is not a single fan."""

    exit_code = 3


class NonOrientable(CmcIndexError):
    """Face windings cannot be made globally consistent."""

    exit_code = 3


class HasBoundary(CmcIndexError):
    """Operation requires a closed mesh."""

    exit_code = 3


class Disconnected(CmcIndexError):
    """Operation requires a connected mesh."""

    exit_code = 3


class DegenerateFace(CmcIndexError):
    """Face area below 1e-14 of the mean face area."""

    exit_code = 3


class ZeroNormal(CmcIndexError):
    """A vertex normal has (near-)zero length."""

    exit_code = 3


class NotUnit(CmcIndexError):
    """Vector expected to have unit norm."""

    exit_code = 4


class NotTangent(CmcIndexError):
    """Sphere3 normal not orthogonal to the base point."""

    exit_code = 4


class SingularLattice(CmcIndexError):
    """Torus lattice matrix is not invertible."""

    exit_code = 4


class DomainError(CmcIndexError):
    """Generator parameter outside its documented range."""

    exit_code = 4


class BadParameter(CmcIndexError):
    """Invalid CLI/config parameter or unknown config key."""

    exit_code = 4


class UnknownGenerator(CmcIndexError):
    """Zoo generator name not recognized."""

    exit_code = 4


class InsufficientNeighbors(CmcIndexError):
    """Shape-operator fit needs at least 5 distinct neighbor directions."""

    exit_code = 5


class KernelDimensionMismatch(CmcIndexError):
    """Computed harmonic space dimension differs from 2g."""

    exit_code = 6


class NotHarmonic(CmcIndexError):
    """Test field is not discretely harmonic (d or delta residual too large)."""

    exit_code = 6


class NotCompactlySupported(CmcIndexError):
    """Cut-off function does not vanish on the boundary and its 1-ring."""

    exit_code = 6


class SolverFailure(CmcIndexError):
    """Eigen/linear solver failed to converge or produced inconsistent results."""

    exit_code = 7


class BoundViolation(CmcIndexError):
    """Certified negative count fell below the required genus bound."""

    exit_code = 8
