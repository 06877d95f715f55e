"""Exception types raised across the package."""


class SpringRodsError(Exception):
    """Base class for all package errors."""


class GeometryError(SpringRodsError):
    """Rod intervals or spring length are inconsistent."""


class SmallnessViolation(SpringRodsError):
    """Spring stiffness too large for the rod stiffnesses (uniqueness lost)."""


class ZeroElements(SpringRodsError):
    """A mesh was requested with fewer than one element on a rod."""


class SingularSystem(SpringRodsError):
    """A stiffness block failed to factorize; signals an assembly bug."""


class NoConsistentRegime(SpringRodsError):
    """Regime enumeration found no KKT-consistent candidate (non-convex input)."""


class NonPositiveLambda(SpringRodsError):
    """Penalty parameter must be strictly positive."""


class ContractionFailure(SpringRodsError):
    """Fixed-point step norms grew for several consecutive iterations."""


class InfeasibleCandidate(SpringRodsError):
    """Candidate handed to the residual check violates the gap constraint."""


class EmptyFeasibleGrid(SpringRodsError):
    """Brute-force grid contains no feasible point."""


class ParseError(SpringRodsError):
    """Configuration file could not be parsed; message carries line and key."""


class ValidationError(SpringRodsError):
    """Configuration values failed model validation."""
