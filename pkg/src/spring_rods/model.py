"""Domain types for the spring-rods system.

Two linear-elastic rods occupy [a, -l] and [l, b], fixed at the outer ends
and attached to a nonlinear spring of natural length 2l at the inner ends.
The spring pushes when compressed, pulls when extended, and the rod ends may
come into contact but never interpenetrate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import GeometryError, SmallnessViolation


@dataclass(frozen=True)
class Geometry:
    """Rod intervals [a, -l] and [l, b]; l is the spring half-length.

    Derived lengths: L1 = -l - a, L2 = b - l, L = max(L1, L2).
    """

    a: float
    b: float
    l: float

    def __post_init__(self):
        if not self.l > 0.0:
            raise GeometryError(f"spring half-length must be positive, got l={self.l}")
        if not self.a < -self.l:
            raise GeometryError(f"left rod is empty: need a < -l, got a={self.a}, l={self.l}")
        if not self.l < self.b:
            raise GeometryError(f"right rod is empty: need l < b, got b={self.b}, l={self.l}")

    @property
    def L1(self) -> float:
        return -self.l - self.a

    @property
    def L2(self) -> float:
        return self.b - self.l

    @property
    def L(self) -> float:
        return max(self.L1, self.L2)

    @property
    def natural_length(self) -> float:
        return 2.0 * self.l


@dataclass(frozen=True)
class Material:
    """Young moduli of the two rods."""

    E1: float
    E2: float

    def __post_init__(self):
        if not (self.E1 > 0.0 and self.E2 > 0.0):
            raise ValueError(f"Young moduli must be positive, got E1={self.E1}, E2={self.E2}")


@dataclass(frozen=True)
class SpringLaw:
    """Piecewise-linear spring response around the natural length.

    The force is -k1*(length - natural) in compression and -k2*(length -
    natural) in extension: positive (pushing) for short springs, negative
    (pulling) for long ones, zero at the natural length.  The Lipschitz
    constant of the response is max(k1, k2).
    """

    k1: float
    k2: float
    natural_length: float

    def __post_init__(self):
        if not (self.k1 > 0.0 and self.k2 > 0.0):
            raise ValueError(f"stiffnesses must be positive, got k1={self.k1}, k2={self.k2}")
        if not self.natural_length > 0.0:
            raise ValueError(f"natural length must be positive, got {self.natural_length}")

    @property
    def lipschitz(self) -> float:
        return max(self.k1, self.k2)

    def force(self, length: float) -> float:
        """Spring force at the given current length."""
        k = self.k1 if length < self.natural_length else self.k2
        return -k * (length - self.natural_length)

    def potential(self, length: float) -> float:
        """Convex stored energy; derivative equals minus the force."""
        k = self.k1 if length < self.natural_length else self.k2
        return 0.5 * k * (length - self.natural_length) ** 2

    def potential_slope(self, length: float) -> float:
        """Derivative of the stored energy (continuous across the natural length)."""
        k = self.k1 if length < self.natural_length else self.k2
        return k * (length - self.natural_length)


class PenaltyVariant(Enum):
    """Which side of the natural length the penalty term stiffens."""

    COMPRESSION_ONLY = "compression"
    EXTENSION_ONLY = "extension"
    TWO_SIDED = "two-sided"


@dataclass(frozen=True)
class PenaltyLaw:
    """Unit-stiffness penalty response used to enforce rigid limits.

    All variants are non-increasing with Lipschitz constant 1, non-negative
    below the natural length and non-positive above it.  They differ in
    where they vanish: COMPRESSION_ONLY on lengths >= natural,
    EXTENSION_ONLY on lengths <= natural, TWO_SIDED only at the natural
    length.
    """

    variant: PenaltyVariant
    natural_length: float

    def __post_init__(self):
        if not self.natural_length > 0.0:
            raise ValueError(f"natural length must be positive, got {self.natural_length}")

    @property
    def lipschitz(self) -> float:
        return 1.0

    def force(self, length: float) -> float:
        d = self.natural_length - length
        if self.variant is PenaltyVariant.COMPRESSION_ONLY:
            return d if length < self.natural_length else 0.0
        if self.variant is PenaltyVariant.EXTENSION_ONLY:
            return d if length >= self.natural_length else 0.0
        return d

    def potential(self, length: float) -> float:
        """Convex antiderivative with slope equal to minus the force."""
        d = length - self.natural_length
        if self.variant is PenaltyVariant.COMPRESSION_ONLY:
            return 0.5 * d * d if length < self.natural_length else 0.0
        if self.variant is PenaltyVariant.EXTENSION_ONLY:
            return 0.5 * d * d if length >= self.natural_length else 0.0
        return 0.5 * d * d


@dataclass(frozen=True)
class BodyForce:
    """Constant line-force densities on the two rods."""

    f1: float
    f2: float

    def __post_init__(self):
        if not (math.isfinite(self.f1) and math.isfinite(self.f2)):
            raise ValueError(f"force densities must be finite, got f1={self.f1}, f2={self.f2}")


class ConstraintVariant(Enum):
    """Admissible interval for the current spring length.

    NON_PENETRATION keeps only the contact bound (length >= 0); the rigid
    variants additionally pin the length at the natural value from one or
    both sides.
    """

    NON_PENETRATION = "non-penetration"
    RIGID_COMPRESSION = "rigid-compression"
    RIGID_EXTENSION = "rigid-extension"
    FULLY_RIGID = "fully-rigid"

    def bounds(self, l: float) -> tuple[float, float]:
        """Closed admissible interval (lo, hi) for the gap; hi may be inf."""
        n = 2.0 * l
        if self is ConstraintVariant.NON_PENETRATION:
            return (0.0, math.inf)
        if self is ConstraintVariant.RIGID_COMPRESSION:
            return (n, math.inf)
        if self is ConstraintVariant.RIGID_EXTENSION:
            return (0.0, n)
        return (n, n)


def spring_gap(l: float, g1: float, g2: float) -> float:
    """Current spring length 2l - g1 + g2 for inner-end displacements g1, g2."""
    return 2.0 * l - g1 + g2


@dataclass(frozen=True)
class ProblemSpec:
    """Validated equilibrium problem: geometry, materials, spring, loads, constraint.

    Construction enforces the uniqueness condition E1 + E2 > 2 * Lp * L
    (spring stiffness small against the rods), exposed through `stiffness_sum`
    and `coupling_bound`.
    """

    geometry: Geometry
    material: Material
    spring: SpringLaw
    forces: BodyForce
    variant: ConstraintVariant = ConstraintVariant.NON_PENETRATION
    stiffness_sum: float = field(init=False)
    coupling_bound: float = field(init=False)

    def __post_init__(self):
        if not math.isclose(self.spring.natural_length, self.geometry.natural_length,
                            rel_tol=0.0, abs_tol=1e-12):
            raise GeometryError(
                f"spring natural length {self.spring.natural_length} does not match "
                f"the geometric gap {self.geometry.natural_length}")
        m = self.material.E1 + self.material.E2
        alpha = 2.0 * self.spring.lipschitz * self.geometry.L
        if not m > alpha:
            raise SmallnessViolation(
                f"need E1 + E2 > 2*max(k1,k2)*L, got {m} <= {alpha}")
        object.__setattr__(self, "stiffness_sum", m)
        object.__setattr__(self, "coupling_bound", alpha)

    @property
    def contraction_ratio(self) -> float:
        return self.coupling_bound / self.stiffness_sum

    def gap_bounds(self) -> tuple[float, float]:
        return self.variant.bounds(self.geometry.l)


def make_problem(geometry: Geometry, material: Material, spring: SpringLaw,
                 forces: BodyForce, variant: ConstraintVariant) -> ProblemSpec:
    """Validate and assemble a ProblemSpec.

    Raises GeometryError for inconsistent intervals and SmallnessViolation
    when the spring is too stiff relative to the rods.
    """
    return ProblemSpec(geometry, material, spring, forces, variant)
