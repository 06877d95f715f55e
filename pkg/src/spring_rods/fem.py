"""Piecewise-affine finite elements on the two rods.

Each rod gets a uniform mesh; the outer ends carry homogeneous Dirichlet
conditions, so the free unknowns are all remaining nodal displacements.  The
stiffness blocks are tridiagonal and the whole interface behaviour condenses
exactly onto the two inner-end displacements (g1, g2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .errors import SingularSystem, ZeroElements
from .model import BodyForce, Geometry, Material, spring_gap

_GAUSS2 = (-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0))


@dataclass(frozen=True)
class Mesh:
    """Uniform meshes of [a, -l] (n1 elements) and [l, b] (n2 elements)."""

    geometry: Geometry
    n1: int
    n2: int
    nodes1: np.ndarray
    nodes2: np.ndarray

    @property
    def h1(self) -> float:
        return self.geometry.L1 / self.n1

    @property
    def h2(self) -> float:
        return self.geometry.L2 / self.n2


def build_mesh(geometry: Geometry, n1: int, n2: int) -> Mesh:
    """Partition both rods uniformly; raises ZeroElements for empty meshes."""
    if n1 < 1 or n2 < 1:
        raise ZeroElements(f"need at least one element per rod, got n1={n1}, n2={n2}")
    nodes1 = np.linspace(geometry.a, -geometry.l, n1 + 1)
    nodes2 = np.linspace(geometry.l, geometry.b, n2 + 1)
    return Mesh(geometry, n1, n2, nodes1, nodes2)


@dataclass(frozen=True)
class DofVector:
    """Free nodal displacements: rod1 excludes x=a, rod2 excludes x=b.

    The inner-end values are g1 = rod1[-1] (at x=-l) and g2 = rod2[0]
    (at x=l); the clamped outer ends are implicitly zero.
    """

    rod1: np.ndarray
    rod2: np.ndarray

    @property
    def g1(self) -> float:
        return float(self.rod1[-1])

    @property
    def g2(self) -> float:
        return float(self.rod2[0])

    def __sub__(self, other: "DofVector") -> "DofVector":
        return DofVector(self.rod1 - other.rod1, self.rod2 - other.rod2)

    def __add__(self, other: "DofVector") -> "DofVector":
        return DofVector(self.rod1 + other.rod1, self.rod2 + other.rod2)


def zero_dofs(mesh: Mesh) -> DofVector:
    return DofVector(np.zeros(mesh.n1), np.zeros(mesh.n2))


def theta_of(dof: DofVector, l: float) -> float:
    """Current spring length for the discrete displacement field."""
    return spring_gap(l, dof.g1, dof.g2)


def _constant_load(n: int, h: float, f: float, interface_last: bool) -> np.ndarray:
    """Consistent load for constant density: f*h inside, f*h/2 at the free end."""
    b = np.full(n, f * h)
    b[-1 if interface_last else 0] = 0.5 * f * h
    return b


def _quadrature_load(nodes: np.ndarray, f, skip_first: bool) -> np.ndarray:
    """Two-point Gauss load for a callable density; drops the Dirichlet node."""
    n = len(nodes) - 1
    full = np.zeros(n + 1)
    for e in range(n):
        x0, x1 = nodes[e], nodes[e + 1]
        h = x1 - x0
        mid = 0.5 * (x0 + x1)
        for xi in _GAUSS2:
            x = mid + 0.5 * h * xi
            w = 0.5 * h
            full[e] += w * f(x) * (x1 - x) / h
            full[e + 1] += w * f(x) * (x - x0) / h
    return full[1:] if skip_first else full[:-1]


@dataclass(frozen=True)
class DiscreteSystem:
    """Assembled tridiagonal stiffness blocks and load vectors.

    diag/off arrays hold the main and first off-diagonal of each SPD block;
    the unit-coefficient blocks (Young modulus 1) induce the energy norm.
    """

    mesh: Mesh
    material: Material
    diag1: np.ndarray
    off1: np.ndarray
    diag2: np.ndarray
    off2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    @property
    def unit_diag1(self) -> np.ndarray:
        return self.diag1 / self.material.E1

    @property
    def unit_off1(self) -> np.ndarray:
        return self.off1 / self.material.E1

    @property
    def unit_diag2(self) -> np.ndarray:
        return self.diag2 / self.material.E2

    @property
    def unit_off2(self) -> np.ndarray:
        return self.off2 / self.material.E2

    def apply(self, dof: DofVector) -> DofVector:
        """Stiffness matvec (A1 u1, A2 u2)."""
        return DofVector(_tri_matvec(self.diag1, self.off1, dof.rod1),
                         _tri_matvec(self.diag2, self.off2, dof.rod2))

    def load_dot(self, dof: DofVector) -> float:
        return float(self.b1 @ dof.rod1 + self.b2 @ dof.rod2)

    def energy(self, dof: DofVector) -> float:
        """Quadratic part of the total energy: strain energy minus work."""
        au = self.apply(dof)
        return 0.5 * float(dof.rod1 @ au.rod1 + dof.rod2 @ au.rod2) - self.load_dot(dof)


def _tri_matvec(d: np.ndarray, e: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = d * u
    if len(e):
        out[:-1] += e * u[1:]
        out[1:] += e * u[:-1]
    return out


def _tri_solve(d: np.ndarray, e: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if len(d) == 0:
        return np.zeros(0)
    if len(d) == 1:
        return rhs / d
    ab = np.zeros((2, len(d)))
    ab[0, 1:] = e
    ab[1, :] = d
    try:
        return solveh_banded(ab, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD by construction
        raise SingularSystem(str(exc)) from exc


def _rod_blocks(n: int, h: float, E: float, interface_last: bool):
    d = np.full(n, 2.0 * E / h)
    d[-1 if interface_last else 0] = E / h
    e = np.full(n - 1, -E / h)
    return d, e


def assemble(mesh: Mesh, material: Material, forces) -> DiscreteSystem:
    """Build stiffness blocks and consistent loads.

    `forces` is either a BodyForce (constant densities, integrated exactly)
    or a pair of callables integrated with two-point Gauss per element.
    """
    d1, e1 = _rod_blocks(mesh.n1, mesh.h1, material.E1, interface_last=True)
    d2, e2 = _rod_blocks(mesh.n2, mesh.h2, material.E2, interface_last=False)
    if isinstance(forces, BodyForce):
        b1 = _constant_load(mesh.n1, mesh.h1, forces.f1, interface_last=True)
        b2 = _constant_load(mesh.n2, mesh.h2, forces.f2, interface_last=False)
    else:
        f1, f2 = forces
        b1 = _quadrature_load(mesh.nodes1, f1, skip_first=True)
        b2 = _quadrature_load(mesh.nodes2, f2, skip_first=False)
    return DiscreteSystem(mesh, material, d1, e1, d2, e2, b1, b2)


def v_norm(mesh: Mesh, dof: DofVector) -> float:
    """Energy norm: sqrt of the integral of the squared displacement gradient."""

    def rod(values: np.ndarray, h: float, clamp_first: bool) -> float:
        pad = np.concatenate(([0.0], values)) if clamp_first else np.concatenate((values, [0.0]))
        return float(np.sum(np.diff(pad) ** 2) / h)

    return np.sqrt(rod(dof.rod1, mesh.h1, clamp_first=True)
                   + rod(dof.rod2, mesh.h2, clamp_first=False))


@dataclass(frozen=True)
class ReducedSystem:
    """Exact condensation of the quadratic energy onto (g1, g2).

    With the interior unknowns minimized out, the energy equals
    0.5*g.S g - r.g + offset.  S_unit is the same condensation of the
    unit-coefficient blocks and measures the energy norm of interface
    differences (interior fields with equal loads cancel).
    """

    system: DiscreteSystem
    S: np.ndarray
    r: np.ndarray
    offset: float
    S_unit: np.ndarray

    def energy(self, g: np.ndarray) -> float:
        return 0.5 * float(g @ self.S @ g) - float(self.r @ g) + self.offset

    def gradient(self, g: np.ndarray) -> np.ndarray:
        return self.S @ g - self.r

    def interface_vnorm(self, dg: np.ndarray) -> float:
        """Energy norm of the harmonic field with interface jump dg."""
        return float(np.sqrt(dg @ self.S_unit @ dg))


def _condense(d: np.ndarray, e: np.ndarray, b: np.ndarray, interface_last: bool):
    """Schur complement of one rod block onto its interface DOF."""
    n = len(d)
    if n == 1:
        return float(d[0]), float(b[0]), 0.0
    if interface_last:
        di, ei, bi = d[:-1], e[:-1], b[:-1]
        coupling = np.zeros(n - 1)
        coupling[-1] = e[-1]
        dg, bg = d[-1], b[-1]
    else:
        di, ei, bi = d[1:], e[1:], b[1:]
        coupling = np.zeros(n - 1)
        coupling[0] = e[0]
        dg, bg = d[0], b[0]
    y = _tri_solve(di, ei, coupling)
    z = _tri_solve(di, ei, bi)
    s = float(dg - coupling @ y)
    r = float(bg - coupling @ z)
    offset = -0.5 * float(bi @ z)
    return s, r, offset


def schur_reduce(system: DiscreteSystem) -> ReducedSystem:
    """Condense both rods onto the interface pair (g1, g2)."""
    s1, r1, c1 = _condense(system.diag1, system.off1, system.b1, interface_last=True)
    s2, r2, c2 = _condense(system.diag2, system.off2, system.b2, interface_last=False)
    u1, _, _ = _condense(system.unit_diag1, system.unit_off1, np.zeros(system.mesh.n1),
                         interface_last=True)
    u2, _, _ = _condense(system.unit_diag2, system.unit_off2, np.zeros(system.mesh.n2),
                         interface_last=False)
    S = np.diag([s1, s2])
    if not (s1 > 0.0 and s2 > 0.0):  # pragma: no cover - SPD by construction
        raise SingularSystem(f"condensed stiffness not positive: {s1}, {s2}")
    return ReducedSystem(system, S, np.array([r1, r2]), c1 + c2, np.diag([u1, u2]))


def recover_full(reduced: ReducedSystem, g1: float, g2: float) -> DofVector:
    """Interior argmin of the energy for prescribed interface values."""
    sys_ = reduced.system

    def rod(d, e, b, g, interface_last):
        n = len(d)
        if n == 1:
            return np.array([g])
        if interface_last:
            rhs = b[:-1].copy()
            rhs[-1] -= e[-1] * g
            ui = _tri_solve(d[:-1], e[:-1], rhs)
            return np.concatenate((ui, [g]))
        rhs = b[1:].copy()
        rhs[0] -= e[0] * g
        ui = _tri_solve(d[1:], e[1:], rhs)
        return np.concatenate(([g], ui))

    return DofVector(rod(sys_.diag1, sys_.off1, sys_.b1, g1, True),
                     rod(sys_.diag2, sys_.off2, sys_.b2, g2, False))


def stress_field(mesh: Mesh, dof: DofVector, material: Material) -> tuple[np.ndarray, np.ndarray]:
    """Constant stress per element: E times the nodal difference over h."""
    u1 = np.concatenate(([0.0], dof.rod1))
    u2 = np.concatenate((dof.rod2, [0.0]))
    return (material.E1 * np.diff(u1) / mesh.h1,
            material.E2 * np.diff(u2) / mesh.h2)


def interface_stress(mesh: Mesh, dof: DofVector, material: Material,
                     forces: BodyForce) -> tuple[float, float]:
    """Stress traces at the inner rod ends.

    Element stresses are exact at midpoints; extrapolating to the end with
    the balance equation (stress rate = -density) removes the half-element
    offset, so for constant loads the traces are exact.
    """
    sig1, sig2 = stress_field(mesh, dof, material)
    return (float(sig1[-1]) - 0.5 * forces.f1 * mesh.h1,
            float(sig2[0]) + 0.5 * forces.f2 * mesh.h2)
