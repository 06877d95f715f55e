"""Equilibrium solvers for the condensed interface problem.

The discrete energy restricted to interior-minimized states is a convex,
piecewise-quadratic function of the interface pair (g1, g2): a quadratic
part plus the spring potential of the gap, subject to the gap bounds of the
constraint variant.  `solve_exact` enumerates the finitely many KKT regimes
and solves each by a direct 2x2 or bordered 3x3 system; the projected
gradient and fixed-point solvers are independent iterative cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (ContractionFailure, InfeasibleCandidate, NoConsistentRegime,
                     NonPositiveLambda)
from .fem import (DiscreteSystem, DofVector, ReducedSystem, build_mesh, assemble,
                  recover_full, schur_reduce, theta_of)
from .model import (ConstraintVariant, PenaltyLaw, PenaltyVariant, ProblemSpec,
                    SpringLaw)

#: Gradient of the gap with respect to (g1, g2).
_W = np.array([-1.0, 1.0])

#: Tolerance for accepting a KKT regime (gap bounds, multiplier signs).
_REGIME_TOL = 1e-9

#: Gap below this value counts as contact.
CONTACT_TOL = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    """Shared knobs for the iterative solvers."""

    tolerance: float = 1e-8
    max_iterations: int = 100_000
    backtracking: float = 0.5
    fixed_point_damping: float | None = None  # None: 1/(1 + Lp*C), see solve_qvi_fixed_point

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"need at least one iteration, got {self.max_iterations}")


@dataclass(frozen=True)
class SolverDiagnostics:
    method: str
    iterations: int
    residual: float
    regime: str
    converged: bool = True
    step_ratios: tuple[float, ...] = ()


@dataclass(frozen=True)
class EquilibriumSolution:
    """Nodal displacements plus the interface state of one equilibrium.

    theta is the gap (current spring length), s the common stress value at
    the inner rod ends.  When a gap bound is active, theta is reported as
    the exact bound value.
    """

    u: DofVector
    g1: float
    g2: float
    theta: float
    s: float
    contact: bool
    active_bound: str | None
    diagnostics: SolverDiagnostics


@dataclass(frozen=True)
class PenaltyProblem:
    """A base non-penetration problem stiffened by (1/lam) times a penalty law."""

    base: ProblemSpec
    law: PenaltyLaw
    lam: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise NonPositiveLambda(f"penalty parameter must be positive, got {self.lam}")
        if self.base.variant is not ConstraintVariant.NON_PENETRATION:
            raise ValueError("penalized problems are posed over the non-penetration set")


def effective_spring(spring: SpringLaw, law: PenaltyLaw, lam: float) -> SpringLaw:
    """Spring law whose potential equals the original plus the scaled penalty.

    The penalty potential is quadratic on the side(s) it acts on, so adding
    (1/lam) of it just raises the corresponding stiffness coefficient.
    """
    dk = 1.0 / lam
    k1 = spring.k1 + (dk if law.variant is not PenaltyVariant.EXTENSION_ONLY else 0.0)
    k2 = spring.k2 + (dk if law.variant is not PenaltyVariant.COMPRESSION_ONLY else 0.0)
    return SpringLaw(k1, k2, spring.natural_length)


# ---------------------------------------------------------------------------
# regime enumeration


def _bordered_solve(S: np.ndarray, rhs: np.ndarray, target: float) -> tuple[np.ndarray, float]:
    """Solve S g + mu W = rhs subject to W.g = target; returns (g, mu)."""
    M = np.zeros((3, 3))
    M[:2, :2] = S
    M[:2, 2] = _W
    M[2, :2] = _W
    sol = np.linalg.solve(M, np.array([rhs[0], rhs[1], target]))
    return sol[:2], float(sol[2])


def _rank_one_solve(S: np.ndarray, k: float, r: np.ndarray) -> np.ndarray:
    return np.linalg.solve(S + k * np.outer(_W, _W), r)


def _enumerate_regimes(reduced: ReducedSystem, spring: SpringLaw, lo: float, hi: float,
                       l: float):
    """First KKT-consistent candidate in a fixed preference order.

    Returns (g, theta, label, active_bound).  Convexity guarantees that any
    consistent candidate is the global minimizer, so ties at breakpoints or
    bounds only affect the label.
    """
    S, r = reduced.S, reduced.r
    two_l = 2.0 * l

    if lo == hi:
        g, _ = _bordered_solve(S, r - spring.potential_slope(lo) * _W, lo - two_l)
        return g, lo, "rigid", "both"

    # gradient zero exactly at the curvature breakpoint (the potential is C1)
    if lo - _REGIME_TOL <= two_l <= hi + _REGIME_TOL:
        g, mu = _bordered_solve(S, r, 0.0)
        if abs(mu) <= _REGIME_TOL:
            return g, two_l, "breakpoint", None

    if math.isfinite(lo):
        slope = spring.potential_slope(lo)
        g, mu = _bordered_solve(S, r - slope * _W, lo - two_l)
        if -mu >= -_REGIME_TOL:  # reaction multiplier is -mu at the lower bound
            label = "contact" if lo == 0.0 else "bound-lower"
            return g, lo, label, "lower"

    if math.isfinite(hi):
        slope = spring.potential_slope(hi)
        g, mu = _bordered_solve(S, r - slope * _W, hi - two_l)
        if mu >= -_REGIME_TOL:
            return g, hi, "bound-upper", "upper"

    for k, label, low_side in ((spring.k1, "compression", True), (spring.k2, "extension", False)):
        try:
            g = _rank_one_solve(S, k, r)
        except np.linalg.LinAlgError:
            continue
        theta = two_l + float(_W @ g)
        on_side = theta <= two_l + _REGIME_TOL if low_side else theta >= two_l - _REGIME_TOL
        if on_side and lo - _REGIME_TOL <= theta <= hi + _REGIME_TOL:
            return g, theta, label, None

    raise NoConsistentRegime(
        f"no consistent regime for bounds [{lo}, {hi}] with k1={spring.k1}, k2={spring.k2}")


def _kkt_residual(reduced: ReducedSystem, spring: SpringLaw, lo: float, hi: float,
                  g: np.ndarray, theta: float, active_bound: str | None) -> float:
    grad = reduced.gradient(g) + spring.potential_slope(theta) * _W
    feas = max(0.0, lo - theta) + max(0.0, theta - (hi if math.isfinite(hi) else theta))
    mu = float(grad @ _W) / 2.0
    tangential = float(np.max(np.abs(grad - mu * _W)))
    if active_bound == "lower":
        sign_violation = max(0.0, -mu)
    elif active_bound == "upper":
        sign_violation = max(0.0, mu)
    elif active_bound == "both":
        sign_violation = 0.0
    else:
        sign_violation = abs(mu)
    return max(tangential, sign_violation, feas)


def _classify(theta: float, lo: float, hi: float, two_l: float) -> tuple[str, str | None]:
    if lo == hi:
        return "rigid", "both"
    if math.isfinite(lo) and abs(theta - lo) <= 1e-11:
        return ("contact" if lo == 0.0 else "bound-lower"), "lower"
    if math.isfinite(hi) and abs(theta - hi) <= 1e-11:
        return "bound-upper", "upper"
    if abs(theta - two_l) <= 1e-11:
        return "breakpoint", None
    return ("compression" if theta < two_l else "extension"), None


def _finish(reduced: ReducedSystem, spring: SpringLaw, lo: float, hi: float, l: float,
            g: np.ndarray, theta: float, label: str, active_bound: str | None,
            method: str, iterations: int, converged: bool = True,
            step_ratios: tuple[float, ...] = ()) -> EquilibriumSolution:
    if math.isfinite(lo) and abs(theta - lo) <= 1e-11:
        theta = lo
    elif math.isfinite(hi) and abs(theta - hi) <= 1e-11:
        theta = hi
    s = float(reduced.gradient(g)[0])
    residual = _kkt_residual(reduced, spring, lo, hi, g, theta, active_bound)
    diag = SolverDiagnostics(method, iterations, residual, label, converged, step_ratios)
    u = recover_full(reduced, float(g[0]), float(g[1]))
    return EquilibriumSolution(u, float(g[0]), float(g[1]), theta, s,
                               theta <= CONTACT_TOL, active_bound, diag)


def solve_exact(reduced: ReducedSystem, spring: SpringLaw, variant: ConstraintVariant,
                l: float) -> EquilibriumSolution:
    """Global minimizer of the reduced convex energy by regime enumeration."""
    lo, hi = variant.bounds(l)
    g, theta, label, bound = _enumerate_regimes(reduced, spring, lo, hi, l)
    return _finish(reduced, spring, lo, hi, l, g, theta, label, bound, "exact", 0)


def solve_penalized(reduced: ReducedSystem, spring: SpringLaw,
                    penalty: PenaltyProblem) -> EquilibriumSolution:
    """Equilibrium with the penalty acting as extra stiffness of 1/lam.

    The penalized energy is the base energy plus (1/lam) times the penalty
    potential of the gap, minimized over the non-penetration set; its
    stationarity reproduces the penalized inequality because the penalty
    potential has slope equal to minus the penalty force.
    """
    l = penalty.base.geometry.l
    eff = effective_spring(spring, penalty.law, penalty.lam)
    lo, hi = ConstraintVariant.NON_PENETRATION.bounds(l)
    g, theta, label, bound = _enumerate_regimes(reduced, eff, lo, hi, l)
    return _finish(reduced, eff, lo, hi, l, g, theta, label, bound, "penalized", 0)


# ---------------------------------------------------------------------------
# projected gradient


def _project_gap(g: np.ndarray, lo: float, hi: float, two_l: float) -> np.ndarray:
    """Clamp the gap into [lo, hi] along the gap direction, rest unchanged."""
    theta = two_l + float(_W @ g)
    target = min(max(theta, lo), hi)
    if target != theta:
        g = g + 0.5 * (target - theta) * _W
    return g


def solve_projected_gradient(system: DiscreteSystem, spring: SpringLaw,
                             variant: ConstraintVariant,
                             penalty: PenaltyProblem | None = None,
                             config: SolverConfig | None = None) -> EquilibriumSolution:
    """Fixed-step projected gradient on the reduced two-DOF energy."""
    cfg = config or SolverConfig()
    reduced = schur_reduce(system)
    l = system.mesh.geometry.l
    two_l = 2.0 * l
    eff = spring if penalty is None else effective_spring(spring, penalty.law, penalty.lam)
    lo, hi = variant.bounds(l)

    def objective(g):
        return reduced.energy(g) + eff.potential(two_l + float(_W @ g))

    lip = float(np.linalg.eigvalsh(reduced.S)[-1]) + 2.0 * eff.lipschitz
    step = 1.0 / lip
    g = _project_gap(np.zeros(2), lo, hi, two_l)
    value = objective(g)
    iterations = 0
    converged = False
    while iterations < cfg.max_iterations:
        grad = reduced.gradient(g) + eff.potential_slope(two_l + float(_W @ g)) * _W
        trial_step = step
        for _ in range(60):  # descent safeguard; the fixed step already suffices
            g_new = _project_gap(g - trial_step * grad, lo, hi, two_l)
            new_value = objective(g_new)
            if new_value <= value + 1e-15:
                break
            trial_step *= cfg.backtracking
        delta = reduced.interface_vnorm(g_new - g)
        g, value = g_new, new_value
        iterations += 1
        if delta <= cfg.tolerance:
            converged = True
            break
    theta = two_l + float(_W @ g)
    label, bound = _classify(theta, lo, hi, two_l)
    return _finish(reduced, eff, lo, hi, l, g, theta, label, bound,
                   "projected-gradient", iterations, converged)


# ---------------------------------------------------------------------------
# fixed point on the frozen-gap problems


def _clamped_qp(S: np.ndarray, rhs: np.ndarray, lo: float, hi: float,
                two_l: float) -> np.ndarray:
    """Minimize the quadratic with load rhs over the gap bounds."""
    if lo == hi:
        g, _ = _bordered_solve(S, rhs, lo - two_l)
        return g
    g = np.linalg.solve(S, rhs)
    theta = two_l + float(_W @ g)
    if theta < lo:
        g, _ = _bordered_solve(S, rhs, lo - two_l)
    elif theta > hi:
        g, _ = _bordered_solve(S, rhs, hi - two_l)
    return g


def solve_qvi_fixed_point(system: DiscreteSystem, spring: SpringLaw,
                          variant: ConstraintVariant,
                          config: SolverConfig | None = None) -> EquilibriumSolution:
    """Outer iteration on the gap-frozen problems.

    Each inner problem replaces the spring potential by the affine work of
    the frozen spring force, i.e. a pure load change of +/- force on the two
    interface equations.  The inner solution depends on the outer state only
    through its gap, so damping is applied to the gap coordinate alone (full
    steps orthogonal to it are exact).  Undamped, the gap iteration has
    slope -Lp*C with C the interface compliance, which cycles once Lp*C
    reaches 1; the default damping 1/(1 + Lp*C) zeroes the within-regime
    slope and keeps observed step-norm ratios below the contraction
    estimate.
    """
    cfg = config or SolverConfig()
    reduced = schur_reduce(system)
    l = system.mesh.geometry.l
    two_l = 2.0 * l
    lo, hi = variant.bounds(l)
    sinv_w = np.linalg.solve(reduced.S, _W)
    compliance = float(_W @ sinv_w)
    gap_dir = sinv_w / compliance  # unit gap change along the compliant direction
    omega = cfg.fixed_point_damping
    if omega is None:
        omega = 1.0 / (1.0 + spring.lipschitz * compliance)

    eta = np.zeros(2)
    prev_step = None
    ratios: list[float] = []
    growth = 0
    iterations = 0
    converged = False
    while iterations < cfg.max_iterations:
        gap_eta = two_l + float(_W @ eta)
        force = spring.force(gap_eta)
        g = _clamped_qp(reduced.S, reduced.r + force * _W, lo, hi, two_l)
        gap_g = two_l + float(_W @ g)
        eta_new = g + (1.0 - omega) * (gap_eta - gap_g) * gap_dir
        step = reduced.interface_vnorm(eta_new - eta)
        iterations += 1
        if prev_step is not None and prev_step > 0.0:
            ratio = step / prev_step
            ratios.append(ratio)
            growth = growth + 1 if ratio > 1.0 + 1e-9 else 0
            if growth >= 3:
                raise ContractionFailure(
                    f"step norms grew for 3 iterations (last ratio {ratio:.3f})")
        eta = eta_new
        if step <= cfg.tolerance:
            converged = True
            break
        prev_step = step

    force = spring.force(two_l + float(_W @ eta))
    g = _clamped_qp(reduced.S, reduced.r + force * _W, lo, hi, two_l)
    theta = two_l + float(_W @ g)
    label, bound = _classify(theta, lo, hi, two_l)
    return _finish(reduced, spring, lo, hi, l, g, theta, label, bound,
                   "fixed-point", iterations, converged, tuple(ratios))


# ---------------------------------------------------------------------------
# inequality residual certificate


def vi_residual(system: DiscreteSystem, spring: SpringLaw, variant: ConstraintVariant,
                candidate: DofVector, trials: int = 1000, seed: int = 0) -> float:
    """Most negative value of the variational inequality over trial directions.

    For each feasible trial v the quantity (A u, v-u) + j(u,v) - j(u,u)
    - (f, v-u) is evaluated, with j the frozen-force gap work; a result
    above minus tolerance certifies the candidate.
    """
    mesh = system.mesh
    l = mesh.geometry.l
    lo, hi = variant.bounds(l)
    theta_u = theta_of(candidate, l)
    if theta_u < lo - 1e-9 or theta_u > hi + 1e-9:
        raise InfeasibleCandidate(f"gap {theta_u} outside [{lo}, {hi}]")

    force = spring.force(theta_u)
    au = system.apply(candidate)

    def value(v: DofVector) -> float:
        d = v - candidate
        elastic = float(au.rod1 @ d.rod1 + au.rod2 @ d.rod2)
        gap_work = -force * (theta_of(v, l) - theta_u)
        return elastic + gap_work - system.load_dot(d)

    def shifted(target: float) -> DofVector:
        rod2 = candidate.rod2.copy()
        rod2[0] += target - theta_u
        return DofVector(candidate.rod1.copy(), rod2)

    def clamp(v: DofVector) -> DofVector:
        t = theta_of(v, l)
        target = min(max(t, lo), hi)
        if target != t:
            rod2 = v.rod2.copy()
            rod2[0] += target - t
            return DofVector(v.rod1, rod2)
        return v

    probes = [shifted(lo)]
    if math.isfinite(hi):
        probes.append(shifted(hi))
    else:
        probes.append(shifted(theta_u + 1.0))
    if lo <= 2.0 * l <= hi:
        probes.append(shifted(2.0 * l))

    rng = np.random.default_rng(seed)
    for _ in range(trials):
        v = DofVector(candidate.rod1 + rng.normal(0.0, 0.5, mesh.n1),
                      candidate.rod2 + rng.normal(0.0, 0.5, mesh.n2))
        probes.append(clamp(v))

    return min(value(v) for v in probes)


# ---------------------------------------------------------------------------
# one-call front end


def solve(problem: ProblemSpec, mesh_sizes: tuple[int, int] = (4, 4),
          method: str = "exact", config: SolverConfig | None = None,
          penalty: PenaltyProblem | None = None) -> EquilibriumSolution:
    """Assemble, condense and solve one problem with the chosen method."""
    mesh = build_mesh(problem.geometry, *mesh_sizes)
    system = assemble(mesh, problem.material, problem.forces)
    if method == "exact":
        reduced = schur_reduce(system)
        if penalty is not None:
            return solve_penalized(reduced, problem.spring, penalty)
        return solve_exact(reduced, problem.spring, problem.variant, problem.geometry.l)
    if method == "gradient":
        return solve_projected_gradient(system, problem.spring, problem.variant,
                                        penalty, config)
    if method == "fixed-point":
        if penalty is not None:
            raise ValueError("the fixed-point solver does not take a penalty term")
        return solve_qvi_fixed_point(system, problem.spring, problem.variant, config)
    raise ValueError(f"unknown method {method!r}")
