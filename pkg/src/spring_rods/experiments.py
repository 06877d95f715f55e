"""Stiffness sweeps, penalty-convergence studies and their CSV/SVG outputs."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .fem import Mesh, assemble, build_mesh, schur_reduce, v_norm
from .model import (BodyForce, ConstraintVariant, PenaltyLaw, PenaltyVariant,
                    ProblemSpec, SpringLaw)
from .solver import EquilibriumSolution, PenaltyProblem, solve_exact, solve_penalized

#: Limit problem enforced by each penalty variant as the parameter vanishes.
LIMIT_VARIANT = {
    PenaltyVariant.COMPRESSION_ONLY: ConstraintVariant.RIGID_COMPRESSION,
    PenaltyVariant.EXTENSION_ONLY: ConstraintVariant.RIGID_EXTENSION,
    PenaltyVariant.TWO_SIDED: ConstraintVariant.FULLY_RIGID,
}


@dataclass(frozen=True)
class SweepRecord:
    k: float
    g1: float
    g2: float
    theta: float
    s: float
    contact: bool
    energy: float


@dataclass(frozen=True)
class SweepResult:
    """One solve per stiffness value, plus monotonicity diagnostics."""

    records: tuple[SweepRecord, ...]
    variant: ConstraintVariant
    forces: BodyForce
    failures: tuple[tuple[float, str], ...] = ()

    @property
    def abs_g1_decreasing(self) -> bool:
        g = [abs(r.g1) for r in self.records]
        return all(b < a for a, b in zip(g, g[1:]))

    @property
    def abs_s_increasing(self) -> bool:
        s = [abs(r.s) for r in self.records]
        return all(b > a for a, b in zip(s, s[1:]))


@dataclass(frozen=True)
class ConvergenceRecord:
    n: int
    lam: float
    theta: float
    g1: float
    g2: float
    error: float


@dataclass(frozen=True)
class ConvergenceStudy:
    records: tuple[ConvergenceRecord, ...]
    limit_variant: ConstraintVariant
    limit: EquilibriumSolution
    non_convergence: bool


def _mesh_of(problem: ProblemSpec, mesh) -> Mesh:
    if isinstance(mesh, Mesh):
        return mesh
    n1, n2 = mesh
    return build_mesh(problem.geometry, n1, n2)


def run_stiffness_sweep(base: ProblemSpec, forces: BodyForce, grid: Sequence[float],
                        mesh=(4, 4), jobs: int = 1) -> SweepResult:
    """Solve once per stiffness value k (k1 = k2 = k) over a fixed mesh.

    The assembled system is stiffness-independent, so assembly and
    condensation happen once.  Failing grid points are recorded, not fatal.
    """
    ks = list(grid)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("stiffness grid must be strictly increasing")
    m = _mesh_of(base, mesh)
    reduced = schur_reduce(assemble(m, base.material, forces))
    l = base.geometry.l

    def solve_point(k: float):
        spring = SpringLaw(k, k, 2.0 * l)
        # constructing the spec enforces the admissible-stiffness condition
        ProblemSpec(base.geometry, base.material, spring, forces, base.variant)
        sol = solve_exact(reduced, spring, base.variant, l)
        g = np.array([sol.g1, sol.g2])
        energy = reduced.energy(g) + spring.potential(sol.theta)
        return SweepRecord(k, sol.g1, sol.g2, sol.theta, sol.s, sol.contact, energy)

    records: list[SweepRecord] = []
    failures: list[tuple[float, str]] = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_guarded(solve_point), ks))
    else:
        outcomes = [_guarded(solve_point)(k) for k in ks]
    for k, outcome in zip(ks, outcomes):
        if isinstance(outcome, SweepRecord):
            records.append(outcome)
        else:
            failures.append((k, outcome))
    return SweepResult(tuple(records), base.variant, forces, tuple(failures))


def _guarded(fn):
    def wrapped(k):
        try:
            return fn(k)
        except Exception as exc:
            return f"{type(exc).__name__}: {exc}"

    return wrapped


def run_penalty_convergence(base: ProblemSpec, penalty_variant: PenaltyVariant,
                            n_range: Sequence[int] = range(1, 13),
                            mesh=(4, 4)) -> ConvergenceStudy:
    """Solve the penalized problems along lambda_n = 2**(3-n) and the rigid limit.

    The error is the energy norm of the difference between each penalized
    field and the limit-problem field.  A non-convergence flag is raised
    when the error stops decreasing over the last three records (which is
    expected when the load never activates the penalized side).
    """
    m = _mesh_of(base, mesh)
    reduced = schur_reduce(assemble(m, base.material, base.forces))
    l = base.geometry.l
    base_np = base if base.variant is ConstraintVariant.NON_PENETRATION else replace(
        base, variant=ConstraintVariant.NON_PENETRATION)
    law = PenaltyLaw(penalty_variant, 2.0 * l)
    limit_variant = LIMIT_VARIANT[penalty_variant]
    limit = solve_exact(reduced, base.spring, limit_variant, l)

    records = []
    for n in n_range:
        lam = 2.0 ** (3 - n)
        sol = solve_penalized(reduced, base.spring, PenaltyProblem(base_np, law, lam))
        err = v_norm(m, sol.u - limit.u)
        records.append(ConvergenceRecord(n, lam, sol.theta, sol.g1, sol.g2, err))

    errs = [r.error for r in records]
    stalled = len(errs) >= 3 and not any(
        b <= a - 1e-15 for a, b in zip(errs[-3:], errs[-2:]))
    return ConvergenceStudy(tuple(records), limit_variant, limit, stalled)


# ---------------------------------------------------------------------------
# tabular and graphical output

_SWEEP_HEADER = "k,g1,g2,theta,s,contact,energy"
_CONV_HEADER = "n,lambda,theta,g1,g2,error_vnorm"


def _fmt(x: float) -> str:
    return f"{x:.11e}"


def export_csv(result, path) -> Path:
    """Write a sweep or convergence table; 12 significant digits per value."""
    path = Path(path)
    if isinstance(result, SweepResult):
        if not result.records:
            raise ValueError("refusing to write an empty sweep")
        lines = [_SWEEP_HEADER]
        for r in result.records:
            lines.append(",".join([_fmt(r.k), _fmt(r.g1), _fmt(r.g2), _fmt(r.theta),
                                   _fmt(r.s), "true" if r.contact else "false",
                                   _fmt(r.energy)]))
    elif isinstance(result, ConvergenceStudy):
        if not result.records:
            raise ValueError("refusing to write an empty convergence study")
        lines = [_CONV_HEADER]
        for r in result.records:
            lines.append(",".join([str(r.n), _fmt(r.lam), _fmt(r.theta),
                                   _fmt(r.g1), _fmt(r.g2), _fmt(r.error)]))
    else:
        raise TypeError(f"cannot export {type(result).__name__}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


_SWEEP_PANELS = {
    "displacements": ("stiffness k", "end displacement",
                      [("g1", lambda r: r.g1), ("g2", lambda r: r.g2)]),
    "stress": ("stiffness k", "interface stress",
               [("s", lambda r: r.s)]),
    "gap": ("stiffness k", "spring length",
            [("theta", lambda r: r.theta)]),
}

_CONV_PANELS = {
    "error": ("n", "log10 error", [("log10(error_vnorm)", None)]),
    "gap": ("n", "spring length", [("theta", lambda r: r.theta)]),
}


def export_svg(result, path, panel: str) -> Path:
    """Write one standalone SVG chart with a polyline per series."""
    path = Path(path)
    if isinstance(result, SweepResult):
        if not result.records:
            raise ValueError("refusing to plot an empty sweep")
        try:
            xlabel, ylabel, series_spec = _SWEEP_PANELS[panel]
        except KeyError:
            raise ValueError(f"unknown sweep panel {panel!r}") from None
        xs = [r.k for r in result.records]
        series = [(name, xs, [pick(r) for r in result.records])
                  for name, pick in series_spec]
    elif isinstance(result, ConvergenceStudy):
        if not result.records:
            raise ValueError("refusing to plot an empty convergence study")
        if panel not in _CONV_PANELS:
            raise ValueError(f"unknown convergence panel {panel!r}")
        xlabel, ylabel, series_spec = _CONV_PANELS[panel]
        xs = [float(r.n) for r in result.records]
        if panel == "error":
            ys = [math.log10(max(r.error, 1e-16)) for r in result.records]
            series = [("log10(error_vnorm)", xs, ys)]
        else:
            name, pick = series_spec[0]
            series = [(name, xs, [pick(r) for r in result.records])]
    else:
        raise TypeError(f"cannot plot {type(result).__name__}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_svg_chart(series, xlabel, ylabel), encoding="ascii")
    return path


_SVG_W, _SVG_H = 640, 480
_ML, _MR, _MT, _MB = 70, 110, 20, 50
_COLORS = ("#1f6fb4", "#c8452c", "#3a8c3f")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _svg_chart(series, xlabel: str, ylabel: str) -> str:
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    xmin, xmax = min(xs_all), max(xs_all)
    ymin, ymax = min(ys_all), max(ys_all)
    if xmax - xmin < 1e-300:
        xmin, xmax = xmin - 0.5, xmax + 0.5
    if ymax - ymin < 1e-300:
        ymin, ymax = ymin - 0.5, ymax + 0.5

    def px(x: float) -> float:
        return _ML + (x - xmin) / (xmax - xmin) * (_SVG_W - _ML - _MR)

    def py(y: float) -> float:
        return _SVG_H - _MB - (y - ymin) / (ymax - ymin) * (_SVG_H - _MT - _MB)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_SVG_W}" height="{_SVG_H}" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_SVG_H - _MB}" x2="{_SVG_W - _MR}" y2="{_SVG_H - _MB}" '
        'stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_SVG_H - _MB}" stroke="black"/>',
    ]
    for t in _ticks(xmin, xmax):
        out.append(f'<line x1="{px(t):.2f}" y1="{_SVG_H - _MB}" x2="{px(t):.2f}" '
                   f'y2="{_SVG_H - _MB + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{_SVG_H - _MB + 18}" font-size="11" '
                   f'text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(ymin, ymax):
        out.append(f'<line x1="{_ML - 5}" y1="{py(t):.2f}" x2="{_ML}" y2="{py(t):.2f}" '
                   'stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{py(t):.2f}" font-size="11" '
                   f'text-anchor="end" dominant-baseline="middle">{t:.3g}</text>')
    out.append(f'<text x="{(_ML + _SVG_W - _MR) / 2:.2f}" y="{_SVG_H - 12}" '
               f'font-size="13" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{(_MT + _SVG_H - _MB) / 2:.2f}" font-size="13" '
               f'text-anchor="middle" transform="rotate(-90 16 '
               f'{(_MT + _SVG_H - _MB) / 2:.2f})">{ylabel}</text>')
    for i, (name, xs, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{pts}"/>')
        out.append(f'<text x="{_SVG_W - _MR + 6}" y="{py(ys[-1]):.2f}" font-size="12" '
                   f'fill="{color}" dominant-baseline="middle">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
