"""Comparative statics over the honest fraction and the forgiveness probability."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .equilibrium import (
    EquilibriumKind,
    EquilibriumSet,
    Regime,
    RegimeClassification,
    classify_regime,
    enumerate_equilibria,
    interior_formula,
    interior_threshold,
    regime_boundaries,
)
from .errors import EmptyInteriorRegion, InvalidParams, StigmaModelError
from .model import ModelParams


def cooperation_probability(pi: float, cutoff: float) -> float:
    """Population-wide chance that a young player meeting a clear partner cooperates."""
    if not (0.0 <= pi <= 1.0 and 0.0 <= cutoff <= 1.0):
        raise InvalidParams(f"pi and cutoff must lie in [0, 1] (got {pi}, {cutoff})")
    return pi + (1.0 - pi) * cutoff


@dataclass(frozen=True)
class SweepRow:
    pi: float
    b: float
    alpha: float
    equilibria: EquilibriumSet | None
    coop_prob_min: float | None
    coop_prob_max: float | None
    regime: RegimeClassification | None
    error: str | None = None

    def cutoff_of(self, kind: EquilibriumKind) -> float | None:
        if self.equilibria is None:
            return None
        eq = self.equilibria.by_kind(kind)
        return None if eq is None else eq.cutoff

    @property
    def regime_name(self) -> str:
        if self.regime is not None:
            return self.regime.regime.value
        return Regime.VACUOUS.value if self.error == "Vacuous" else (self.error or "")


def _sweep_point(pi: float, b: float, alpha: float) -> SweepRow:
    params = ModelParams(pi, b, alpha)
    try:
        eqs = enumerate_equilibria(params)
        regime = classify_regime(params)
    except StigmaModelError as exc:
        return SweepRow(pi, b, alpha, None, None, None, None, error=type(exc).__name__)
    return SweepRow(
        pi,
        b,
        alpha,
        eqs,
        cooperation_probability(pi, eqs.min_cutoff()),
        cooperation_probability(pi, eqs.max_cutoff()),
        regime,
    )


def sweep(b: float, alpha: float, pi_grid: Sequence[float], threads: int = 1) -> list[SweepRow]:
    """One row per grid point. Per-point solver errors are recorded on the row, not raised."""
    grid = [float(x) for x in pi_grid]
    if any(y < x for x, y in zip(grid, grid[1:])):
        raise InvalidParams("pi grid must be ascending")
    if any(not 0.0 <= x <= 1.0 for x in grid):
        raise InvalidParams("pi grid values must lie in [0, 1]")
    ModelParams(0.0, b, alpha)  # fail fast on bad b / alpha
    if threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda x: _sweep_point(x, b, alpha), grid))
    return [_sweep_point(x, b, alpha) for x in grid]


def sign_polynomial(pi: float, b: float) -> float:
    """N'(pi)D(pi) - N(pi)D'(pi) for the perfect-memory threshold N/D, expanded and in Horner form.

    N = pi(A + B pi), D = (1 - pi)(C - D pi) with A = 1 - b, B = b, C = 1, D = b.
    """
    A, B, C, Dc = 1.0 - b, b, 1.0, b
    c0 = A * C
    c1 = 2.0 * B * C
    c2 = -A * Dc - B * (C + Dc)
    c3 = 0.0  # cubic terms 2BD pi^3 cancel
    return c0 + pi * (c1 + pi * (c2 + pi * c3))


@dataclass(frozen=True)
class MonotonicityReport:
    b: float
    alpha: float
    grid: list[tuple[float, float, float]]
    violations: list[float]
    sign_check: list[tuple[float, float]]

    @property
    def passes(self) -> bool:
        return not self.violations


def check_monotonicity(b: float, alpha: float, pi_grid: Sequence[float]) -> MonotonicityReport:
    """Finite-difference slope of the interior threshold at every grid point that has one.

    Central differences use the neighbouring grid points; the first and last
    grid points fall back to one-sided differences.
    """
    grid = [float(x) for x in pi_grid]
    interior_idx = [
        i for i, pi in enumerate(grid)
        if 0.0 < pi < 1.0 and interior_threshold(ModelParams(pi, b, alpha)) is not None
    ]
    if not interior_idx:
        raise EmptyInteriorRegion(f"no grid point admits an interior equilibrium at b={b}, alpha={alpha}")

    def f(pi):
        return interior_formula(pi, b, alpha)

    rows, violations, signs = [], [], []
    for i in interior_idx:
        pi = grid[i]
        if 0 < i < len(grid) - 1:
            slope = (f(grid[i + 1]) - f(grid[i - 1])) / (grid[i + 1] - grid[i - 1])
        elif i == 0 and len(grid) > 1:
            slope = (f(grid[1]) - f(grid[0])) / (grid[1] - grid[0])
        elif len(grid) > 1:
            slope = (f(grid[i]) - f(grid[i - 1])) / (grid[i] - grid[i - 1])
        else:
            slope = math.nan
        rows.append((pi, f(pi), slope))
        if not slope > 0.0:
            violations.append(pi)
        signs.append((pi, sign_polynomial(pi, b)))
    return MonotonicityReport(b, alpha, rows, violations, signs)


@dataclass(frozen=True)
class ForgivenessRow:
    alpha: float
    max_cutoff: float
    max_coop: float
    min_cutoff: float
    min_coop: float


@dataclass(frozen=True)
class ForgivenessReport:
    pi: float
    b: float
    rows: list[ForgivenessRow] = field(default_factory=list)

    @property
    def nonincreasing(self) -> bool:
        for prev, cur in zip(self.rows, self.rows[1:]):
            if (cur.max_cutoff > prev.max_cutoff or cur.min_cutoff > prev.min_cutoff
                    or cur.max_coop > prev.max_coop or cur.min_coop > prev.min_coop):
                return False
        return True


def forgiveness_comparison(pi: float, b: float, alpha_grid: Sequence[float]) -> ForgivenessReport:
    alphas = [float(a) for a in alpha_grid]
    if any(y < x for x, y in zip(alphas, alphas[1:])):
        raise InvalidParams("alpha grid must be ascending")
    rows = []
    for alpha in alphas:
        eqs = enumerate_equilibria(ModelParams(pi, b, alpha))
        lo, hi = eqs.min_cutoff(), eqs.max_cutoff()
        rows.append(ForgivenessRow(
            alpha, hi, cooperation_probability(pi, hi), lo, cooperation_probability(pi, lo)
        ))
    return ForgivenessReport(pi, b, rows)


@dataclass(frozen=True)
class FigureRow:
    pi: float
    low: float | None
    interior: float | None
    high: float | None


@dataclass(frozen=True)
class FigureData:
    b: float
    breakpoints: tuple[float, float]
    rows: list[FigureRow]


def figure_data(b: float, pi_grid: Sequence[float]) -> FigureData:
    """Equilibrium branches of the threshold against pi, perfect memory.

    A branch entry is None where that branch is not an equilibrium.
    """
    rows = []
    for row in sweep(b, 0.0, pi_grid):
        rows.append(FigureRow(
            row.pi,
            row.cutoff_of(EquilibriumKind.CORNER_LOW),
            row.cutoff_of(EquilibriumKind.INTERIOR),
            row.cutoff_of(EquilibriumKind.CORNER_HIGH),
        ))
    return FigureData(b, regime_boundaries(b, 0.0), rows)
