"""Symmetric threshold equilibria.

A young strategic player facing a clear partner cooperates iff their private
loss is at most a cutoff. Given a belief about the cutoff everyone else uses,
the indifferent loss is an affine function of the belief (for uniform costs);
equilibria are the fixed points of that map clamped to [0, 1].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import Continuum, InvalidParams, NoSignChange, Singular, Unsupported, Vacuous
from .model import ModelParams, coop_payoff, defect_payoff, meeting_coop_prob

SINGULAR_TOL = 1e-12
RESIDUAL_TOL = 1e-10
# corner and interior roots closer than this to 0 or 1 are treated as the corner
SNAP_TOL = 1e-12
BISECT_WIDTH = 1e-14
BISECT_RESIDUAL = 1e-12
BISECT_MAX_ITER = 200
# grid used to locate sign changes when the cost CDF is not uniform
SCAN_POINTS = 2001


class EquilibriumKind(enum.Enum):
    CORNER_LOW = "CornerLow"
    INTERIOR = "Interior"
    CORNER_HIGH = "CornerHigh"


class Regime(enum.Enum):
    ALL_DEFECT = "AllDefect"
    UNIQUE_INTERIOR = "UniqueInterior"
    ALL_COOPERATE = "AllCooperate"
    TRIPLE_EQUILIBRIUM = "TripleEquilibrium"
    CONTINUUM = "Continuum"
    DOMINANT_COOPERATION = "DominantCooperation"
    VACUOUS = "Vacuous"


@dataclass(frozen=True)
class ThresholdEquilibrium:
    cutoff: float
    kind: EquilibriumKind
    residual: float


@dataclass(frozen=True)
class EquilibriumSet:
    equilibria: tuple[ThresholdEquilibrium, ...]
    continuum: bool = False

    @property
    def cutoffs(self) -> list[float]:
        return [eq.cutoff for eq in self.equilibria]

    def min_cutoff(self) -> float:
        return 0.0 if self.continuum else self.equilibria[0].cutoff

    def max_cutoff(self) -> float:
        return 1.0 if self.continuum else self.equilibria[-1].cutoff

    def by_kind(self, kind: EquilibriumKind) -> ThresholdEquilibrium | None:
        for eq in self.equilibria:
            if eq.kind is kind:
                return eq
        return None

    def __len__(self):
        return len(self.equilibria)


@dataclass(frozen=True)
class RegimeClassification:
    regime: Regime
    boundaries: tuple[float, float]


class BestResponse(NamedTuple):
    unclamped: float
    clamped: float


def _require_strategic(params: ModelParams) -> None:
    if params.pi >= 1.0:
        raise Vacuous("pi = 1 leaves no strategic players; the equilibrium notion is vacuous")


def best_response_cutoff(belief: float, params: ModelParams) -> BestResponse:
    """Loss at which a young strategic player is indifferent, given the population cutoff ``belief``."""
    _require_strategic(params)
    pi, b, alpha = params.pi, params.b, params.alpha
    meet = meeting_coop_prob(belief, params)
    unclamped = pi * (1.0 - b + b * meet * (1.0 - alpha)) / (1.0 - pi)
    return BestResponse(unclamped, min(1.0, max(0.0, unclamped)))


def fixed_point_defect(cutoff: float, params: ModelParams) -> float:
    return best_response_cutoff(cutoff, params).unclamped - cutoff


def interior_formula(pi: float, b: float, alpha: float = 0.0) -> float:
    """Unique root of the unclamped fixed-point equation, wherever it lands (uniform costs)."""
    if pi >= 1.0:
        raise Vacuous("pi = 1 leaves no strategic players; the equilibrium notion is vacuous")
    slope = b * pi * (1.0 - alpha)
    if abs(1.0 - slope) < SINGULAR_TOL:
        raise Singular(f"b*pi*(1-alpha) = 1 at pi={pi}, b={b}, alpha={alpha}")
    return pi * (1.0 - b + slope) / ((1.0 - pi) * (1.0 - slope))


def interior_threshold(params: ModelParams) -> float | None:
    """Closed-form interior cutoff, or None when the root is not strictly inside (0, 1)."""
    if not params.cost_distribution.is_uniform:
        raise Unsupported("closed-form threshold assumes uniformly distributed costs")
    _require_strategic(params)
    value = interior_formula(params.pi, params.b, params.alpha)
    if SNAP_TOL < value < 1.0 - SNAP_TOL:
        return value
    return None


def fixed_point_bisection(params: ModelParams, bracket_low: float, bracket_high: float) -> float:
    """Root of BR(l) - l on the bracket by plain bisection. Works for any cost CDF."""
    lo, hi = float(bracket_low), float(bracket_high)
    if not 0.0 <= lo < hi <= 1.0:
        raise InvalidParams(f"bracket must satisfy 0 <= low < high <= 1 (got [{lo}, {hi}])")
    g_lo = fixed_point_defect(lo, params)
    g_hi = fixed_point_defect(hi, params)
    g_mid = fixed_point_defect(0.5 * (lo + hi), params)
    if max(abs(g_lo), abs(g_hi), abs(g_mid)) <= BISECT_RESIDUAL:
        raise Continuum(f"every cutoff in [{lo}, {hi}] is a fixed point")
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise NoSignChange(f"BR(l) - l has the same sign at {lo} and {hi}")
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        g_mid = fixed_point_defect(mid, params)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
        if hi - lo <= BISECT_WIDTH:
            break
    root = 0.5 * (lo + hi)
    residual = abs(fixed_point_defect(root, params))
    if residual > BISECT_RESIDUAL:
        raise NoSignChange(f"bisection stalled with residual {residual:.3e} at {root}")
    return root


def _residual(cutoff: float, params: ModelParams) -> float:
    return abs(best_response_cutoff(cutoff, params).clamped - cutoff)


def _interior_roots_by_scan(params: ModelParams) -> tuple[list[float], bool]:
    grid = np.linspace(0.0, 1.0, SCAN_POINTS)
    g = np.array([fixed_point_defect(x, params) for x in grid])
    if np.all(np.abs(g) <= BISECT_RESIDUAL):
        return [], True
    roots = []
    for i in range(len(grid) - 1):
        if g[i] == 0.0 and 0.0 < grid[i] < 1.0:
            roots.append(float(grid[i]))
        elif g[i] != 0.0 and g[i + 1] != 0.0 and (g[i] > 0) != (g[i + 1] > 0):
            roots.append(fixed_point_bisection(params, grid[i], grid[i + 1]))
    return [r for r in roots if 0.0 < r < 1.0], False


def is_continuum(params: ModelParams) -> bool:
    """Identity best-response map: b*pi*(1-alpha) = 1 with zero intercept (b = 2)."""
    if params.pi >= 1.0 or not params.cost_distribution.is_uniform:
        return False
    slope = params.b * params.pi * (1.0 - params.alpha)
    intercept = best_response_cutoff(0.0, params).unclamped
    return abs(slope - 1.0) < SINGULAR_TOL and abs(intercept) < SINGULAR_TOL


def enumerate_equilibria(params: ModelParams) -> EquilibriumSet:
    """All symmetric threshold equilibria, ascending by cutoff."""
    _require_strategic(params)
    if is_continuum(params):
        return EquilibriumSet((), continuum=True)

    found = []
    if best_response_cutoff(0.0, params).unclamped <= SNAP_TOL:
        found.append(ThresholdEquilibrium(0.0, EquilibriumKind.CORNER_LOW, _residual(0.0, params)))

    if params.cost_distribution.is_uniform:
        try:
            interior = interior_threshold(params)
        except Singular:
            interior = None
        interiors = [] if interior is None else [interior]
    else:
        interiors, flat = _interior_roots_by_scan(params)
        if flat:
            return EquilibriumSet((), continuum=True)
    for cutoff in interiors:
        if not SNAP_TOL < cutoff < 1.0 - SNAP_TOL:
            continue
        found.append(ThresholdEquilibrium(cutoff, EquilibriumKind.INTERIOR, _residual(cutoff, params)))

    if best_response_cutoff(1.0, params).unclamped >= 1.0 - SNAP_TOL:
        found.append(ThresholdEquilibrium(1.0, EquilibriumKind.CORNER_HIGH, _residual(1.0, params)))

    found.sort(key=lambda eq: eq.cutoff)
    return EquilibriumSet(tuple(found))


def dominance_threshold(b: float) -> float:
    """Honest fraction above which cooperating beats defecting for every loss.

    Meaningful for 1 < b < 2; for b >= 2 the value is >= 1 and the dominance
    region is empty.
    """
    if not b > 1:
        raise InvalidParams(f"b must exceed 1 (got b={b})")
    return 2.0 * (1.0 - 1.0 / b)


def exact_dominance_threshold(b: float) -> float:
    """Root of the worst-case comparison b*pi^2 + (2 - b)*pi - 1 = 0 in [0, 1].

    This is where :func:`is_cooperation_dominant` actually switches. It agrees
    with :func:`dominance_threshold` only at b = 3/2.
    """
    if not b > 1:
        raise InvalidParams(f"b must exceed 1 (got b={b})")
    return (b - 2.0 + math.sqrt(b * b + 4.0)) / (2.0 * b)


def is_cooperation_dominant(params: ModelParams) -> bool:
    """Worst-case loss (1) against worst-case belief (everyone defects) still favours cooperating."""
    if params.alpha != 0.0:
        raise Unsupported("dominance is only characterised for perfect memory (alpha = 0)")
    return coop_payoff(1.0, 0.0, params) > defect_payoff(0.0, params)


def regime_boundaries(b: float, alpha: float = 0.0) -> tuple[float, float]:
    """Honest fractions where the corner equilibria switch on/off, as (smaller, larger).

    All-defect is an equilibrium iff pi <= (b-1)/(b(1-alpha)); all-cooperate iff
    pi(2 - b*alpha) >= 1. For alpha=0 these are 1-1/b and 1/2.
    """
    defect_edge = (b - 1.0) / (b * (1.0 - alpha))
    cooperate_edge = 1.0 / (2.0 - b * alpha) if b * alpha < 2.0 else float("inf")
    return (min(defect_edge, cooperate_edge), max(defect_edge, cooperate_edge))


def classify_regime(params: ModelParams) -> RegimeClassification:
    eqs = enumerate_equilibria(params)
    bounds = regime_boundaries(params.b, params.alpha)
    if eqs.continuum:
        regime = Regime.CONTINUUM
    elif len(eqs) > 1:
        regime = Regime.TRIPLE_EQUILIBRIUM
    else:
        kind = eqs.equilibria[0].kind
        if kind is EquilibriumKind.CORNER_LOW:
            regime = Regime.ALL_DEFECT
        elif kind is EquilibriumKind.INTERIOR:
            regime = Regime.UNIQUE_INTERIOR
        elif params.alpha == 0.0 and is_cooperation_dominant(params):
            regime = Regime.DOMINANT_COOPERATION
        else:
            regime = Regime.ALL_COOPERATE
    return RegimeClassification(regime, bounds)
