"""Threshold equilibria and cohort simulation for an overlapping-generations
Prisoner's Dilemma with honest types, public stigma and probabilistic forgiveness."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    Continuum,
    EmptyInteriorRegion,
    InsufficientSamples,
    InvalidParams,
    NoSignChange,
    Singular,
    StigmaModelError,
    Unsupported,
    Vacuous,
)
from .model import Action, CostDistribution, ModelParams, UNIFORM, power_distribution  # noqa: E402
from .equilibrium import (  # noqa: E402
    EquilibriumKind,
    EquilibriumSet,
    Regime,
    RegimeClassification,
    ThresholdEquilibrium,
    best_response_cutoff,
    classify_regime,
    dominance_threshold,
    enumerate_equilibria,
    fixed_point_bisection,
    interior_threshold,
    is_cooperation_dominant,
)
from .simulator import SelectionPolicy, SimConfig, SimStats, compare_to_theory, run  # noqa: E402
