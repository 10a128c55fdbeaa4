"""Model primitives: parameters, the stage game, and one-period expected payoffs.

Young strategic players choose between cooperating and defecting against an
old partner with a clear record. The two expected lifetime payoffs below are
what they compare; everything in :mod:`stigma_olg.equilibrium` is built on
them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParams


class Action(enum.Enum):
    COOPERATE = "C"
    DEFECT = "D"


C = Action.COOPERATE
D = Action.DEFECT


@dataclass(frozen=True)
class CostDistribution:
    """Distribution of the private loss from being exploited, supported on [0, 1].

    ``cdf`` must accept floats and numpy arrays. ``sample`` draws from a numpy
    Generator; when omitted, inverse-CDF sampling by bisection is used.
    """

    name: str
    cdf: Callable
    sample: Callable | None = None

    @property
    def is_uniform(self) -> bool:
        return self.name == "uniform"

    def validate(self, n: int = 1001) -> None:
        grid = np.linspace(0.0, 1.0, n)
        values = np.asarray(self.cdf(grid), dtype=float)
        if abs(values[0]) > 1e-12 or abs(values[-1] - 1.0) > 1e-12:
            raise InvalidParams(f"cost distribution {self.name!r} needs CDF(0)=0 and CDF(1)=1")
        if np.any(np.diff(values) < -1e-15):
            raise InvalidParams(f"cost distribution {self.name!r} CDF must be nondecreasing")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.sample is not None:
            return np.asarray(self.sample(rng, size), dtype=float)
        u = rng.random(size)
        lo = np.zeros(size)
        hi = np.ones(size)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.cdf(mid)) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


def _uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


def _uniform_sample(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.random(size)


UNIFORM = CostDistribution("uniform", _uniform_cdf, _uniform_sample)


def power_distribution(k: float) -> CostDistribution:
    """CDF x**k on [0, 1]; k=1 is uniform in law but not flagged as such."""
    if k <= 0:
        raise InvalidParams("power distribution exponent must be positive")
    return CostDistribution(f"power({k:g})", lambda x: np.clip(x, 0.0, 1.0) ** k)


@dataclass(frozen=True)
class ModelParams:
    """Honest fraction ``pi``, defection benefit ``b``, stigma-erasure probability ``alpha``.

    Players do not discount; ``delta`` is a read-only constant.
    """

    pi: float
    b: float
    alpha: float = 0.0
    cost_distribution: CostDistribution = field(default=UNIFORM, compare=False)

    def __post_init__(self):
        for name in ("pi", "b", "alpha"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParams(f"{name} must be a finite real, got {value!r}")
        if not self.b > 1:
            raise InvalidParams(f"b must exceed 1 (got b={self.b})")
        if not 0 <= self.pi <= 1:
            raise InvalidParams(f"pi must lie in [0, 1] (got pi={self.pi})")
        if not 0 <= self.alpha < 1:
            raise InvalidParams(f"alpha must lie in [0, 1) (got alpha={self.alpha})")
        if self.cost_distribution is not UNIFORM:
            self.cost_distribution.validate()

    @property
    def delta(self) -> float:
        return 1.0

    def cdf(self, x):
        return self.cost_distribution.cdf(x)


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise InvalidParams(f"{name} must lie in [0, 1] (got {value})")


def stage_payoff(action_self: Action, action_other: Action, loss_self: float, params: ModelParams) -> float:
    """Row player's entry of the stage Prisoner's Dilemma."""
    _check_unit("loss_self", loss_self)
    if action_self is C:
        return 1.0 if action_other is C else -float(loss_self)
    return float(params.b) if action_other is C else 0.0


def meeting_coop_prob(cutoff: float, params: ModelParams) -> float:
    """Probability that next period's young partner cooperates with a clear old player."""
    _check_unit("cutoff", cutoff)
    pi = params.pi
    return pi + (1.0 - pi) * float(params.cdf(cutoff))


def defect_payoff(cutoff: float, params: ModelParams) -> float:
    """Expected lifetime payoff of a young strategic player who defects on a clear partner.

    Honest partner: gain b now, keep a stigma unless erased (prob. alpha).
    Strategic partner: mutual defection, no stigma.
    """
    meet = meeting_coop_prob(cutoff, params)
    pi = params.pi
    return params.b * (pi + (1.0 - pi) * meet + params.alpha * pi * meet)


def defect_payoff_baseline(cutoff: float, params: ModelParams) -> float:
    """Perfect-memory defection payoff in expanded form, uniform costs only."""
    _check_unit("cutoff", cutoff)
    pi = params.pi
    return (pi * (2.0 - pi) + (1.0 - pi) ** 2 * cutoff) * params.b


def coop_payoff(loss_self: float, cutoff: float, params: ModelParams) -> float:
    """Expected lifetime payoff of a young strategic player who cooperates on a clear partner.

    Cooperation never creates a stigma, so alpha does not enter.
    """
    _check_unit("loss_self", loss_self)
    pi = params.pi
    return -(1.0 - pi) * loss_self + pi + meeting_coop_prob(cutoff, params) * params.b
