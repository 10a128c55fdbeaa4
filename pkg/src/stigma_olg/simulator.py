"""Monte Carlo simulation of the two-group overlapping-generations game.

Each period the young cohort of group A is matched with the old cohort of
group B and vice versa. Young players who defect against a cooperating
partner are flagged; the flag is visible to their partner next period, when
they are old, unless it is erased first (probability alpha). Old players then
retire and the young cohorts age into the *other* group.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence([seed,
replication])``. Draws happen in a fixed order (matching permutations for A
then B, erasure for A then B, new cohorts for A then B), so a run is a pure
function of its config and replication index.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .equilibrium import EquilibriumKind, enumerate_equilibria
from .errors import InsufficientSamples, InvalidParams, StigmaModelError, Vacuous
from .model import ModelParams, coop_payoff, defect_payoff, meeting_coop_prob

GROUPS = ("A", "B")
MIN_STRATUM = 100
PASS_SIGMAS = 3.5


class SelectionPolicy(enum.Enum):
    MIN_EQUILIBRIUM = "min"
    MAX_EQUILIBRIUM = "max"
    INTERIOR_IF_EXISTS = "interior"


@dataclass(frozen=True)
class SimConfig:
    """Inputs of one simulation run.

    ``strategy_cutoff`` is either a fixed cutoff in [0, 1] or a selection policy
    resolved against the equilibrium set before the run. ``marginal_band`` is
    the width of the loss window on each side of the cutoff used to pick out
    marginal strategic agents for the payoff comparison.
    """

    params: ModelParams
    cohort_size: int
    periods: int
    burn_in: int = 0
    seed: int = 0
    strategy_cutoff: float | SelectionPolicy = SelectionPolicy.INTERIOR_IF_EXISTS
    marginal_band: float = 0.0025

    def __post_init__(self):
        if int(self.cohort_size) != self.cohort_size or self.cohort_size < 1:
            raise InvalidParams(f"cohort_size must be a positive integer (got {self.cohort_size})")
        if int(self.periods) != self.periods or self.periods < 1:
            raise InvalidParams(f"periods must be a positive integer (got {self.periods})")
        if int(self.burn_in) != self.burn_in or not 0 <= self.burn_in < self.periods:
            raise InvalidParams(f"burn_in must satisfy 0 <= burn_in < periods (got {self.burn_in})")
        if not 0 <= self.seed < 2**64:
            raise InvalidParams("seed must be a 64-bit unsigned integer")
        if not isinstance(self.strategy_cutoff, SelectionPolicy) and not 0.0 <= self.strategy_cutoff <= 1.0:
            raise InvalidParams(f"cutoff must lie in [0, 1] (got {self.strategy_cutoff})")
        if not 0.0 < self.marginal_band <= 1.0:
            raise InvalidParams("marginal_band must lie in (0, 1]")


def resolve_cutoff(config: SimConfig) -> float:
    """Fixed cutoff as given; a policy picks from the equilibrium set.

    ``INTERIOR_IF_EXISTS`` falls back to the maximal equilibrium. With pi = 1
    there are no strategic players and the cutoff is irrelevant; 1 is returned.
    """
    choice = config.strategy_cutoff
    if not isinstance(choice, SelectionPolicy):
        return float(choice)
    try:
        eqs = enumerate_equilibria(config.params)
    except Vacuous:
        return 1.0
    if choice is SelectionPolicy.MIN_EQUILIBRIUM:
        return eqs.min_cutoff()
    if choice is SelectionPolicy.MAX_EQUILIBRIUM:
        return eqs.max_cutoff()
    interior = eqs.by_kind(EquilibriumKind.INTERIOR)
    if interior is not None:
        return interior.cutoff
    if eqs.continuum:
        return 0.5
    return eqs.max_cutoff()


def make_rng(seed: int, replication: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(replication)])))


# ---------------------------------------------------------------------------
# population state
# ---------------------------------------------------------------------------

@dataclass
class Cohort:
    """Column arrays for one cohort; row i is one agent."""

    ids: np.ndarray
    honest: np.ndarray
    loss: np.ndarray
    stigmatized: np.ndarray
    # filled in when the cohort plays its young match; NaN/False/-1 for the initial old cohorts
    young_payoff: np.ndarray
    young_period: np.ndarray
    young_coop: np.ndarray
    young_partner_honest: np.ndarray
    young_partner_clear: np.ndarray

    def __len__(self):
        return len(self.ids)


@dataclass
class PopulationState:
    period: int
    young: dict[str, Cohort]
    old: dict[str, Cohort]
    next_id: int
    cutoff: float


def _fresh_cohort(params: ModelParams, n: int, rng: np.random.Generator, first_id: int) -> Cohort:
    honest = rng.random(n) < params.pi
    loss = params.cost_distribution.draw(rng, n)
    return Cohort(
        ids=np.arange(first_id, first_id + n, dtype=np.int64),
        honest=honest,
        loss=loss,
        stigmatized=np.zeros(n, dtype=bool),
        young_payoff=np.full(n, np.nan),
        young_period=np.full(n, -1, dtype=np.int64),
        young_coop=np.zeros(n, dtype=bool),
        young_partner_honest=np.zeros(n, dtype=bool),
        young_partner_clear=np.zeros(n, dtype=bool),
    )


def init_population(config: SimConfig, rng: np.random.Generator) -> PopulationState:
    """Young cohorts for A and B, then unflagged initial old cohorts for A and B."""
    n = config.cohort_size
    next_id = 0
    young, old = {}, {}
    for g in GROUPS:
        young[g] = _fresh_cohort(config.params, n, rng, next_id)
        next_id += n
    for g in GROUPS:
        old[g] = _fresh_cohort(config.params, n, rng, next_id)
        next_id += n
    return PopulationState(0, young, old, next_id, resolve_cutoff(config))


# ---------------------------------------------------------------------------
# one period
# ---------------------------------------------------------------------------

@dataclass
class MatchBatch:
    """Per-match arrays of one young-vs-old batch (kept only on request)."""

    young_group: str
    young_ids: np.ndarray
    old_ids: np.ndarray
    young_coop: np.ndarray
    old_coop: np.ndarray
    young_payoff: np.ndarray
    old_payoff: np.ndarray
    stigma_acquired: np.ndarray


@dataclass
class PeriodStats:
    period: int
    matches: int
    coop_actions: int
    defect_actions: int
    young_total: int
    young_clear_partner: int
    young_coop: int
    young_coop_clear_partner: int
    old_total: int
    old_coop: int
    old_stigmatized: int
    stigma_acquired: int
    # payoff sums and counts keyed "<kind>_<age>"
    payoff_sum: dict[str, float]
    payoff_count: dict[str, int]

    @property
    def young_coop_rate_given_clear(self) -> float:
        return _ratio(self.young_coop_clear_partner, self.young_clear_partner)

    @property
    def young_coop_rate_unconditional(self) -> float:
        return _ratio(self.young_coop, self.young_total)

    @property
    def old_coop_rate(self) -> float:
        return _ratio(self.old_coop, self.old_total)

    @property
    def stigma_prevalence_old(self) -> float:
        return _ratio(self.old_stigmatized, self.old_total)

    @property
    def stigma_acquired_rate(self) -> float:
        return _ratio(self.stigma_acquired, self.young_total)


def _ratio(num, den) -> float | None:
    return float(num) / den if den else None


def _payoffs(own_coop, other_coop, own_loss, b):
    return np.where(
        own_coop,
        np.where(other_coop, 1.0, -own_loss),
        np.where(other_coop, b, 0.0),
    )


@dataclass
class _Lifetimes:
    """Completed two-period lives of strategic agents, as flat arrays."""

    loss: list = field(default_factory=list)
    payoff: list = field(default_factory=list)
    coop: list = field(default_factory=list)
    partner_honest: list = field(default_factory=list)
    partner_clear: list = field(default_factory=list)


def step_period(state: PopulationState, config: SimConfig, rng: np.random.Generator,
                keep_matches: bool = False):
    """Play one period; return the next state, the period's counts, finished lives and (optionally) match arrays."""
    params = config.params
    b = float(params.b)
    cutoff = state.cutoff
    n = config.cohort_size
    t = state.period
    kinds = {True: "honest", False: "strategic"}
    payoff_sum = {f"{k}_{a}": 0.0 for k in kinds.values() for a in ("young", "old")}
    payoff_count = {key: 0 for key in payoff_sum}
    counts = dict(coop=0, defect=0, young_clear=0, young_coop=0, young_coop_clear=0,
                  old_coop=0, old_stig=0, acquired=0)
    batches = []
    finished = []

    for g, other in (("A", "B"), ("B", "A")):
        young = state.young[g]
        old = state.old[other]
        if len(young) != len(old):
            raise AssertionError(f"cohort sizes differ: young {g}={len(young)}, old {other}={len(old)}")
        if young.stigmatized.any():
            raise AssertionError(f"young agent of group {g} flagged at matching time (period {t})")
        if (old.stigmatized & old.honest).any():
            raise AssertionError(f"honest old agent of group {other} flagged (period {t})")

        partner = rng.permutation(n)
        p_honest = old.honest[partner]
        p_stig = old.stigmatized[partner]
        p_loss = old.loss[partner]

        # every young agent is clear, so honest old cooperate and strategic old defect
        old_coop = p_honest.copy()
        young_coop = ~p_stig & (young.honest | (young.loss <= cutoff))

        y_pay = _payoffs(young_coop, old_coop, young.loss, b)
        o_pay = _payoffs(old_coop, young_coop, p_loss, b)
        acquired = ~young_coop & old_coop

        match_sum = y_pay + o_pay
        mixed = young_coop != old_coop
        coop_loss = np.where(young_coop, young.loss, p_loss)
        expected = np.where(mixed, b - coop_loss, np.where(young_coop, 2.0, 0.0))
        if not np.allclose(match_sum, expected, rtol=0.0, atol=1e-12):
            raise AssertionError("match payoffs inconsistent with the stage game")

        counts["coop"] += int(young_coop.sum() + old_coop.sum())
        counts["defect"] += int((~young_coop).sum() + (~old_coop).sum())
        counts["young_clear"] += int((~p_stig).sum())
        counts["young_coop"] += int(young_coop.sum())
        counts["young_coop_clear"] += int((young_coop & ~p_stig).sum())
        counts["old_coop"] += int(old_coop.sum())
        counts["old_stig"] += int(p_stig.sum())
        counts["acquired"] += int(acquired.sum())
        for flag, kind in kinds.items():
            ym = young.honest == flag
            om = p_honest == flag
            payoff_sum[f"{kind}_young"] += float(y_pay[ym].sum())
            payoff_count[f"{kind}_young"] += int(ym.sum())
            payoff_sum[f"{kind}_old"] += float(o_pay[om].sum())
            payoff_count[f"{kind}_old"] += int(om.sum())

        # lives that end this period (old agents whose young match was simulated)
        done = (old.young_period[partner] >= 0) & ~p_honest
        if done.any():
            finished.append(dict(
                young_period=old.young_period[partner][done],
                loss=p_loss[done],
                payoff=old.young_payoff[partner][done] + o_pay[done],
                coop=old.young_coop[partner][done],
                partner_honest=old.young_partner_honest[partner][done],
                partner_clear=old.young_partner_clear[partner][done],
            ))

        young.young_payoff = y_pay
        young.young_period = np.full(n, t, dtype=np.int64)
        young.young_coop = young_coop
        young.young_partner_honest = p_honest
        young.young_partner_clear = ~p_stig
        young.stigmatized = acquired

        if keep_matches:
            batches.append(MatchBatch(g, young.ids.copy(), old.ids[partner], young_coop, old_coop,
                                      y_pay, o_pay, acquired))

    # aging: young of group g become old of the other group; flags erased w.p. alpha
    new_old = {}
    for g, other in (("A", "B"), ("B", "A")):
        cohort = state.young[g]
        if params.alpha > 0.0:
            erased = rng.random(n) < params.alpha
            cohort.stigmatized = cohort.stigmatized & ~erased
        new_old[other] = cohort
    new_young = {}
    next_id = state.next_id
    for g in GROUPS:
        new_young[g] = _fresh_cohort(params, n, rng, next_id)
        next_id += n

    stats = PeriodStats(
        period=t,
        matches=2 * n,
        coop_actions=counts["coop"],
        defect_actions=counts["defect"],
        young_total=2 * n,
        young_clear_partner=counts["young_clear"],
        young_coop=counts["young_coop"],
        young_coop_clear_partner=counts["young_coop_clear"],
        old_total=2 * n,
        old_coop=counts["old_coop"],
        old_stigmatized=counts["old_stig"],
        stigma_acquired=counts["acquired"],
        payoff_sum=payoff_sum,
        payoff_count=payoff_count,
    )
    if stats.coop_actions + stats.defect_actions != 2 * stats.matches:
        raise AssertionError("action count does not match number of matches")
    next_state = PopulationState(t + 1, new_young, new_old, next_id, cutoff)
    return next_state, stats, finished, batches


# ---------------------------------------------------------------------------
# whole runs
# ---------------------------------------------------------------------------

STRATA = ("coop_honest", "coop_strategic", "defect_honest", "defect_strategic")


@dataclass
class Stratum:
    n: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    @property
    def mean(self) -> float:
        return self.total / self.n if self.n else math.nan

    @property
    def var(self) -> float:
        if self.n < 2:
            return math.nan
        return max(0.0, (self.total_sq - self.total ** 2 / self.n) / (self.n - 1))


@dataclass
class SimStats:
    cutoff: float
    periods_counted: int
    matches_total: int
    young_total: int
    young_clear_total: int
    old_total: int
    young_coop_rate_given_clear: float
    young_coop_rate_unconditional: float
    old_coop_rate: float
    stigma_prevalence_old: float
    stigma_acquired_per_cohort: float
    mean_payoff: dict[str, float]
    marginal: dict[str, Stratum]
    series: list[PeriodStats]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SimStats":
        data = dict(data)
        data["marginal"] = {k: Stratum(**v) for k, v in data["marginal"].items()}
        data["series"] = [PeriodStats(**row) for row in data["series"]]
        return cls(**data)


def _accumulate_lives(strata: dict[str, Stratum], lives: dict, cutoff: float, band: float, burn_in: int):
    keep = (lives["young_period"] >= burn_in) & (lives["partner_honest"] | lives["partner_clear"])
    loss = lives["loss"]
    payoff = lives["payoff"]
    below = keep & lives["coop"] & (loss >= cutoff - band)
    above = keep & ~lives["coop"] & (loss <= cutoff + band)
    for side, mask in (("coop", below), ("defect", above)):
        for label, sel in (("honest", lives["partner_honest"]), ("strategic", ~lives["partner_honest"])):
            vals = payoff[mask & sel]
            s = strata[f"{side}_{label}"]
            s.n += int(vals.size)
            s.total += float(vals.sum())
            s.total_sq += float((vals * vals).sum())


def run(config: SimConfig, replication: int = 0, keep_series: bool = True) -> SimStats:
    """Simulate ``config.periods`` periods; statistics cover periods >= burn_in."""
    rng = make_rng(config.seed, replication)
    state = init_population(config, rng)
    cutoff = state.cutoff
    window = []
    series = []
    strata = {k: Stratum() for k in STRATA}
    for _ in range(config.periods):
        state, stats, finished, _ = step_period(state, config, rng)
        series.append(stats)
        if stats.period >= config.burn_in:
            window.append(stats)
        for lives in finished:
            _accumulate_lives(strata, lives, cutoff, config.marginal_band, config.burn_in)

    def total(attr):
        return sum(getattr(s, attr) for s in window)

    payoff_sum = {k: sum(s.payoff_sum[k] for s in window) for k in window[0].payoff_sum}
    payoff_count = {k: sum(s.payoff_count[k] for s in window) for k in window[0].payoff_count}
    return SimStats(
        cutoff=cutoff,
        periods_counted=len(window),
        matches_total=total("matches"),
        young_total=total("young_total"),
        young_clear_total=total("young_clear_partner"),
        old_total=total("old_total"),
        young_coop_rate_given_clear=_ratio(total("young_coop_clear_partner"), total("young_clear_partner")),
        young_coop_rate_unconditional=_ratio(total("young_coop"), total("young_total")),
        old_coop_rate=_ratio(total("old_coop"), total("old_total")),
        stigma_prevalence_old=_ratio(total("old_stigmatized"), total("old_total")),
        stigma_acquired_per_cohort=_ratio(total("stigma_acquired"), total("young_total")),
        mean_payoff={k: _ratio(payoff_sum[k], payoff_count[k]) for k in payoff_sum},
        marginal=strata,
        series=series if keep_series else [],
    )


def run_replications(config: SimConfig, replications: int, threads: int = 1) -> list[SimStats]:
    """Independent replications, returned in replication-index order."""
    indices = range(replications)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda r: run(config, r, keep_series=False), indices))
    return [run(config, r, keep_series=False) for r in indices]


# ---------------------------------------------------------------------------
# theory comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReportLine:
    name: str
    theory: float
    empirical: float
    std_error: float
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class VerificationReport:
    lines: list[ReportLine]
    skipped: list[str]

    @property
    def passed(self) -> bool:
        return all(line.passed for line in self.lines)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        return cls([ReportLine(**line) for line in data["lines"]], list(data["skipped"]))


def _judge(name, theory, empirical, se, note=""):
    ok = abs(empirical - theory) <= PASS_SIGMAS * se + 1e-12
    return ReportLine(name, float(theory), float(empirical), float(se), bool(ok), note)


def _rate_se(p: float, n: int, per_period: Iterable[float]) -> float:
    """Larger of the binomial SE and the between-period SE of the mean."""
    binomial = math.sqrt(max(p * (1.0 - p), 0.0) / n) if n else math.inf
    vals = np.array([v for v in per_period if v is not None])
    if vals.size >= 2:
        return max(binomial, float(vals.std(ddof=1)) / math.sqrt(vals.size))
    return binomial


def compare_to_theory(stats: SimStats, config: SimConfig) -> VerificationReport:
    """Compare simulated frequencies and marginal lifetime payoffs with their closed forms.

    Theory is evaluated at the simulated cutoff, whether or not it is an
    equilibrium. The payoff formulas condition on a clear young-period partner
    who is honest with probability pi, so the empirical payoff means are taken
    per partner type and recombined with weights pi and 1 - pi.
    """
    params = config.params
    pi, alpha = params.pi, params.alpha
    c = stats.cutoff
    window = [s for s in stats.series if s.period >= config.burn_in]
    coop_clear = meeting_coop_prob(c, params)
    acquired = (1.0 - pi) * pi * (1.0 - float(params.cdf(c)))
    prevalence = acquired * (1.0 - alpha)
    lines = [
        _judge("young_coop_rate_given_clear", coop_clear, stats.young_coop_rate_given_clear,
               _rate_se(coop_clear, stats.young_clear_total, [s.young_coop_rate_given_clear for s in window])),
        _judge("stigma_prevalence_old", prevalence, stats.stigma_prevalence_old,
               _rate_se(prevalence, stats.old_total, [s.stigma_prevalence_old for s in window])),
        _judge("stigma_acquired_per_cohort", acquired, stats.stigma_acquired_per_cohort,
               _rate_se(acquired, stats.young_total, [s.stigma_acquired_rate for s in window])),
        _judge("young_coop_rate_unconditional", (1.0 - prevalence) * coop_clear,
               stats.young_coop_rate_unconditional,
               _rate_se((1.0 - prevalence) * coop_clear, stats.young_total,
                        [s.young_coop_rate_unconditional for s in window])),
        _judge("old_coop_rate", pi, stats.old_coop_rate,
               _rate_se(pi, stats.old_total, [s.old_coop_rate for s in window])),
    ]
    skipped = []
    sides = (
        ("marginal_cooperator_payoff", "coop", coop_payoff(c, c, params), c > 0.0),
        ("marginal_defector_payoff", "defect", defect_payoff(c, params), c < 1.0),
    )
    for name, side, theory, possible in sides:
        if pi >= 1.0 or not possible:
            skipped.append(name)
            continue
        mean, var_terms = 0.0, 0.0
        for label, weight in (("honest", pi), ("strategic", 1.0 - pi)):
            if weight == 0.0:
                continue
            s = stats.marginal[f"{side}_{label}"]
            if s.n < MIN_STRATUM:
                raise InsufficientSamples(
                    f"{name}: stratum {side}_{label} has {s.n} observations (< {MIN_STRATUM})")
            mean += weight * s.mean
            var_terms += weight ** 2 * s.var / s.n
        lines.append(_judge(name, theory, mean, math.sqrt(var_terms),
                            note=f"loss within {config.marginal_band:g} of cutoff, reweighted by partner type"))
    return VerificationReport(lines, skipped)
