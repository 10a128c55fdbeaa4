"""Acceptance criteria, runnable from pytest and from ``stigma-olg verify``.

Each check returns a :class:`CriterionResult`; a criterion passes only if its
numerical conditions hold *and* it finishes inside its time budget. ``quick``
shrinks the simulation sizes; the analytic grids are cheap and stay full size.
"""

from __future__ import annotations

import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import equilibrium as eq
from . import statics
from .errors import Continuum, NoSignChange
from .model import ModelParams, coop_payoff, defect_payoff
from .simulator import SimConfig, compare_to_theory, run


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    budget: float


def _timed(number, name, budget, fn, *args):
    start = time.perf_counter()
    try:
        ok, detail = fn(*args)
    except Exception as exc:  # a crash is a failed criterion, reported by name
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    if elapsed >= budget:
        ok, detail = False, f"{detail}; took {elapsed:.2f}s >= {budget}s"
    return CriterionResult(number, name, bool(ok), detail, elapsed, budget)


def _pi_grid(n: int = 1000) -> np.ndarray:
    return np.arange(n) / n


def regime_map_moderate_gain() -> tuple[bool, str]:
    b = 1.5
    lo, hi = 1.0 - 1.0 / b, 0.5
    bad = []
    for row in statics.sweep(b, 0.0, _pi_grid()):
        cutoffs = row.equilibria.cutoffs
        if len(cutoffs) != 1:
            bad.append((row.pi, cutoffs))
            continue
        value = cutoffs[0]
        if row.pi < lo:
            expected = 0.0
        elif row.pi > hi:
            expected = 1.0
        else:
            expected = row.pi * (1 - b * (1 - row.pi)) / ((1 - row.pi) * (1 - b * row.pi))
        if abs(value - expected) > 1e-9 or (row.pi < lo and value != 0.0) or (row.pi > hi and value != 1.0):
            bad.append((row.pi, value, expected))
    gap_low = abs(eq.interior_formula(lo, b))
    gap_high = abs(eq.interior_formula(hi, b) - 1.0)
    ok = not bad and gap_low <= 1e-9 and gap_high <= 1e-9
    return ok, f"{len(bad)} bad points; continuity gaps {gap_low:.1e}, {gap_high:.1e}"


def regime_map_large_gain() -> tuple[bool, str]:
    b = 3.0
    bad = []
    for row in statics.sweep(b, 0.0, _pi_grid()):
        n = len(row.equilibria)
        if 0.5 < row.pi < 2.0 / 3.0:
            if n != 3 or row.equilibria.cutoffs[0] != 0.0 or row.equilibria.cutoffs[2] != 1.0:
                bad.append(row.pi)
        elif not 0.5 <= row.pi <= 2.0 / 3.0 and n != 1:
            bad.append(row.pi)
    value = eq.interior_threshold(ModelParams(0.55, b))
    ok = not bad and abs(value - 0.65812) <= 1e-5
    return ok, f"{len(bad)} bad points; interior at pi=0.55 is {value:.6f}"


def oracle_equivalence() -> tuple[bool, str]:
    pis = np.round(np.arange(1, 20) * 0.05, 10)
    bs = np.round(1.1 + 0.1 * np.arange(29), 10)
    alphas = (0.0, 0.25, 0.5)
    compared, worst, mismatches = 0, 0.0, []
    for alpha in alphas:
        for b in bs:
            for pi in pis:
                params = ModelParams(float(pi), float(b), alpha)
                try:
                    root = eq.fixed_point_bisection(params, 0.0, 1.0)
                except (NoSignChange, Continuum):
                    root = None
                if root is None or not eq.SNAP_TOL < root < 1.0 - eq.SNAP_TOL:
                    continue
                closed = eq.interior_threshold(params)
                compared += 1
                if closed is None:
                    mismatches.append((pi, b, alpha))
                    continue
                worst = max(worst, abs(closed - root))
                if abs(closed - root) > 1e-10:
                    mismatches.append((pi, b, alpha))
    ok = compared > 0 and not mismatches
    return ok, f"{compared} interior points compared, max gap {worst:.1e}, {len(mismatches)} mismatches"


def dominance_bound() -> tuple[bool, str]:
    grid = np.arange(10_000) / 10_000
    step = grid[1] - grid[0]
    problems = []
    for b in (1.1, 1.3, 1.5, 1.7, 1.9):
        flags = np.array([eq.is_cooperation_dominant(ModelParams(float(pi), b)) for pi in grid])
        flips = np.flatnonzero(np.diff(flags.astype(int)))
        if len(flips) != 1 or flags[0] or not flags[-1]:
            problems.append(f"b={b}: {len(flips)} flips")
            continue
        flip_at = grid[flips[0] + 1]
        bound = eq.dominance_threshold(b)
        if abs(flip_at - bound) > step:
            problems.append(f"b={b}: flips at {flip_at} vs {bound:.4f} "
                            f"(worst-case root {eq.exact_dominance_threshold(b):.4f})")
        for pi in grid[grid > bound]:
            p = ModelParams(float(pi), b)
            if not coop_payoff(1.0, 0.0, p) > defect_payoff(0.0, p):
                problems.append(f"b={b}: worst-case inequality fails at pi={pi}")
                break
    return not problems, "; ".join(problems) or "flip within one grid step for all b"


def threshold_monotone() -> tuple[bool, str]:
    problems = []
    points = 0
    for b in np.round(np.arange(1.1, 2.0, 0.1), 10):
        lo, hi = 1.0 - 1.0 / b, 0.5
        grid = np.linspace(lo, hi, 202)[1:-1]
        report = statics.check_monotonicity(float(b), 0.0, grid)
        points += len(report.grid)
        if report.violations:
            problems.append(f"b={b}: {len(report.violations)} slope violations")
        if any(v <= 0 for _, v in report.sign_check):
            problems.append(f"b={b}: sign object not positive")
    return not problems, "; ".join(problems) or f"{points} interior points, all slopes and sign objects positive"


def selection_switch() -> tuple[bool, str]:
    rows = [r for r in statics.sweep(3.0, 0.0, _pi_grid()) if 0.5 < r.pi < 2.0 / 3.0]
    for i, r0 in enumerate(rows):
        if r0.coop_prob_max != 1.0:
            continue
        for r1 in rows[i + 1:]:
            if r1.coop_prob_min == r1.pi and r1.pi < 1.0:
                return True, (f"pi0={r0.pi} coop_max=1, pi1={r1.pi} coop_min={r1.coop_prob_min}")
    return False, "no witness pair in the multiple-equilibrium band"


def forgiveness() -> tuple[bool, str]:
    pis = np.linspace(0.025, 0.975, 20)
    bs = np.linspace(1.1, 3.95, 20)
    alphas = np.round(np.arange(10) * 0.1, 10)
    bad = []
    for pi in pis:
        for b in bs:
            if not statics.forgiveness_comparison(float(pi), float(b), alphas).nonincreasing:
                bad.append((pi, b))
    witness = statics.forgiveness_comparison(0.4, 1.5, [0.0, 0.5]).rows
    w_ok = abs(witness[0].max_cutoff - 1.0 / 6.0) <= 1e-12 and witness[1].max_cutoff == 0.0
    return not bad and w_ok, (f"{len(bad)} non-monotone (pi, b) points; witness cutoffs "
                              f"{witness[0].max_cutoff:.6f} -> {witness[1].max_cutoff}")


def simulator_vs_theory(quick: bool) -> tuple[bool, str]:
    cohort, periods = (20_000, 20) if quick else (100_000, 50)
    config = SimConfig(ModelParams(0.4, 1.5, 0.0), cohort, periods, burn_in=2, seed=20240601,
                       strategy_cutoff=1.0 / 6.0)
    stats = run(config)
    report = compare_to_theory(stats, config)
    lines = {line.name: line for line in report.lines}
    checks = {
        "coop_given_clear": abs(stats.young_coop_rate_given_clear - 0.5) <= 0.005,
        "stigma_prevalence": abs(stats.stigma_prevalence_old - 0.2) <= 0.004,
        "coop_unconditional": abs(stats.young_coop_rate_unconditional - 0.4) <= 0.005,
    }
    for name in ("marginal_cooperator_payoff", "marginal_defector_payoff"):
        line = lines[name]
        checks[name] = line.passed and abs(line.theory - 1.05) <= 1e-12
    detail = (f"coop|clear={stats.young_coop_rate_given_clear:.4f} stigma={stats.stigma_prevalence_old:.4f} "
              f"coop={stats.young_coop_rate_unconditional:.4f} "
              f"payoffs={lines['marginal_cooperator_payoff'].empirical:.4f}/"
              f"{lines['marginal_defector_payoff'].empirical:.4f}")
    failed = [k for k, v in checks.items() if not v]
    return not failed, detail + (f"; failed {failed}" if failed else "")


def simulator_degenerate(quick: bool) -> tuple[bool, str]:
    cohort = 2_000 if quick else 10_000
    honest = run(SimConfig(ModelParams(1.0, 1.5), cohort, 10, burn_in=1, seed=3, strategy_cutoff=0.5))
    selfish = run(SimConfig(ModelParams(0.0, 1.5), cohort, 10, burn_in=1, seed=3, strategy_cutoff=0.0))
    ok = (
        honest.young_coop_rate_given_clear == 1.0
        and honest.young_coop_rate_unconditional == 1.0
        and honest.old_coop_rate == 1.0
        and honest.stigma_prevalence_old == 0.0
        and honest.stigma_acquired_per_cohort == 0.0
        and selfish.young_coop_rate_unconditional == 0.0
        and selfish.old_coop_rate == 0.0
        and selfish.stigma_prevalence_old == 0.0
        and selfish.stigma_acquired_per_cohort == 0.0
    )
    return ok, (f"pi=1: coop={honest.young_coop_rate_unconditional} stigma={honest.stigma_prevalence_old}; "
                f"pi=0: coop={selfish.young_coop_rate_unconditional} stigma={selfish.stigma_prevalence_old}")


def determinism(quick: bool) -> tuple[bool, str]:
    from .cli import main

    cohort, periods = ("5000", "10") if quick else ("100000", "50")
    with tempfile.TemporaryDirectory() as tmp:
        paths = [Path(tmp) / f"run{i}.json" for i in (1, 2)]
        codes = []
        for path in paths:
            codes.append(main([
                "simulate", "--pi", "0.4", "--b", "1.5", "--alpha", "0", "--cohort", cohort,
                "--periods", periods, "--burn-in", "2", "--seed", "7", "--select", "interior",
                "--no-timestamp", "--out", str(path),
            ]))
        same = paths[0].read_bytes() == paths[1].read_bytes()
    return same and codes[0] in (0, 1), f"exit codes {codes}, byte-identical={same}"


def continuum() -> tuple[bool, str]:
    params = ModelParams(0.5, 2.0, 0.0)
    regime = eq.classify_regime(params).regime
    worst = max(abs(eq.fixed_point_defect(float(x), params)) for x in np.linspace(0.0, 1.0, 11))
    ok = regime is eq.Regime.CONTINUUM and eq.enumerate_equilibria(params).continuum and worst <= 1e-10
    return ok, f"regime={regime.value}, max fixed-point defect {worst:.1e}"


def run_all(quick: bool = False) -> list[CriterionResult]:
    return [
        _timed(1, "regime map for b=1.5", 1.0, regime_map_moderate_gain),
        _timed(2, "regime map for b=3", 1.0, regime_map_large_gain),
        _timed(3, "closed form vs bisection oracle", 5.0, oracle_equivalence),
        _timed(4, "dominance bound flips at 2(1-1/b)", 2.0, dominance_bound),
        _timed(5, "threshold increasing in pi for 1<b<2", 2.0, threshold_monotone),
        _timed(6, "selection switch lowers cooperation (b=3)", 1.0, selection_switch),
        _timed(7, "forgiveness never raises cooperation", 5.0, forgiveness),
        _timed(8, "simulator matches theory", 60.0, simulator_vs_theory, quick),
        _timed(9, "simulator degenerate cases", 5.0, simulator_degenerate, quick),
        _timed(10, "byte-identical reruns", 60.0, determinism, quick),
        _timed(11, "continuum detection (pi=0.5, b=2)", 1.0, continuum),
    ]


def format_table(results: list[CriterionResult]) -> str:
    lines = []
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"{mark}  #{r.number:<2} {r.name:<45} {r.seconds:7.2f}s  {r.detail}")
    return "\n".join(lines)
