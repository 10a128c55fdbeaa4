from fractions import Fraction as Fr

import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from stigma_olg import equilibrium as eq
from stigma_olg.equilibrium import EquilibriumKind as K
from stigma_olg.equilibrium import Regime
from stigma_olg.errors import Continuum, InvalidParams, NoSignChange, Singular, Unsupported, Vacuous
from stigma_olg.model import ModelParams, coop_payoff, defect_payoff, power_distribution


def P(pi, b, alpha=0.0, **kw):
    return ModelParams(pi, b, alpha, **kw)


def interior_oracle(pi, b):
    """Perfect-memory interior threshold in exact rational arithmetic."""
    pi, b = Fr(pi), Fr(b)
    return pi * (1 - b * (1 - pi)) / ((1 - pi) * (1 - b * pi))


class TestBestResponse:
    def test_examples(self):
        assert eq.best_response_cutoff(0.0, P(0.4, 1.5)).unclamped == pytest.approx(1 / 15, abs=1e-15)
        br = eq.best_response_cutoff(1.0, P(0.6, 1.5))
        assert br.unclamped == pytest.approx(1.5, abs=1e-12)
        assert br.clamped == 1.0

    @pytest.mark.parametrize("x", [0.0, 0.13, 0.5, 0.77, 1.0])
    def test_identity_map_at_continuum(self, x):
        assert eq.best_response_cutoff(x, P(0.5, 2.0)).unclamped == pytest.approx(x, abs=1e-15)

    def test_identity_map_symbolically(self):
        pi, b, c = sp.Rational(1, 2), 2, sp.symbols("c")
        meet = pi + (1 - pi) * c
        br = pi * (1 - b + b * meet) / (1 - pi)
        assert sp.simplify(br - c) == 0

    def test_vacuous(self):
        with pytest.raises(Vacuous):
            eq.best_response_cutoff(0.5, P(1.0, 1.5))

    @given(pi=st.floats(0.0, 0.99), b=st.floats(1.01, 5.0), alpha=st.floats(0.0, 0.99),
           x=st.floats(0.0, 1.0), y=st.floats(0.0, 1.0))
    def test_affine_with_stated_slope(self, pi, b, alpha, x, y):
        assume(abs(x - y) > 1e-3)
        p = P(pi, b, alpha)
        slope = (eq.best_response_cutoff(x, p).unclamped - eq.best_response_cutoff(y, p).unclamped) / (x - y)
        assert slope == pytest.approx(b * pi * (1 - alpha), abs=1e-9)
        assert slope >= 0

    def test_indifference_at_cutoff(self):
        # the indifferent loss equalises the two payoffs
        for pi, b, alpha, belief in [(0.4, 1.5, 0.0, 0.3), (0.55, 3.0, 0.2, 0.7), (0.3, 1.2, 0.5, 0.1)]:
            p = P(pi, b, alpha)
            loss = eq.best_response_cutoff(belief, p).unclamped
            if 0 <= loss <= 1:
                assert coop_payoff(loss, belief, p) == pytest.approx(defect_payoff(belief, p), abs=1e-12)


class TestInteriorThreshold:
    def test_examples(self):
        assert eq.interior_threshold(P(0.4, 1.5)) == pytest.approx(float(interior_oracle("0.4", "1.5")), abs=1e-15)
        assert float(interior_oracle("0.4", "1.5")) == pytest.approx(1 / 6, abs=1e-15)
        value = eq.interior_threshold(P(0.55, 3.0))
        assert value == pytest.approx(float(interior_oracle("0.55", "3")), abs=1e-15)
        assert value == pytest.approx(0.65812, abs=1e-5)
        assert eq.interior_threshold(P(1 / 3, 1.5)) is None

    def test_alpha_form_reduces_to_baseline(self):
        for pi in np.linspace(0.05, 0.95, 19):
            for b in (1.2, 1.7, 2.5, 3.5):
                if abs(b * pi - 1) < 1e-6:
                    continue
                assert eq.interior_formula(pi, b, 0.0) == pytest.approx(
                    float(interior_oracle(Fr(pi), Fr(b))), rel=1e-12, abs=1e-12)

    def test_alpha_form_solves_indifference(self):
        # independent route: solve the indifference condition symbolically
        l, pi, b, a = sp.symbols("l pi b a")
        meet = pi + (1 - pi) * l
        eqn = sp.Eq(-(1 - pi) * l + pi + meet * b, b * (pi + (1 - pi) * meet + a * pi * meet))
        root = sp.solve(eqn, l)[0]
        for vals in [(0.4, 1.5, 0.1), (0.6, 3.0, 0.25), (0.45, 1.9, 0.05)]:
            expected = float(root.subs(dict(zip((pi, b, a), vals))))
            assert eq.interior_formula(*vals) == pytest.approx(expected, rel=1e-12)

    def test_singular(self):
        with pytest.raises(Singular):
            eq.interior_threshold(P(0.5, 2.0))
        with pytest.raises(Singular):
            eq.interior_threshold(P(0.25, 4.0))

    def test_unsupported_for_non_uniform(self):
        with pytest.raises(Unsupported):
            eq.interior_threshold(P(0.4, 1.5, cost_distribution=power_distribution(2.0)))


class TestBisection:
    def test_examples(self):
        assert eq.fixed_point_bisection(P(0.4, 1.5), 0.01, 0.99) == pytest.approx(1 / 6, abs=1e-12)
        assert eq.fixed_point_bisection(P(0.55, 3.0), 0.1, 0.9) == pytest.approx(0.65812, abs=1e-5)
        with pytest.raises(NoSignChange):
            eq.fixed_point_bisection(P(0.4, 1.5, 0.5), 0.01, 0.99)

    def test_continuum(self):
        with pytest.raises(Continuum):
            eq.fixed_point_bisection(P(0.5, 2.0), 0.1, 0.9)

    def test_bad_bracket(self):
        with pytest.raises(InvalidParams):
            eq.fixed_point_bisection(P(0.4, 1.5), 0.6, 0.2)

    def test_residual(self):
        root = eq.fixed_point_bisection(P(0.45, 1.5), 0.0, 1.0)
        assert abs(eq.fixed_point_defect(root, P(0.45, 1.5))) <= 1e-12

    def test_non_uniform_cdf(self):
        # F(x) = x^2: fixed point of pi(1-b+b(pi+(1-pi)x^2))/(1-pi) = x, checked against numpy roots
        pi, b = 0.45, 1.5
        p = P(pi, b, cost_distribution=power_distribution(2.0))
        coeffs = [pi * b, -1.0, pi * (1 - b + b * pi) / (1 - pi)]
        real = [r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-12 and 0 < r.real < 1]
        got = eq.fixed_point_bisection(p, 0.0, 1.0)
        assert any(abs(got - r) < 1e-10 for r in real)


class TestEnumerate:
    def test_triple(self):
        eqs = eq.enumerate_equilibria(P(0.55, 3.0))
        assert [e.kind for e in eqs.equilibria] == [K.CORNER_LOW, K.INTERIOR, K.CORNER_HIGH]
        assert eqs.cutoffs[0] == 0.0 and eqs.cutoffs[2] == 1.0
        assert eqs.cutoffs[1] == pytest.approx(0.65812, abs=1e-5)

    def test_unique_interior(self):
        eqs = eq.enumerate_equilibria(P(0.4, 1.5))
        assert len(eqs) == 1 and eqs.equilibria[0].kind is K.INTERIOR
        assert eqs.cutoffs[0] == pytest.approx(1 / 6, abs=1e-14)

    def test_continuum(self):
        eqs = eq.enumerate_equilibria(P(0.5, 2.0))
        assert eqs.continuum and len(eqs) == 0
        for x in np.linspace(0, 1, 11):
            assert abs(eq.fixed_point_defect(float(x), P(0.5, 2.0))) <= 1e-10

    def test_vacuous(self):
        with pytest.raises(Vacuous):
            eq.enumerate_equilibria(P(1.0, 1.5))

    @settings(max_examples=300)
    @given(pi=st.floats(0.0, 0.99), b=st.floats(1.01, 5.0), alpha=st.floats(0.0, 0.95))
    def test_set_invariants(self, pi, b, alpha):
        eqs = eq.enumerate_equilibria(P(pi, b, alpha))
        assert eqs.continuum or len(eqs) >= 1
        cutoffs = eqs.cutoffs
        assert cutoffs == sorted(cutoffs)
        for e in eqs.equilibria:
            assert e.residual <= 1e-10
            if e.kind is K.CORNER_LOW:
                assert e.cutoff == 0.0
            elif e.kind is K.CORNER_HIGH:
                assert e.cutoff == 1.0
            else:
                assert 0.0 < e.cutoff < 1.0
        if 1 < b < 2 and alpha == 0.0:
            assert len(eqs) == 1

    @settings(max_examples=300)
    @given(pi=st.floats(0.0, 0.99), b=st.floats(1.01, 5.0), alpha=st.floats(0.0, 0.95))
    def test_corner_conditions(self, pi, b, alpha):
        low_margin = pi - (b - 1) / (b * (1 - alpha))
        high_margin = pi * (2 - b * alpha) - 1
        assume(abs(low_margin) > 1e-9 and abs(high_margin) > 1e-9)
        eqs = eq.enumerate_equilibria(P(pi, b, alpha))
        assert (eqs.by_kind(K.CORNER_LOW) is not None) == (low_margin <= 0)
        assert (eqs.by_kind(K.CORNER_HIGH) is not None) == (high_margin >= 0)

    @pytest.mark.parametrize("pi, b", [(0.4, 1.2), (0.45, 1.5), (0.6, 3.0)])
    def test_non_uniform_matches_brute_force(self, pi, b):
        p = P(pi, b, cost_distribution=power_distribution(2.0))
        eqs = eq.enumerate_equilibria(p)
        grid = np.linspace(0.0, 1.0, 100_001)
        g = np.array([eq.fixed_point_defect(float(x), p) for x in grid])
        crossings = grid[:-1][np.sign(g[:-1]) * np.sign(g[1:]) < 0]
        found = [e.cutoff for e in eqs.equilibria if e.kind is K.INTERIOR]
        assert len(found) == len(crossings)
        for x, c in zip(found, crossings):
            assert abs(x - c) <= 1e-5
        for e in eqs.equilibria:
            assert e.residual <= 1e-10

    def test_uniform_power_one_agrees(self):
        # CDF x**1 goes through the scan path but must agree with the closed form
        for pi, b in [(0.4, 1.5), (0.55, 3.0), (0.2, 1.5), (0.7, 1.5)]:
            closed = eq.enumerate_equilibria(P(pi, b)).cutoffs
            scanned = eq.enumerate_equilibria(P(pi, b, cost_distribution=power_distribution(1.0))).cutoffs
            assert scanned == pytest.approx(closed, abs=1e-10)


class TestRegions:
    def test_regions_b15(self):
        for pi in np.arange(1000) / 1000:
            eqs = eq.enumerate_equilibria(P(float(pi), 1.5))
            assert len(eqs) == 1
            if pi < 1 / 3:
                assert eqs.equilibria[0].kind is K.CORNER_LOW
            elif pi > 0.5:
                assert eqs.equilibria[0].kind is K.CORNER_HIGH
            elif 1 / 3 < pi < 0.5:
                assert eqs.equilibria[0].kind is K.INTERIOR
                assert eqs.cutoffs[0] == pytest.approx(float(interior_oracle(Fr(pi), Fr("1.5"))), abs=1e-9)

    def test_counts_b3(self):
        for pi in np.arange(1000) / 1000:
            n = len(eq.enumerate_equilibria(P(float(pi), 3.0)))
            if 0.5 < pi < 2 / 3:
                assert n == 3
            elif not 0.5 <= pi <= 2 / 3:
                assert n == 1

    @pytest.mark.parametrize("b", [2.0, 2.5, 3.0, 3.9])
    def test_overlap_band_is_multiple(self, b):
        lo, hi = 0.5, 1 - 1 / b
        for pi in np.linspace(lo, hi, 25):
            eqs = eq.enumerate_equilibria(P(float(pi), b))
            if b == 2.0 and abs(pi - 0.5) < 1e-12:
                assert eqs.continuum
            else:
                assert eqs.by_kind(K.CORNER_LOW) and eqs.by_kind(K.CORNER_HIGH)

    def test_forgiveness_monotone_grid(self):
        for pi in np.linspace(0.05, 0.95, 19):
            for b in np.linspace(1.1, 3.9, 15):
                prev = None
                for alpha in np.linspace(0, 0.9, 10):
                    eqs = eq.enumerate_equilibria(P(float(pi), float(b), float(alpha)))
                    cur = (eqs.min_cutoff(), eqs.max_cutoff())
                    if prev is not None:
                        assert cur[0] <= prev[0] + 1e-12 and cur[1] <= prev[1] + 1e-12
                    prev = cur


class TestDominance:
    def test_threshold_examples(self):
        assert eq.dominance_threshold(1.5) == pytest.approx(2 / 3, abs=1e-15)
        assert eq.dominance_threshold(1 + 1e-9) == pytest.approx(0.0, abs=1e-8)
        assert eq.dominance_threshold(2.0) == 1.0
        with pytest.raises(InvalidParams):
            eq.dominance_threshold(1.0)

    def test_is_dominant_examples(self):
        assert eq.is_cooperation_dominant(P(0.7, 1.5))
        assert not eq.is_cooperation_dominant(P(0.6, 1.5))
        assert not eq.is_cooperation_dominant(P(0.0, 1.5))
        with pytest.raises(Unsupported):
            eq.is_cooperation_dominant(P(0.7, 1.5, 0.1))

    def test_exact_threshold_is_root_of_worst_case(self):
        for b in (1.1, 1.3, 1.5, 1.7, 1.9):
            root = eq.exact_dominance_threshold(b)
            p = P(root, b)
            assert coop_payoff(1.0, 0.0, p) == pytest.approx(defect_payoff(0.0, p), abs=1e-12)

    def test_closed_bound_coincides_with_worst_case_root_only_at_three_halves(self):
        b = sp.symbols("b", positive=True)
        root = (b - 2 + sp.sqrt(b**2 + 4)) / (2 * b)
        assert sp.solve(sp.Eq(root, 2 * (1 - 1 / b)), b) == [sp.Rational(3, 2)]
        assert eq.exact_dominance_threshold(1.1) == pytest.approx(0.62843, abs=1e-5)
        assert eq.dominance_threshold(1.1) == pytest.approx(0.18182, abs=1e-5)

    @pytest.mark.parametrize("b", [1.1, 1.3, 1.5, 1.7, 1.9])
    def test_dominant_above_worst_case_root(self, b):
        bound = eq.exact_dominance_threshold(b)
        for pi in np.linspace(bound + 1e-6, 0.999, 40):
            p = P(float(pi), b)
            for loss in (0.0, 0.5, 1.0):
                for belief in (0.0, 0.5, 1.0):
                    assert coop_payoff(loss, belief, p) > defect_payoff(belief, p)

    def test_flag_matches_exact_root(self):
        grid = np.arange(10_000) / 10_000
        for b in (1.1, 1.3, 1.5, 1.7, 1.9):
            flags = np.array([eq.is_cooperation_dominant(P(float(pi), b)) for pi in grid])
            flip = grid[np.flatnonzero(np.diff(flags.astype(int)))[0] + 1]
            assert abs(flip - eq.exact_dominance_threshold(b)) <= 1e-4


class TestClassify:
    @pytest.mark.parametrize("pi, b, regime", [
        (0.2, 1.5, Regime.ALL_DEFECT),
        (0.4, 1.5, Regime.UNIQUE_INTERIOR),
        (0.6, 1.5, Regime.ALL_COOPERATE),
        (0.8, 1.5, Regime.DOMINANT_COOPERATION),
        (0.6, 3.0, Regime.TRIPLE_EQUILIBRIUM),
        (0.4, 3.0, Regime.ALL_DEFECT),
        (0.7, 3.0, Regime.ALL_COOPERATE),
        (0.5, 2.0, Regime.CONTINUUM),
    ])
    def test_examples(self, pi, b, regime):
        assert eq.classify_regime(P(pi, b)).regime is regime

    def test_boundaries(self):
        assert eq.classify_regime(P(0.4, 1.5)).boundaries == pytest.approx((1 / 3, 0.5))
        assert eq.classify_regime(P(0.6, 3.0)).boundaries == pytest.approx((0.5, 2 / 3))

    @given(pi=st.floats(0.0, 0.99), b=st.floats(1.01, 1.99))
    def test_baseline_regions(self, pi, b):
        lo = 1 - 1 / b
        assume(abs(pi - lo) > 1e-9 and abs(pi - 0.5) > 1e-9)
        regime = eq.classify_regime(P(pi, b)).regime
        if pi < lo:
            assert regime is Regime.ALL_DEFECT
        elif pi < 0.5:
            assert regime is Regime.UNIQUE_INTERIOR
        else:
            assert regime in (Regime.ALL_COOPERATE, Regime.DOMINANT_COOPERATION)

    def test_vacuous(self):
        with pytest.raises(Vacuous):
            eq.classify_regime(P(1.0, 1.5))
