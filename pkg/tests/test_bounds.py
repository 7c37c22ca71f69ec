import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leakywire import FieldSpec
from leakywire.bounds import (alpha0, bounds_report, budget_feasible, condition_met, constant_C,
                              deformation_budget, kappa, lambda2_square, lemma1_lower_bound, lemma2_check)

REL = 1e-12


class TestClosedForms:
    @pytest.mark.parametrize("a,expected", [(0.5, 1.0), (1.0, 2.0), (0.25, 2.0)])
    def test_constant_C(self, a, expected):
        assert constant_C(a) == pytest.approx(expected, rel=REL)

    @pytest.mark.parametrize("a,expected", [(1.0, math.pi**2 / 4), (0.5, math.pi**2)])
    def test_lambda2(self, a, expected):
        assert lambda2_square(a) == pytest.approx(expected, rel=REL)

    @given(a=st.floats(1e-3, 1e3))
    def test_lambda2_scaling(self, a):
        assert lambda2_square(2 * a) == pytest.approx(lambda2_square(a) / 4, rel=REL)

    def test_lambda2_is_second_separable_level(self):
        a = 0.7
        levels = sorted((math.pi / (2 * a)) ** 2 * (m * m + n * n) for m in range(4) for n in range(4))
        assert lambda2_square(a) == pytest.approx(levels[1], rel=REL)

    def test_lemma1_examples(self):
        assert lemma1_lower_bound(1.0, 1.0, 2.0, 2.0) == pytest.approx(1 / 16, rel=REL)
        assert lemma1_lower_bound(1.0, 4.0, 1.0, 2.0) == pytest.approx(1 / 128, rel=REL)

    def test_lemma1_rejects_ball_bigger_than_domain(self):
        with pytest.raises(ValueError):
            lemma1_lower_bound(2.0, 1.0, 1.0, 1.0)

    def test_alpha0_examples(self):
        assert alpha0(1.0, 1.0) == pytest.approx(1 / (2 * math.sqrt(2)), rel=REL)
        assert alpha0(0.0, 2.0) == 0.0
        assert alpha0(1e12, 2.0) == pytest.approx(1 / (2 * math.sqrt(2)), rel=1e-11)
        assert alpha0(math.inf, 2.0) == pytest.approx(1 / (2 * math.sqrt(2)), rel=REL)

    def test_condition_examples(self):
        assert condition_met(1e-6, 1.0, 0.5, 2.0)
        assert not condition_met(1e-9, 1.0, 0.0, 2.0)
        a0 = alpha0(0.3, 2.0)
        assert condition_met(a0, 1.0, 0.3, 2.0)

    def test_budget_examples(self):
        a0 = 0.37
        assert deformation_budget(a0, a0) == pytest.approx(1.0, rel=REL)
        assert deformation_budget(a0 / math.sqrt(2), a0) == pytest.approx(3.0, rel=REL)
        b = deformation_budget(2 * a0, a0)
        assert b == pytest.approx(-0.5, rel=REL) and not budget_feasible(b)


@given(kap=st.floats(1e-4, 1e3), a=st.floats(0.1, 5.0))
@settings(max_examples=50)
def test_condition_at_unit_slope_is_alpha_below_alpha0(kap, a):
    C = constant_C(a)
    a0 = alpha0(kap, C)
    for alpha in np.geomspace(a0 / 100, a0 * 100, 50):
        # decide away from the rounding band at α = α₀
        if abs(alpha / a0 - 1) < 1e-12:
            continue
        assert condition_met(alpha, 1.0, kap, C) == (alpha <= a0)
        assert budget_feasible(deformation_budget(alpha, a0)) == (alpha <= a0)


@given(kap=st.floats(1e-4, 1e3), alpha=st.floats(1e-6, 10), g=st.floats(1, 50), dg=st.floats(0, 10),
       da=st.floats(0, 10))
def test_condition_monotone(kap, alpha, g, dg, da):
    C = 2.0
    if not condition_met(alpha, g, kap, C):
        assert not condition_met(alpha + da, g + dg, kap, C)


@given(kap=st.floats(1e-4, 1e3), alpha=st.floats(1e-6, 10), g=st.floats(1, 50))
def test_condition_implies_budget_covers_slope(kap, alpha, g):
    C = 2.0
    if condition_met(alpha, g, kap, C):
        b = deformation_budget(alpha, alpha0(kap, C))
        assert b >= 1 - 1e-12 and g <= b + 1e-9 * b


class TestLemma2:
    def test_constant(self):
        t = np.linspace(0, 1, 1001)
        ok, slack = lemma2_check(np.ones_like(t), t, 0.37)
        assert ok and slack == pytest.approx(1.0, rel=1e-12)

    def test_linear(self):
        t = np.linspace(0, 1, 2001)
        ok, slack = lemma2_check(t, t, 1.0)
        assert ok and slack == pytest.approx(8 / 3 - 1, rel=1e-5)

    def test_needs_samples(self):
        with pytest.raises(ValueError):
            lemma2_check(np.ones(100), np.linspace(0, 1, 100), 0.5)

    def test_randomized_polynomials(self):
        rng = np.random.default_rng(2024)
        worst = math.inf
        for _ in range(1000):
            deg = rng.integers(0, 6)
            lo = rng.uniform(-5, 5)
            t = np.linspace(lo, lo + rng.uniform(0.01, 10), 1001)
            c = rng.normal(size=deg + 1)
            g = np.polynomial.polynomial.polyval(t - t.mean(), c)
            for k in (0, 250, 500, 1000):
                ok, slack = lemma2_check(g, t, k)
                worst = min(worst, slack)
                assert ok, (deg, c, k, slack)
        assert worst >= 0


class TestKappa:
    def test_zero_field(self):
        est = kappa(1.0, FieldSpec.zero(), 129)
        assert abs(est.value) <= 1e-8

    def test_positive_and_self_convergent(self):
        f = FieldSpec.square_bump(1.0, 0.5)
        e1 = kappa(1.0, f, 129)
        e2 = kappa(1.0, f, 257)
        assert e1.value > 0 and e2.value > 0
        # two extrapolations over nested grids agree to within the reported error
        assert abs(e1.value - e2.value) <= max(e1.error_estimate, e2.error_estimate)
        assert e2.n_coarse == 129 and e2.n_fine == 257

    def test_weaker_field_smaller_kappa(self):
        f = FieldSpec.square_bump(1.0, 0.5)
        assert kappa(1.0, f.with_scale(0.5), 129).value < kappa(1.0, f, 129).value

    def test_bounded_by_first_landau_level_scale(self):
        # Neumann ground state lies below the mean of B (trial function = constant times gauge factor)
        f = FieldSpec.square_bump(1.0, 0.5)
        assert kappa(1.0, f, 129).value < 1.0

    def test_rejects_small_grids(self):
        with pytest.raises(ValueError):
            kappa(1.0, FieldSpec.square_bump(1.0, 0.5), 65)
        with pytest.raises(ValueError):
            kappa(1.0, FieldSpec.square_bump(1.0, 0.5), 256)

    @pytest.mark.parametrize("field,c0,ball", [
        # c₀ is the lowest level of the constant-field ball inside the support: at least |b|
        (FieldSpec.square_bump(1.0, 0.5), 1.0, math.pi * 0.5**2),
        (FieldSpec.disk_bump(1.5, 0.5), 1.5, math.pi * 0.5**2),
        (FieldSpec.gaussian_truncated(2.0, 0.3, 0.5), 2.0 * math.exp(-0.5), math.pi * 0.3**2),
    ])
    def test_lemma1_bound_below_numerical_kappa(self, field, c0, ball):
        est = kappa(1.0, field, 129)
        rep = bounds_report(1.0, field, 0.01, 1.0, kappa_est=est, c0=c0, vol_ball=ball)
        assert rep.lemma1_bound is not None
        assert rep.lemma1_bound <= rep.kappa


def test_report_invariants():
    f = FieldSpec.square_bump(1.0, 0.5)
    est = kappa(1.0, f, 129)
    for alpha in (0.001, 0.006, 0.012, 0.05):
        rep = bounds_report(1.0, f, alpha, 1.2, kappa_est=est)
        assert (rep.alpha0 > 0) == (rep.kappa > 0)
        if rep.condition_met:
            assert rep.budget >= 1
        assert rep.to_dict()["C"] == 2.0
