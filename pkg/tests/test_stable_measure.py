import math

import mpmath
import numpy as np
import pytest
from scipy import stats

from stablelv.quadrature import NonConvergent
from stablelv.stable_measure import (LEMMA32_KINDS, NonIntegrable,
                                     StableMeasure, gamma, lemma32_integral,
                                     lemma32_quadrature)

mpmath.mp.dps = 40


class TestGammaOracle:
    def test_wrapper_matches_high_precision(self):
        xs = np.concatenate([np.linspace(0.01, 1, 40),
                             np.linspace(1, 30, 60)])
        for x in xs:
            want = float(mpmath.gamma(float(x)))
            assert abs(gamma(float(x)) - want) <= 1e-13 * abs(want)

    def test_normalization_constant(self):
        for a in (1.05, 1.1, 1.3, 1.5, 1.7, 1.9, 1.95):
            m = StableMeasure(a)
            want = float(a * (a - 1) / (mpmath.gamma(a) * mpmath.gamma(2 - a)))
            assert m.c_alpha > 0
            assert abs(m.c_alpha - want) <= 1e-14 * want

    def test_index_range_enforced(self):
        for bad in (1.0, 2.0, 0.5, 2.5):
            with pytest.raises(ValueError):
                StableMeasure(bad)


class TestTailMass:
    def test_reference_value_is_one_over_pi(self):
        # Gamma(1.5) Gamma(0.5) = pi/2 collapses the constant
        m = StableMeasure(1.5)
        assert m.tail_mass(1.0) == pytest.approx(1.0 / math.pi, rel=1e-14)

    def test_vanishes_at_infinity(self):
        m = StableMeasure(1.5)
        assert m.tail_mass(math.inf) == 0.0
        assert m.tail_mass(1e12) < 1e-17

    def test_against_quadrature(self):
        m = StableMeasure(1.9)
        want = m.c_alpha * 0.5 ** -1.9 / 1.9
        assert m.tail_mass(0.5) == pytest.approx(want, rel=1e-15)
        from scipy.integrate import quad
        got, _ = quad(lambda z: float(m.density(z)), 0.5, np.inf)
        assert m.tail_mass(0.5) == pytest.approx(got, rel=1e-10)

    def test_diverges_at_origin(self):
        m = StableMeasure(1.5)
        assert m.tail_mass(1e-200) > 1e290
        with pytest.raises(NonIntegrable):
            m.tail_mass(0.0)

    def test_additivity_over_disjoint_intervals(self):
        m = StableMeasure(1.3)
        for d1, d2 in ((0.1, 0.5), (0.5, 2.0), (1e-3, 1e3)):
            direct = m.c_alpha * (d1 ** -m.alpha - d2 ** -m.alpha) / m.alpha
            assert m.tail_mass(d1) - m.tail_mass(d2) == pytest.approx(
                direct, rel=1e-12)


class TestTruncatedMoment:
    def test_second_moment_reference(self):
        m = StableMeasure(1.5)
        assert m.truncated_moment(2, 0.0, 1.0) == pytest.approx(
            m.c_alpha / 0.5, rel=1e-14)
        assert m.truncated_moment(2, 0.0, 1.0) == pytest.approx(
            0.954929658551372, rel=1e-12)

    def test_first_moment_reference(self):
        m = StableMeasure(1.5)
        assert m.truncated_moment(1, 1.0, math.inf) == pytest.approx(
            m.c_alpha / 0.5, rel=1e-14)

    def test_against_quadrature(self):
        from scipy.integrate import quad
        m = StableMeasure(1.7)
        got, _ = quad(lambda z: z * float(m.density(z)), 0.25, 4.0)
        assert m.truncated_moment(1, 0.25, 4.0) == pytest.approx(got, rel=1e-10)
        got, _ = quad(lambda z: z * z * float(m.density(z)), 0.0, 2.0)
        assert m.truncated_moment(2, 0.0, 2.0) == pytest.approx(got, rel=1e-10)

    def test_divergent_requests_raise(self):
        m = StableMeasure(1.5)
        with pytest.raises(NonIntegrable):
            m.truncated_moment(1, 0.0, math.inf)
        with pytest.raises(NonIntegrable):
            m.truncated_moment(1, 0.0, 1.0)
        with pytest.raises(NonIntegrable):
            m.truncated_moment(2, 0.5, math.inf)

    def test_divergence_in_the_limit(self):
        # infinite mass near 0 and infinite first moment show up as blow-ups
        # of the truncated forms
        m = StableMeasure(1.5)
        assert m.truncated_moment(1, 1e-200, 1.0) > 1e90
        assert m.truncated_moment(2, 0.0, 1e200) > 1e90


class TestLemma32:
    def test_gamma_cancellation_case(self):
        # beta = 1 collapses the first closed form to alpha
        m = StableMeasure(1.5)
        assert lemma32_integral(m, "neg_power_linear", 1.0) == pytest.approx(
            1.5, rel=1e-14)

    def test_one_over_pi_case(self):
        m = StableMeasure(1.5)
        assert lemma32_integral(m, "pos_power_compensated", 0.5) == \
            pytest.approx(-1.0 / math.pi, rel=1e-14)

    def test_pos_power_linear_reference(self):
        m = StableMeasure(1.8)
        want = float(0.9 * mpmath.gamma(0.3)
                     / (mpmath.gamma(1.8) * mpmath.gamma(0.5)))
        got = lemma32_integral(m, "pos_power_linear", 0.5)
        assert got == pytest.approx(want, rel=1e-13)
        assert got == pytest.approx(1.63094, rel=1e-5)
        assert got == pytest.approx(lemma32_quadrature(m, "pos_power_linear", 0.5),
                                    rel=1e-9)

    def test_admissible_ranges(self):
        m = StableMeasure(1.5)
        for kind in LEMMA32_KINDS:
            with pytest.raises(ValueError):
                lemma32_integral(m, kind, 0.0)
        with pytest.raises(ValueError):
            lemma32_integral(m, "pos_power_linear", 0.5)  # pole guard
        with pytest.raises(ValueError):
            lemma32_integral(m, "pos_power_compensated", 1.0)
        with pytest.raises(ValueError):
            lemma32_integral(m, "bogus", 1.0)

    def test_quadrature_agreement_grid(self):
        for a in (1.1, 1.5, 1.9):
            m = StableMeasure(a)
            cases = [("neg_power_linear", b) for b in (0.2, 1.0, 4.0)]
            cases += [("neg_power_compensated", b) for b in (0.2, 1.0, 4.0)]
            cases += [("pos_power_linear", f * (a - 1 - 2e-6))
                      for f in (0.3, 0.7)]
            cases += [("pos_power_compensated", b) for b in (0.2, 0.8)]
            for kind, b in cases:
                closed = lemma32_integral(m, kind, b)
                quad = lemma32_quadrature(m, kind, b)
                assert abs(quad - closed) <= 1e-8 * abs(closed), (a, kind, b)


class TestSampleJump:
    def test_boundary_draw(self):
        m = StableMeasure(1.5)
        assert m.sample_jump(0.3, 1.0) == pytest.approx(0.3)

    def test_inverse_cdf_reference(self):
        m = StableMeasure(1.5)
        assert m.sample_jump(0.01, 0.5) == pytest.approx(
            0.01 * 2 ** (2.0 / 3.0), rel=1e-14)
        assert m.sample_jump(0.01, 0.5) == pytest.approx(0.015874, rel=1e-4)

    def test_rejects_bad_inputs(self):
        m = StableMeasure(1.5)
        with pytest.raises(ValueError):
            m.sample_jump(0.0, 0.5)
        with pytest.raises(ValueError):
            m.sample_jump(0.1, 0.0)
        with pytest.raises(ValueError):
            m.sample_jump(0.1, 1.5)

    def test_survival_matches_pareto_ks(self):
        m = StableMeasure(1.5)
        rng = np.random.default_rng(12345)
        u = 1.0 - rng.random(100000)
        draws = m.sample_jump(0.01, u)
        stat, _ = stats.kstest(draws, lambda z: 1.0 - (z / 0.01) ** -1.5)
        assert stat < 0.01

    def test_median(self):
        m = StableMeasure(1.7)
        rng = np.random.default_rng(99)
        u = 1.0 - rng.random(100000)
        draws = m.sample_jump(2.0, u)
        assert np.median(draws) == pytest.approx(2.0 * 2 ** (1 / 1.7), rel=0.01)
