import math

import numpy as np
import pytest

from stablelv.criteria import (ConstantsFound, GridCertificate, SearchFailed,
                               check_bump_curvature_bounds,
                               check_bump_derivative_bound,
                               check_exp_ratio_domination,
                               check_generator_bound, check_H_lower_bound,
                               check_htilde_positivity, check_prop24_bump,
                               check_prop25_conditions, check_young,
                               find_bound_constant, hbound_min,
                               htilde_min_margin, search_bump_left_constants,
                               young_margin)
from stablelv.functions import Bump, LogX, PowerRatio, TestFunction, make
from stablelv.model import ModelParams, classify, derived_exponents
from stablelv.generator import apply_generator
from stablelv.presets import canonical, subcase_params


class TestYoung:
    def test_symmetric_equality_case(self):
        assert young_margin(1.0, 1.0, 2.0) == pytest.approx(0.0, abs=1e-14)

    def test_zero_edge(self):
        assert young_margin(0.0, 3.0, 2.0) == pytest.approx(3.0)

    def test_reference_arithmetic(self):
        # 4 + 1 >= 2 * 2 * 1
        assert young_margin(4.0, 1.0, 2.0) == pytest.approx(1.0)

    def test_random_certificate(self):
        cert = check_young(n_samples=10000, seed=0)
        assert cert.passed
        assert cert.worst_margin > 0.0

    def test_zero_margin_is_not_a_pass(self):
        cert = GridCertificate("x", {}, (1,), 0.0, (0.0,))
        assert not cert.passed


class _Const(TestFunction):
    family = "const"

    def value(self, x, y):
        return 1.0 + 0.0 * np.asarray(x)

    def dx(self, x, y):
        return 0.0 * np.asarray(x)

    dy = dxx = dyy = dx


class TestGeneratorBound:
    def test_log_profile_generator_structure(self):
        # for a function of the first coordinate only, the generator is the
        # interaction ridge plus self terms; the cross-component terms vanish
        p = canonical("no_extinction")
        g = LogX(4.0)
        t = apply_generator(p, g, 0.5, 2.0)
        assert t.drift_y == 0.0 and t.diff_y == 0.0 and t.jump_y == 0.0
        assert t.interaction_y == 0.0
        want = p.eta1 * 0.5 ** (p.theta1 - 1.0) * 2.0 ** p.kappa1
        assert t.interaction_x == pytest.approx(want, rel=1e-12)

    def test_log_profile_upper_bound_certified(self):
        p = canonical("no_extinction")
        g = LogX(4.0)
        region = (0.05, 4.0, 0.05, 4.0)
        d = find_bound_constant(p, g, region, "<=", resolution=(8, 8)) + 0.1
        cert = check_generator_bound(p, g, region, "<=", d, resolution=(12, 12))
        assert cert.passed

    def test_trivial_bound_fails_strictly(self):
        p = canonical("no_extinction")
        cert = check_generator_bound(p, _Const(), (0.5, 2.0, 0.5, 2.0),
                                     "<=", 0.0, resolution=(4, 4))
        assert cert.worst_margin == pytest.approx(0.0, abs=1e-9)
        assert not cert.passed

    def test_escape_function_lower_bound_search(self):
        # the unit-square escape function admits a positive lower-bound
        # constant once the amplitudes are large enough
        p = canonical("partial_extinction")
        found = None
        for lam in (5.0, 10.0):
            g = make("exp_tan", lam1=lam, lam2=lam, rho=0.25, delta=1.5)
            d = find_bound_constant(p, g, (0.1, 0.9, 0.1, 0.9), ">=",
                                    resolution=(9, 9), value_floor=1e-280)
            if d > 0.0:
                found = (lam, d)
                break
        assert found is not None
        lam, d = found
        g = make("exp_tan", lam1=lam, lam2=lam, rho=0.25, delta=1.5)
        cert = check_generator_bound(p, g, (0.1, 0.9, 0.1, 0.9), ">=",
                                     0.1 * d, resolution=(11, 11),
                                     value_floor=1e-280)
        assert cert.passed


class TestBumpInequalities:
    def test_slope_bound_across_support(self):
        for lam, lam1 in ((10.0, 73.0), (10.0, 1.0), (3.0, 0.5)):
            cert = check_bump_derivative_bound(
                Bump(1.0, 3.0, lam=lam, lam1=lam1), n_grid=200)
            assert cert.passed

    def test_left_region_constants_found(self):
        b, c, cert = search_bump_left_constants(1.0, 2.0, 3.0, 1.5)
        assert cert.passed
        assert c["c0_curvature"] > 0.0 and c["c0_jump"] > 0.0
        # the peak must lie beyond the checked interval for these bounds
        assert b.lam1 < ((3.0 - 2.0) / (2.0 - 1.0)) ** 2

    def test_full_support_constants_found(self):
        b = Bump(1.0, 3.0, lam=10.0, lam1=1.0, x2=2.0)
        c, cert = check_bump_curvature_bounds(b, 1.5, full_support=True)
        assert cert.passed
        assert c["c0"] > 0.0 and c["c1"] > 0.0

    def test_full_support_needs_slack(self):
        # without the additive slack the curvature bound is false at the
        # peak, where the profile curves downward
        b = Bump(1.0, 3.0, lam=10.0, lam1=1.0, x2=2.0)
        assert float(b.ratio_d2(2.0)) < 0.0


class TestExpRatioDomination:
    def test_domination_over_draws(self):
        cert = check_exp_ratio_domination(n_draws=30, seed=5)
        assert cert.passed
        assert cert.worst_margin > 0.0


class TestPositivityCertificates:
    @pytest.mark.parametrize("sc", ["iia", "iib", "iic", "iid"])
    def test_partial_subcases_certify(self, sc):
        c, cert = check_htilde_positivity(subcase_params(sc), sc,
                                          resolution=100)
        assert cert.passed
        assert 0.0 < c["delta"] < 1.0 / c["beta"]
        assert 0.0 < c["rho"] < 1.0
        # resolution robustness
        m2, _ = htilde_min_margin(subcase_params(sc), c.values, c["z_star"],
                                  c["eps0"], 200)
        assert m2 > 0.0

    def test_wrong_regime_is_rejected(self):
        with pytest.raises(SearchFailed):
            check_htilde_positivity(subcase_params("iiia"), "iia")
        with pytest.raises(SearchFailed):
            check_htilde_positivity(subcase_params("iia"), "iib")

    @pytest.mark.parametrize("sc", ["iiia", "iiib"])
    def test_sure_subcases_certify(self, sc):
        c, cert = check_H_lower_bound(subcase_params(sc), sc, resolution=100)
        assert cert.passed
        assert c["c0"] > 0.0
        v2, _ = hbound_min(subcase_params(sc), c["r"], c["beta"], c["eps"], 200)
        assert v2 - c["c0"] > 0.0

    def test_sure_wrong_regime_rejected(self):
        with pytest.raises(SearchFailed):
            check_H_lower_bound(subcase_params("iia"), "iiia")

    def test_unknown_subcase(self):
        with pytest.raises(ValueError):
            check_htilde_positivity(subcase_params("iia"), "v")
        with pytest.raises(ValueError):
            check_H_lower_bound(subcase_params("iiia"), "iia")


def _random_strict_params(rng):
    def coeffs():
        c = [0.0, 0.0, 0.0]
        e = [0.0, 0.0, 0.0]
        idx = rng.permutation(3)[:rng.integers(1, 4)]
        for i in idx:
            c[i] = float(10 ** rng.uniform(-0.7, 0.7))
            e[i] = float(rng.uniform(0, 2.5))
        if c[1] == 0.0 and c[2] == 0.0:
            c[1] = 1.0
            e[1] = float(rng.uniform(0, 2.5))
        return c, e

    (a1, a2, a3), (p1, p2, p3) = coeffs()
    (b1, b2, b3), (q1, q2, q3) = coeffs()
    return ModelParams(
        a1=a1, a2=a2, a3=a3, p1=p1, p2=p2, p3=p3,
        alpha1=float(rng.uniform(1.1, 1.9)),
        eta1=float(10 ** rng.uniform(-0.5, 0.5)),
        theta1=float(rng.uniform(1.0, 2.5)),
        kappa1=float(rng.uniform(0.2, 2.5)),
        b1=b1, b2=b2, b3=b3, q1=q1, q2=q2, q3=q3,
        alpha2=float(rng.uniform(1.1, 1.9)),
        eta2=float(10 ** rng.uniform(-0.5, 0.5)),
        theta2=float(rng.uniform(0.0, 0.95)),
        kappa2=float(rng.uniform(0.2, 2.5)),
        x0=1.0, y0=1.0)


def _comfortably_inside(p, v) -> bool:
    """Relative margin >= 0.3 on every fired defining inequality.

    Near-critical sets need certificate regions below float range (the
    required size scales like exp(-1/margin)), so the concordance claim is
    sampled away from the boundary.
    """
    d = derived_exponents(p)
    den = d.q + 1 - p.theta2
    for tag in v.fired_conditions:
        sc = tag[tag.index("(") + 1:tag.index(")")]
        if sc == "iia":
            rhs = p.kappa2 * d.q / den
            if not (rhs > 0 and (rhs - d.p) / rhs >= 0.3):
                return False
        elif sc == "iib":
            rhs = p.kappa2 / (1 - p.theta2)
            if not (rhs - d.b / d.a) / rhs >= 0.3:
                return False
        elif sc == "iic":
            rhs = p.kappa2 * (d.q - p.kappa1) / den
            if not (rhs > 0 and (rhs - (p.theta1 - 1)) / rhs >= 0.3):
                return False
        elif sc == "iid":
            rhs = p.kappa2 / (p.kappa1 + 1 - p.theta2)
            if not (rhs - d.b / p.eta1) / rhs >= 0.3:
                return False
        elif sc == "iiia":
            rhs = p.kappa2 * d.q / den
            if not (d.p > 0 and (d.p - rhs) / d.p >= 0.3):
                return False
            cross = p.kappa2 * (d.q - p.kappa1) / den
            if not (p.theta1 - 1) - cross >= 0.3 * max(abs(cross), 0.1):
                return False
        elif sc == "iiib":
            rhs = p.kappa2 / (1 - p.theta2)
            if not (d.b / d.a - rhs) / (d.b / d.a) >= 0.3:
                return False
    return True


def test_classifier_criteria_concordance():
    """Constants are found for random sets the classifier marks partial or
    sure, 50 of each, sampled comfortably inside their subcases."""
    rng = np.random.default_rng(20240809)
    n_partial = n_sure = 0
    tries = 0
    while (n_partial < 50 or n_sure < 50) and tries < 100000:
        tries += 1
        p = _random_strict_params(rng)
        v = classify(p)
        if v.verdict == "PartialExtinctionY" and n_partial < 50 \
                and _comfortably_inside(p, v):
            n_partial += 1
            for tag in v.fired_conditions:
                sc = tag[tag.index("(") + 1:tag.index(")")]
                check_htilde_positivity(p, sc, resolution=100)
        elif v.verdict == "SureExtinctionY" and n_sure < 50 \
                and _comfortably_inside(p, v):
            n_sure += 1
            for tag in v.fired_conditions:
                if tag == "T1.2(iii)":
                    continue
                sc = tag[tag.index("(") + 1:tag.index(")")]
                check_H_lower_bound(p, sc, resolution=100)
    assert n_partial == 50 and n_sure == 50


class TestProp24:
    def test_reachability_certified(self):
        p = canonical("no_extinction")
        c, cert = check_prop24_bump(
            p, box=(1.0, 2.0, 1.0, 2.0), envelope=(0.5, 3.0, 0.1, 3.0),
            start=(1.5, 0.5), resolution=(8, 8))
        assert cert.passed
        assert c["d"] > 0.0

    def test_boundary_zeros_checked(self):
        # the certificate construction asserts the product vanishes on the
        # envelope frame; spot-check the function directly as well
        gx = Bump(1.0, 2.0, 30.0, 1.0)
        gy = Bump(0.3, 3.0, 30.0, 1.0)
        from stablelv.functions import BumpProduct
        g = BumpProduct(gx, gy)
        assert g.value(0.5, 0.5) == 0.0
        assert g.value(1.5, 0.1) == 0.0
        assert g.value(3.0, 1.5) == 0.0

    def test_start_inside_box_rejected(self):
        p = canonical("no_extinction")
        with pytest.raises(ValueError):
            check_prop24_bump(p, box=(1.0, 2.0, 1.0, 2.0),
                              envelope=(0.5, 3.0, 0.1, 3.0), start=(1.5, 1.5))

    def test_envelope_must_enclose(self):
        p = canonical("no_extinction")
        with pytest.raises(ValueError):
            check_prop24_bump(p, box=(1.0, 2.0, 1.0, 2.0),
                              envelope=(1.5, 3.0, 0.1, 3.0), start=(1.7, 0.5))


class TestProp25:
    @pytest.fixture(scope="class")
    def chain(self):
        p = subcase_params("iia")
        c, _ = check_htilde_positivity(p, "iia")
        g = PowerRatio(beta=c["beta"], delta=c["delta"], rho=c["rho"])
        return p, c, g

    def test_chain_certifies(self, chain):
        p, c, g = chain
        cert = check_prop25_conditions(p, g, u_star=c["z_star"],
                                       eps0=c["eps0"])
        assert cert.passed
        assert cert.extra["envelope_worst"] > 0.0

    def test_ratio_boundary_excluded(self, chain):
        p, c, g = chain
        cert = check_prop25_conditions(p, g, u_star=c["z_star"],
                                       eps0=c["eps0"])
        # grid starts strictly above the ratio threshold
        assert cert.region["u_star"] == c["z_star"]
        x, y = cert.worst_point
        assert y * x ** -g.beta > c["z_star"]

    def test_generous_region_fails(self, chain):
        p, c, g = chain
        with pytest.raises(SearchFailed):
            check_prop25_conditions(p, g, u_star=c["z_star"], eps0=10.0)
