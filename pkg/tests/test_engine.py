import math

import numpy as np
import pytest

from stablelv.engine import (ConfigError, SimConfig, UnorderedInitial,
                             _poisson_inv, make_rng, run_coupling_experiment,
                             simulate_coupled, simulate_path)
from stablelv.model import ModelParams
from stablelv.presets import canonical
from stablelv.stable_measure import StableMeasure


class TestSimConfig:
    def test_basic_validation(self):
        with pytest.raises(ConfigError):
            SimConfig(dt=0.0)
        with pytest.raises(ConfigError):
            SimConfig(eps_ext=-1.0)
        with pytest.raises(ConfigError):
            SimConfig(small_jump_mode="median")

    def test_threshold_consistency(self):
        p = ModelParams(a2=1.0, b2=1.0, x0=0.5, y0=1.0)
        with pytest.raises(ConfigError):
            SimConfig(eps_ext=0.5).check_against(p)
        with pytest.raises(ConfigError):
            SimConfig(n_max=1.0).check_against(p)
        SimConfig(eps_ext=1e-8, n_max=100.0).check_against(p)


class TestDeterministicLimits:
    def test_pure_decay_matches_ode(self):
        # with only the linear self-drift the path solves x' = -x
        p = ModelParams(a1=1.0, p1=0.0, eta1=0, eta2=0, x0=1.0, y0=1.0)
        cfg = SimConfig(dt=1e-4, horizon=1.0, eps_ext=1e-12, n_max=1e6)
        rec = simulate_path(p, cfg, 0, strict=False)
        assert rec.term_x == pytest.approx(math.exp(-1.0), abs=1e-3)
        assert rec.event == "HorizonEnd"

    def test_martingale_mean_of_pure_diffusion(self):
        # dX = sqrt(2 a2) X dB keeps E[X_t] = x0
        p = ModelParams(a2=0.5, p2=0.0, eta1=0, eta2=0, x0=1.0, y0=1.0)
        cfg = SimConfig(dt=1e-3, horizon=0.5, eps_ext=1e-12, n_max=1e9)
        n = 100000
        vals = np.array([simulate_path(p, cfg, s, strict=False).term_x
                         for s in range(n)])
        se = vals.std(ddof=1) / math.sqrt(n)
        assert abs(vals.mean() - 1.0) <= 3 * se

    def test_frozen_state_jump_count(self):
        # holding the state at 1, the big-jump counter is Poisson with the
        # tail-mass rate
        m = StableMeasure(1.5)
        a3, delta, T, dt = 1.0, 0.1, 10.0, 1e-3
        lam = m.tail_mass(delta)
        rng = make_rng(7, 0)
        reps = 200
        counts = np.array([
            sum(_poisson_inv(rng.random(), a3 * lam * dt)
                for _ in range(int(T / dt)))
            for _ in range(reps)])
        want = a3 * lam * T
        assert abs(counts.mean() - want) <= 3 * math.sqrt(want / reps)


class TestEvents:
    def test_no_extinction_without_interaction(self):
        p = canonical("no_extinction").replace(eta1=0.0, eta2=0.0)
        cfg = SimConfig(dt=1e-3, horizon=50.0, eps_ext=1e-8, n_max=1e6)
        for s in range(200):
            rec = simulate_path(p, cfg, s, strict=False)
            assert not rec.extinct_x and not rec.extinct_y

    def test_strong_interaction_kills_y(self):
        p = ModelParams(a2=0.5, p2=1.0, a3=0, b2=0.5, q2=1.0,
                        eta1=1.0, theta1=1.0, kappa1=1.0,
                        eta2=1000.0, theta2=0.0, kappa2=1.0, x0=1.0, y0=1.0)
        cfg = SimConfig(dt=1e-3, horizon=50.0, eps_ext=1e-8, n_max=1e6)
        ext = sum(simulate_path(p, cfg, s).extinct_y for s in range(100))
        assert ext / 100 > 0.9

    def test_extinction_record_fields(self):
        p = canonical("sure_extinction")
        cfg = SimConfig(dt=1e-3, horizon=50.0, eps_ext=1e-8, n_max=1e6)
        rec = simulate_path(p, cfg, 3)
        assert rec.event in ("ExtinctY", "ExtinctBoth")
        assert rec.extinct_y and rec.term_y <= cfg.eps_ext
        assert rec.event_time <= cfg.horizon
        assert rec.sup_x >= p.x0 and rec.sup_y >= p.y0

    def test_explosion_guard(self):
        p = canonical("sure_extinction").replace(x0=1.0, y0=1.0)
        cfg = SimConfig(dt=1e-3, horizon=50.0, eps_ext=1e-8, n_max=1.5)
        rec = simulate_path(p, cfg, 1)
        assert rec.event in ("Explode", "ExtinctY", "ExtinctBoth")

    def test_clamp_counter(self):
        # constant downward drift steps through zero and gets clamped
        p = ModelParams(a2=0.5, p2=1.0, b2=0.5, q2=1.0, eta1=1.0,
                        eta2=50.0, theta2=0.0, kappa2=1.0, x0=1.0, y0=0.5)
        cfg = SimConfig(dt=1e-2, horizon=10.0, eps_ext=1e-8, n_max=1e6)
        recs = [simulate_path(p, cfg, s) for s in range(20)]
        assert any(r.clamp_count > 0 for r in recs)
        assert all(r.term_x >= 0.0 and r.term_y >= 0.0 for r in recs)


def records_identical(a, b) -> bool:
    for f in ("path_seed", "event", "event_time", "term_x", "term_y",
              "sup_x", "sup_y", "clamp_count", "clamp_max"):
        if getattr(a, f) != getattr(b, f):
            return False
    for f in ("ext_x_time", "ext_y_time"):  # nan-valued when no extinction
        va, vb = getattr(a, f), getattr(b, f)
        if not (va == vb or (math.isnan(va) and math.isnan(vb))):
            return False
    return True


class TestDeterminism:
    def test_bit_identical_records(self):
        p = canonical("martingale")
        cfg = SimConfig(dt=1e-3, horizon=1.0, eps_ext=1e-8, n_max=1e6)
        a = simulate_path(p, cfg, 11)
        b = simulate_path(p, cfg, 11)
        assert records_identical(a, b)

    def test_distinct_streams(self):
        p = canonical("martingale")
        cfg = SimConfig(dt=1e-3, horizon=1.0, eps_ext=1e-8, n_max=1e6)
        a = simulate_path(p, cfg, 11)
        c = simulate_path(p, cfg, 12)
        assert a.term_x != c.term_x

    def test_master_seed_changes_paths(self):
        p = canonical("martingale")
        cfg = SimConfig(dt=1e-3, horizon=1.0, eps_ext=1e-8, n_max=1e6)
        a = simulate_path(p, cfg, 11)
        b = simulate_path(p, cfg.replace(master_seed=999), 11)
        assert a.term_x != b.term_x


class TestWeakConvergence:
    def test_terminal_cdf_stable_under_refinement(self):
        from scipy import stats
        p = canonical("martingale")
        n = 10000
        outs = []
        for dt in (1e-3, 5e-4):
            cfg = SimConfig(dt=dt, horizon=0.5, eps_ext=1e-10, n_max=1e6)
            outs.append(np.array([
                simulate_path(p, cfg, s).term_x for s in range(n)]))
        stat = stats.ks_2samp(outs[0], outs[1]).statistic
        assert stat < 0.02


class TestCoupled:
    def test_identical_initials_identical_paths(self):
        p = canonical("coupling")
        cfg = SimConfig(dt=1e-3, horizon=1.0, eps_ext=1e-10, n_max=1e7)
        flags, mags, states, n_done = simulate_coupled(
            p, cfg, (1.0, 1.0), (1.0, 1.0), 0)
        assert n_done > 0
        assert np.all(flags[:n_done] == 0)
        assert np.allclose(states[:n_done, 0], states[:n_done, 2])
        assert np.allclose(states[:n_done, 1], states[:n_done, 3])

    def test_unordered_initials_rejected(self):
        p = canonical("coupling")
        cfg = SimConfig(dt=1e-3, horizon=1.0)
        with pytest.raises(UnorderedInitial):
            simulate_coupled(p, cfg, (1.0, 1.0), (0.5, 1.0), 0)
        with pytest.raises(UnorderedInitial):
            simulate_coupled(p, cfg, (1.0, 1.0), (2.0, 2.0), 0)

    def test_violation_rate_small_and_dt_decreasing(self):
        p = canonical("coupling")
        fracs = {}
        for dt, n in ((1e-3, 150), (1e-4, 150)):
            cfg = SimConfig(dt=dt, horizon=1.0, eps_ext=1e-10, n_max=1e7)
            rep = run_coupling_experiment(p, cfg, (1.0, 1.0), (2.0, 0.5),
                                          n_paths=n)
            fracs[dt] = rep.violation_fraction
        assert fracs[1e-3] < 0.01
        assert fracs[1e-4] <= fracs[1e-3]
