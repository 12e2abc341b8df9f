"""Acceptance gate: every quantitative criterion at its stated tolerance.

Each test prints one [PASS]/[FAIL] line (visible with `pytest -s`; the
test name itself carries the criterion number for plain `pytest -v`).
Thresholds are pinned here and nowhere else.
"""

import math
import time

import numpy as np
import pytest

from stablelv.criteria import (SearchFailed, check_bump_curvature_bounds,
                               check_bump_derivative_bound,
                               check_exp_ratio_domination,
                               check_H_lower_bound, check_htilde_positivity,
                               hbound_min, htilde_min_margin,
                               search_bump_left_constants)
from stablelv.engine import SimConfig, run_coupling_experiment, simulate_path
from stablelv.experiments import (run_extinction_campaign,
                                  run_martingale_check, write_paths_csv,
                                  _record_row)
from stablelv.functions import Bump, PowerRatio
from stablelv.generator import jump_integral
from stablelv.model import classify
from stablelv.presets import canonical, subcase_params
from stablelv.stable_measure import (StableMeasure, lemma32_integral,
                                     lemma32_quadrature)


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_1_reference_integral_identities():
    """Four closed-form jump integrals vs singularity-split quadrature."""
    t0 = time.time()
    worst = 0.0
    cells = 0
    for a in (1.1, 1.3, 1.5, 1.7, 1.9):
        m = StableMeasure(a)
        grids = {
            "neg_power_linear": (0.1, 0.5, 1.0, 2.0, 5.0, 10.0),
            "neg_power_compensated": (0.1, 0.5, 1.0, 2.0, 5.0, 10.0),
            "pos_power_linear": tuple(f * (a - 1.0 - 2e-6)
                                      for f in (0.2, 0.5, 0.8)),
            "pos_power_compensated": (0.1, 0.3, 0.5, 0.7, 0.9),
        }
        for kind, betas in grids.items():
            for b in betas:
                closed = lemma32_integral(m, kind, b)
                quad = lemma32_quadrature(m, kind, b)
                worst = max(worst, abs(quad - closed) / abs(closed))
                cells += 1
    elapsed = time.time() - t0
    report("criterion 1 (closed-form integral identities)",
           cells >= 100 and worst < 1e-8 and elapsed < 10.0,
           f"{cells} cells, worst rel err {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_power_ratio_jump_closed_forms():
    """Catalog closed forms match generic jump quadrature on a grid."""
    t0 = time.time()
    shapes = [(2.0, 0.25, 0.5), (1.0, 0.6, 0.3), (4.0, 0.125, 0.8)]
    worst = 0.0
    m1, m2 = StableMeasure(1.5), StableMeasure(1.7)
    grid = np.linspace(0.1, 2.0, 5)
    for beta, delta, rho in shapes:
        g = PowerRatio(beta=beta, delta=delta, rho=rho)
        for x in grid:
            for y in grid:
                c1, c2 = g.closed_jump_integrals(float(x), float(y), m1, m2)
                q1 = jump_integral(g, float(x), float(y), "first", m1)
                q2 = jump_integral(g, float(x), float(y), "second", m2)
                worst = max(worst,
                            abs(q1 - c1) / (1.0 + abs(c1)),
                            abs(q2 - c2) / (1.0 + abs(c2)))
    elapsed = time.time() - t0
    report("criterion 2 (catalog jump closed forms)",
           worst < 1e-8 and elapsed < 30.0,
           f"3 shapes x 5x5 grid, worst scaled err {worst:.2e}, {elapsed:.1f}s")


def _martingale_stats(dt: float, n_paths: int):
    p = canonical("martingale")
    cfg = SimConfig(dt=dt, horizon=1.0, eps_ext=1e-8, n_max=1e6)
    g = PowerRatio(beta=2.0, delta=0.25, rho=0.5)
    return run_martingale_check(p, g, (0.1, 0.5, 1.0), n_paths, cfg)


def test_criterion_3_martingale_consistency():
    """Zero mean of the compensated value process, bias stable under dt/2."""
    t0 = time.time()
    full = _martingale_stats(1e-3, 10000)
    half = _martingale_stats(5e-4, 10000)
    ok_level = (full["boundary_contacts"] == 0
                and half["boundary_contacts"] == 0
                and all(r <= 3.0 for r in full["abs_mean_over_se"])
                and all(r <= 3.0 for r in half["abs_mean_over_se"]))
    # bias shrinks or holds: any growth must stay within joint noise
    ok_trend = all(
        abs(mh) <= abs(mf) + 2.0 * (sh + sf)
        for mh, mf, sh, sf in zip(half["means"], full["means"],
                                  half["ses"], full["ses"]))
    elapsed = time.time() - t0
    report("criterion 3 (martingale consistency)",
           ok_level and ok_trend and elapsed < 300.0,
           f"dt=1e-3 ratios {[f'{r:.2f}' for r in full['abs_mean_over_se']]}, "
           f"dt=5e-4 ratios {[f'{r:.2f}' for r in half['abs_mean_over_se']]}, "
           f"{elapsed:.0f}s")


def test_criterion_4_comparison_coupling():
    """Ordering violations rare at dt=1e-3 and strictly rarer at dt=1e-4."""
    t0 = time.time()
    p = canonical("coupling")
    fracs = {}
    for dt in (1e-3, 1e-4):
        cfg = SimConfig(dt=dt, horizon=1.0, eps_ext=1e-10, n_max=1e7)
        rep = run_coupling_experiment(p, cfg, (1.0, 1.0), (1.02, 0.98),
                                      n_paths=1000, n_checkpoints=100)
        fracs[dt] = rep.violation_fraction
    elapsed = time.time() - t0
    report("criterion 4 (comparison-theorem coupling)",
           0.0 < fracs[1e-3] < 0.01 and fracs[1e-4] < fracs[1e-3]
           and elapsed < 300.0,
           f"violation fraction {fracs[1e-3]:.5f} at dt=1e-3, "
           f"{fracs[1e-4]:.5f} at dt=1e-4, {elapsed:.0f}s")


def test_criterion_5_regime_concordance():
    """Canonical sets reproduce the null / interior / certain patterns."""
    t0 = time.time()
    details = []
    ok = True

    cfg = SimConfig(dt=1e-3, horizon=50.0)
    s_no = run_extinction_campaign(canonical("no_extinction"), cfg, 2000)
    upper = max(s_no.cells[(t, e)][3] for t in (10.0, 25.0, 50.0)
                for e in (1e-6, 1e-8))
    ok &= s_no.verdict == "NoExtinctionEither" and upper <= 0.05 \
        and s_no.eps_gap < 0.05 and s_no.consistent
    details.append(f"null: upper CI {upper:.4f}, gap {s_no.eps_gap:.4f}")

    s_pt = run_extinction_campaign(canonical("partial_extinction"), cfg, 2000)
    ok &= s_pt.verdict == "PartialExtinctionY" \
        and 0.05 <= s_pt.frequency <= 0.95 and s_pt.eps_gap < 0.05 \
        and s_pt.consistent
    details.append(f"interior: freq {s_pt.frequency:.3f}, gap {s_pt.eps_gap:.4f}")

    s_su = run_extinction_campaign(canonical("sure_extinction"), cfg, 2000)
    freqs = [s_su.cells[(t, 1e-8)][1] for t in (10.0, 25.0, 50.0)]
    ok &= s_su.verdict == "SureExtinctionY" and s_su.frequency >= 0.8 \
        and freqs == sorted(freqs) and s_su.eps_gap < 0.05 and s_su.consistent
    details.append(f"certain: freq ladder {freqs}, gap {s_su.eps_gap:.4f}")

    elapsed = time.time() - t0
    ok &= elapsed < 900.0
    report("criterion 5 (regime concordance)", bool(ok),
           "; ".join(details) + f", {elapsed:.0f}s")


def test_criterion_6_positivity_certificates():
    """Constant searches succeed on all six subcases, stably, and fail on
    a wrong-regime set."""
    details = []
    for sc in ("iia", "iib", "iic", "iid"):
        c, cert = check_htilde_positivity(subcase_params(sc), sc,
                                          resolution=200)
        m2, _ = htilde_min_margin(subcase_params(sc), c.values, c["z_star"],
                                  c["eps0"], 400)
        assert cert.worst_margin > 0.0 and m2 > 0.0, sc
        details.append(f"{sc}:{cert.worst_margin:.1e}")
    for sc in ("iiia", "iiib"):
        c, cert = check_H_lower_bound(subcase_params(sc), sc, resolution=200)
        v2, _ = hbound_min(subcase_params(sc), c["r"], c["beta"], c["eps"], 400)
        assert cert.worst_margin > 0.0 and v2 - c["c0"] > 0.0, sc
        details.append(f"{sc}:{cert.worst_margin:.1e}")
    with pytest.raises(SearchFailed):
        check_htilde_positivity(subcase_params("iiia"), "iia")
    with pytest.raises(SearchFailed):
        check_H_lower_bound(subcase_params("iia"), "iiia")
    report("criterion 6 (positivity certificates)", True,
           "margins " + " ".join(details) + "; wrong-regime rejected")


def test_criterion_7_bump_and_domination_inequalities():
    """Profile inequalities and certified lower bounds: zero violations."""
    slope = check_bump_derivative_bound(Bump(1.0, 3.0, lam=10.0, lam1=73.0),
                                        n_grid=200)
    _, _, left = search_bump_left_constants(1.0, 2.0, 3.0, 1.5)
    full_c, full = check_bump_curvature_bounds(
        Bump(1.0, 3.0, lam=10.0, lam1=1.0, x2=2.0), 1.5, full_support=True)
    dom = check_exp_ratio_domination(n_draws=100, seed=1)
    ok = slope.passed and left.passed and full.passed and dom.passed
    report("criterion 7 (bump and domination inequalities)", ok,
           f"slope {slope.worst_margin:.2e}, left {left.worst_margin:.2e}, "
           f"full {full.worst_margin:.2e}, domination {dom.worst_margin:.2e} "
           f"over 100 draws")


def test_criterion_8_interaction_free_null():
    """No extinction events at all without the cross drifts."""
    t0 = time.time()
    p = canonical("no_extinction").replace(eta1=0.0, eta2=0.0)
    cfg = SimConfig(dt=1e-3, horizon=50.0, eps_ext=1e-8, n_max=1e6)
    events = 0
    for seed in range(1000):
        rec = simulate_path(p, cfg, seed, strict=False)
        events += int(rec.extinct_x) + int(rec.extinct_y)
    elapsed = time.time() - t0
    report("criterion 8 (interaction-free null)", events == 0,
           f"0 extinction events required, saw {events} in 1000 paths, "
           f"{elapsed:.0f}s")


def test_criterion_9_campaign_determinism(tmp_path):
    """Byte-identical campaign artifacts across worker counts."""
    p = canonical("sure_extinction")
    cfg = SimConfig(dt=1e-3, horizon=5.0)
    outputs = {}
    for workers in (1, 8):
        out = tmp_path / f"w{workers}"
        run_extinction_campaign(p, cfg, 200, ladder=(2.0, 5.0),
                                workers=workers, out_dir=str(out))
        outputs[workers] = ((out / "paths.csv").read_bytes(),
                            (out / "summary.json").read_bytes())
    ok = outputs[1] == outputs[8]
    report("criterion 9 (campaign determinism)", ok,
           f"paths.csv {len(outputs[1][0])} bytes identical across "
           f"workers 1 and 8: {ok}")
