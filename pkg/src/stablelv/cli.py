"""Command-line interface: classification, analytics checks and campaigns.

Every subcommand reads model parameters from ``--preset``, ``--config``
(key = value file) and repeated ``--set name=value`` overrides, in that
order of precedence (later wins).  Outputs are CSV files plus one JSON
summary per run when ``--out`` is given, otherwise stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import criteria, experiments
from .config import load_kv
from .engine import SimConfig, run_coupling_experiment, simulate_path
from .functions import PowerRatio, make
from .generator import apply_generator, jump_integral
from .model import ModelParams, classify, validate
from .presets import CANONICAL, SUBCASE_SETS, canonical, subcase_params
from .stable_measure import (LEMMA32_KINDS, StableMeasure, lemma32_integral,
                             lemma32_quadrature)

__all__ = ["main"]


def _collect_mapping(args) -> dict:
    mapping: dict = {}
    if getattr(args, "config", None):
        mapping.update(load_kv(args.config))
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise SystemExit(f"--set expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        mapping[k.strip()] = v.strip()
    return mapping


def _params_from(args) -> ModelParams:
    base = canonical(args.preset) if getattr(args, "preset", None) else ModelParams()
    mapping = _collect_mapping(args)
    merged = {**base.as_dict(), **{k: v for k, v in mapping.items()
                                   if k in base.as_dict()}}
    params = ModelParams.from_mapping(merged)
    return validate(params, strict=not args.relaxed)


def _sim_from(args) -> SimConfig:
    mapping = _collect_mapping(args)
    cfg = SimConfig.from_mapping(mapping)
    if args.seed is not None:
        cfg = cfg.replace(master_seed=args.seed)
    return cfg


def _out_stream(args, name: str):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        return open(os.path.join(args.out, name), "w", newline="",
                    encoding="utf-8")
    return sys.stdout


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def cmd_classify(args) -> int:
    params = _params_from(args)
    verdict = classify(params)
    text = verdict.to_json()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "verdict.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_integrals(args) -> int:
    alphas = [float(a) for a in args.alpha.split(",")]
    kinds = args.kind.split(",") if args.kind else list(LEMMA32_KINDS)
    betas = [float(b) for b in args.beta.split(",")]
    fh = _out_stream(args, "integrals.csv")
    w = _writer(fh)
    w.writerow(("alpha", "kind", "beta", "closed_form", "quadrature", "rel_err"))
    for a in alphas:
        m = StableMeasure(a)
        for kind in kinds:
            for b in betas:
                try:
                    closed = lemma32_integral(m, kind, b)
                except ValueError:
                    continue
                quad = lemma32_quadrature(m, kind, b)
                rel = abs(quad - closed) / max(1e-300, abs(closed))
                w.writerow((repr(a), kind, repr(b), repr(closed), repr(quad),
                            repr(rel)))
    if fh is not sys.stdout:
        fh.close()
    return 0


def cmd_generator_check(args) -> int:
    params = _params_from(args)
    g = PowerRatio(beta=args.beta, delta=args.delta, rho=args.rho)
    m1, m2 = StableMeasure(params.alpha1), StableMeasure(params.alpha2)
    grid = np.linspace(args.grid_lo, args.grid_hi, args.grid_n)
    fh = _out_stream(args, "generator_check.csv")
    w = _writer(fh)
    w.writerow(("x", "y", "term_name", "closed", "quadrature", "abs_err"))
    for x in grid:
        for y in grid:
            c1, c2 = g.closed_jump_integrals(float(x), float(y), m1, m2)
            q1 = jump_integral(g, float(x), float(y), "first", m1)
            q2 = jump_integral(g, float(x), float(y), "second", m2)
            w.writerow((repr(float(x)), repr(float(y)), "jump_x", repr(c1),
                        repr(q1), repr(abs(q1 - c1))))
            w.writerow((repr(float(x)), repr(float(y)), "jump_y", repr(c2),
                        repr(q2), repr(abs(q2 - c2))))
    if fh is not sys.stdout:
        fh.close()
    return 0


def cmd_lemma_check(args) -> int:
    fh = _out_stream(args, "lemma_check.csv")
    w = _writer(fh)
    w.writerow(("inequality", "status", "worst_margin", "detail"))

    cert = criteria.check_young()
    w.writerow(("young", "PASS" if cert.passed else "FAIL",
                repr(cert.worst_margin), ""))

    from .functions import Bump
    b = Bump(1.0, 3.0, lam=10.0, lam1=1.0, x2=2.0)
    cert = criteria.check_bump_derivative_bound(b)
    w.writerow(("bump_slope", "PASS" if cert.passed else "FAIL",
                repr(cert.worst_margin), "lam=10 lam1=1"))

    _, c, cert = criteria.search_bump_left_constants(1.0, 2.0, 3.0, args.alpha)
    w.writerow(("bump_left_curvature_jump", "PASS" if cert.passed else "FAIL",
                repr(cert.worst_margin), json.dumps(c.values)))

    b3 = Bump(1.0, 3.0, lam=10.0, lam1=1.0, x2=2.0)
    c3, cert3 = criteria.check_bump_curvature_bounds(
        b3, args.alpha, full_support=True)
    w.writerow(("bump_full_curvature_jump", "PASS" if cert3.passed else "FAIL",
                repr(cert3.worst_margin), json.dumps(c3.values)))

    cert = criteria.check_exp_ratio_domination(n_draws=args.draws)
    w.writerow(("exp_ratio_domination", "PASS" if cert.passed else "FAIL",
                repr(cert.worst_margin), f"draws={args.draws}"))
    if fh is not sys.stdout:
        fh.close()
    return 0


def cmd_criteria_check(args) -> int:
    subcase = args.subcase
    params = _params_from(args) if (args.preset or args.config or args.set) \
        else subcase_params(subcase)
    fh = _out_stream(args, f"criteria_{subcase}.csv")
    w = _writer(fh)
    w.writerow(("subcase", "status", "worst_margin", "constants"))
    try:
        if subcase in ("iiia", "iiib"):
            c, cert = criteria.check_H_lower_bound(params, subcase,
                                                   resolution=args.resolution)
        else:
            c, cert = criteria.check_htilde_positivity(params, subcase,
                                                       resolution=args.resolution)
        w.writerow((subcase, "PASS" if cert.passed else "FAIL",
                    repr(cert.worst_margin), json.dumps(c.values)))
        print(cert.summary())
        code = 0
    except criteria.SearchFailed as exc:
        w.writerow((subcase, "SEARCH_FAILED", "", str(exc)))
        print(f"search failed: {exc}")
        code = 1
    if fh is not sys.stdout:
        fh.close()
    return code


def cmd_simulate(args) -> int:
    params = _params_from(args)
    cfg = _sim_from(args)
    records = experiments.run_paths(params, cfg, args.paths,
                                    workers=args.workers,
                                    strict_params=not args.relaxed)
    rows = [experiments._record_row(i, cfg.eps_ext, r)
            for i, r in enumerate(records)]
    fh = _out_stream(args, "paths.csv")
    w = _writer(fh)
    w.writerow(experiments._PATH_FIELDS)
    w.writerows(rows)
    if fh is not sys.stdout:
        fh.close()
    return 0


def cmd_couple(args) -> int:
    params = _params_from(args)
    cfg = _sim_from(args)
    report = run_coupling_experiment(
        params, cfg, (params.x0, params.y0),
        (args.tilde_x0, args.tilde_y0), args.paths,
        n_checkpoints=args.checkpoints)
    out = {
        "n_paths": report.n_paths,
        "n_checkpoints": report.n_checkpoints,
        "dt": report.dt,
        "observed_pairs": report.observed_pairs,
        "violation_count": report.violation_count,
        "violation_fraction": report.violation_fraction,
        "max_violation": report.max_violation,
    }
    text = json.dumps(out, indent=2, sort_keys=True)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "coupling.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_extinction(args) -> int:
    params = _params_from(args)
    cfg = _sim_from(args)
    summary = experiments.run_extinction_campaign(
        params, cfg, args.paths, ladder=tuple(float(t) for t in args.ladder.split(",")),
        eps_pair=tuple(float(e) for e in args.eps_pair.split(",")),
        workers=args.workers, out_dir=args.out)
    print(summary.to_json())
    return 0 if summary.consistent else 1


def cmd_sweep(args) -> int:
    params = _params_from(args)
    cfg = _sim_from(args)
    axes = []
    for ax in args.axis:
        name, vals = ax.split("=", 1)
        axes.append((name.strip(), tuple(float(v) for v in vals.split(","))))
    spec = experiments.SweepSpec(
        base=params, axes=tuple(axes), cfg=cfg, n_paths=args.paths,
        ladder=tuple(float(t) for t in args.ladder.split(",")))
    results = experiments.run_sweep(spec, workers=args.workers,
                                    out_dir=args.out)
    for count, overrides, init, summary, err in results:
        if summary is None:
            print(f"cell {count} {overrides} {init}: ERROR {err}")
        else:
            print(f"cell {count} {overrides} {init}: {summary.verdict} "
                  f"freq={summary.frequency:.4f} consistent={summary.consistent}")
    return 0


def cmd_martingale(args) -> int:
    params = _params_from(args)
    cfg = _sim_from(args)
    g = PowerRatio(beta=args.beta, delta=args.delta, rho=args.rho)
    report = experiments.run_martingale_check(
        params, g, [float(t) for t in args.t_grid.split(",")],
        args.paths, cfg, workers=args.workers)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "martingale.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report["passed"] else 1


def _add_common(sp, sim: bool = False):
    sp.add_argument("--config", help="key = value parameter file")
    sp.add_argument("--set", action="append", metavar="NAME=VALUE",
                    help="override one parameter (repeatable)")
    sp.add_argument("--preset", choices=sorted(CANONICAL),
                    help="start from a bundled canonical parameter set")
    sp.add_argument("--seed", type=int, default=None, help="master seed")
    sp.add_argument("--out", help="output directory (default: stdout)")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--strict", dest="relaxed", action="store_false",
                    default=False, help="enforce full validation (default)")
    sp.add_argument("--relaxed", dest="relaxed", action="store_true",
                    help="allow test-mode parameter sets")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stablelv",
        description=("two-type stable-jump Lotka-Volterra lab: regime "
                     "classification, generator analytics and extinction "
                     "Monte Carlo"))
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classify", help="regime verdict for a parameter set")
    _add_common(sp)
    sp.set_defaults(fn=cmd_classify)

    sp = sub.add_parser("integrals", help="closed forms vs quadrature (CSV)")
    _add_common(sp)
    sp.add_argument("--alpha", default="1.1,1.3,1.5,1.7,1.9")
    sp.add_argument("--kind", default="")
    sp.add_argument("--beta", default="0.1,0.5,0.9")
    sp.set_defaults(fn=cmd_integrals)

    sp = sub.add_parser("generator-check",
                        help="jump-term closed forms vs quadrature on a grid")
    _add_common(sp)
    sp.add_argument("--beta", type=float, default=2.0)
    sp.add_argument("--delta", type=float, default=0.25)
    sp.add_argument("--rho", type=float, default=0.5)
    sp.add_argument("--grid-lo", type=float, default=0.1)
    sp.add_argument("--grid-hi", type=float, default=2.0)
    sp.add_argument("--grid-n", type=int, default=5)
    sp.set_defaults(fn=cmd_generator_check)

    sp = sub.add_parser("lemma-check", help="inequality pass/fail table")
    _add_common(sp)
    sp.add_argument("--alpha", type=float, default=1.5)
    sp.add_argument("--draws", type=int, default=100)
    sp.set_defaults(fn=cmd_lemma_check)

    sp = sub.add_parser("criteria-check",
                        help="constant search + grid certificate per subcase")
    _add_common(sp)
    sp.add_argument("--subcase", required=True, choices=sorted(SUBCASE_SETS))
    sp.add_argument("--resolution", type=int, default=200)
    sp.set_defaults(fn=cmd_criteria_check)

    sp = sub.add_parser("simulate", help="per-path records (CSV)")
    _add_common(sp)
    sp.add_argument("--paths", type=int, default=100)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("couple", help="ordering-violation report for coupled pairs")
    _add_common(sp)
    sp.add_argument("--paths", type=int, default=100)
    sp.add_argument("--checkpoints", type=int, default=100)
    sp.add_argument("--tilde-x0", type=float, default=1.02)
    sp.add_argument("--tilde-y0", type=float, default=0.98)
    sp.set_defaults(fn=cmd_couple)

    sp = sub.add_parser("extinction", help="extinction-frequency campaign")
    _add_common(sp)
    sp.add_argument("--paths", type=int, default=2000)
    sp.add_argument("--ladder", default="10,25,50")
    sp.add_argument("--eps-pair", default="1e-6,1e-8")
    sp.set_defaults(fn=cmd_extinction)

    sp = sub.add_parser("sweep", help="grid of campaigns over parameter axes")
    _add_common(sp)
    sp.add_argument("--axis", action="append", required=True,
                    metavar="NAME=V1,V2,...")
    sp.add_argument("--paths", type=int, default=400)
    sp.add_argument("--ladder", default="10,25,50")
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("martingale", help="compensated-value zero-mean check")
    _add_common(sp)
    sp.add_argument("--paths", type=int, default=10000)
    sp.add_argument("--t-grid", default="0.1,0.5,1.0")
    sp.add_argument("--beta", type=float, default=2.0)
    sp.add_argument("--delta", type=float, default=0.25)
    sp.add_argument("--rho", type=float, default=0.5)
    sp.set_defaults(fn=cmd_martingale)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
