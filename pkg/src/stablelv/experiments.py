"""Monte Carlo campaigns confronting simulated extinction frequencies with
the classifier's verdicts, plus the supporting statistical machinery.

Probability-one and probability-zero statements are operationalized as
one-sided frequency thresholds over a horizon ladder, with every
extinction estimate reported at two threshold proxies and their gap
disclosed.  Campaign output is an append-only per-path CSV plus one JSON
summary; re-running with the same master seed yields byte-identical files
for any worker count because each path owns a counter-based stream.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .engine import PathRecord, SimConfig, simulate_path
from .generator import power_ratio_generator_terms, power_ratio_value_terms
from .functions import PowerRatio
from .model import ModelParams, classify, validate

__all__ = [
    "InsufficientPaths",
    "BoundaryContact",
    "EstimateSummary",
    "SweepSpec",
    "wilson_interval",
    "run_paths",
    "run_extinction_campaign",
    "run_sup_tail_check",
    "run_martingale_check",
    "run_sweep",
    "write_paths_csv",
]

_Z95 = 1.959963984540054


class InsufficientPaths(ValueError):
    """A campaign cell received fewer paths than the statistical floor."""


class BoundaryContact(RuntimeError):
    """Paths stopped before the last requested observation time."""


def wilson_interval(k: int, n: int, z: float = _Z95):
    """Score interval for a binomial proportion; always inside [0, 1].

    The endpoints are exact at the degenerate counts (rounding would
    otherwise push the bound inside the observed proportion).
    """
    if n <= 0:
        raise ValueError("n must be positive")
    phat = k / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return lo, hi


def digest(mapping: dict) -> str:
    blob = json.dumps(mapping, sort_keys=True, default=float).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


# ---------------------------------------------------------------------------
# path batch runner (worker-count independent by per-path streams)
# ---------------------------------------------------------------------------

def _chunk(args):
    params, cfg, seeds, strict = args
    return [simulate_path(params, cfg, s, strict=strict) for s in seeds]


def run_paths(params: ModelParams, cfg: SimConfig, n_paths: int,
              workers: int = 1, strict_params: bool = True,
              seed_offset: int = 0) -> list:
    """Simulate paths with seeds offset..offset+n-1, in seed order."""
    seeds = list(range(seed_offset, seed_offset + n_paths))
    if workers <= 1:
        return [simulate_path(params, cfg, s, strict=strict_params) for s in seeds]
    chunks = [seeds[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(
            _chunk, [(params, cfg, c, strict_params) for c in chunks]))
    merged = [r for part in parts for r in part]
    merged.sort(key=lambda r: r.path_seed)
    return merged


_PATH_FIELDS = ("path_id", "seed", "eps_ext", "event", "event_time",
                "term_x", "term_y", "sup_x", "sup_y", "clamp_count")


def write_paths_csv(path: str, rows) -> None:
    """RFC-4180 CSV with explicit header and newline line endings."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_PATH_FIELDS)
        for r in rows:
            w.writerow(r)


def _record_row(i: int, eps: float, r: PathRecord):
    return (i, r.path_seed, repr(eps), r.event, repr(r.event_time),
            repr(r.term_x), repr(r.term_y), repr(r.sup_x), repr(r.sup_y),
            r.clamp_count)


# ---------------------------------------------------------------------------
# extinction campaign
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimateSummary:
    params_digest: str
    cfg_digest: str
    n_paths: int
    extinct_y_count: int
    frequency: float
    interval: tuple
    eps_values: tuple
    eps_gap: float
    verdict: str
    fired_conditions: tuple
    consistent: bool
    consistency_reason: str
    cells: dict = field(default_factory=dict)  # (T, eps) -> (count, freq, lo, hi)

    def to_json(self) -> str:
        d = {
            "params_digest": self.params_digest,
            "cfg_digest": self.cfg_digest,
            "n_paths": self.n_paths,
            "extinct_y_count": self.extinct_y_count,
            "frequency": self.frequency,
            "interval": list(self.interval),
            "eps_values": list(self.eps_values),
            "eps_gap": self.eps_gap,
            "verdict": self.verdict,
            "fired_conditions": list(self.fired_conditions),
            "consistent": self.consistent,
            "consistency_reason": self.consistency_reason,
            "cells": {f"T={t},eps={e}": list(v) for (t, e), v in
                      sorted(self.cells.items())},
            "caveat": ("frequencies are finite-horizon threshold proxies; "
                       "hitting 0 itself is not observable"),
        }
        return json.dumps(d, indent=2, sort_keys=True)


def run_extinction_campaign(params: ModelParams, cfg: SimConfig, n_paths: int,
                            ladder=(10.0, 25.0, 50.0),
                            eps_pair=(1e-6, 1e-8), workers: int = 1,
                            out_dir: str | None = None,
                            null_threshold: float = 0.05,
                            sure_threshold: float = 0.8,
                            partial_band=(0.05, 0.95)) -> EstimateSummary:
    """Estimate Y-extinction frequency per (horizon, threshold) cell.

    The ladder must be increasing; the engine runs once per threshold to
    the top horizon and the per-T counts come from the recorded extinction
    times.  The consistency flag applies the verdict-specific rule at the
    top horizon.
    """
    validate(params, strict=True)
    ladder = tuple(sorted(ladder))
    if n_paths < 100:
        raise InsufficientPaths(f"each cell needs >= 100 paths, got {n_paths}")
    verdict = classify(params)

    cells = {}
    all_rows = {}
    for eps in eps_pair:
        run_cfg = cfg.replace(eps_ext=eps, horizon=max(ladder))
        records = run_paths(params, run_cfg, n_paths, workers=workers)
        all_rows[eps] = records
        times = np.array([r.ext_y_time for r in records])
        for t in ladder:
            k = int(np.sum(times <= t))
            lo, hi = wilson_interval(k, n_paths)
            cells[(t, eps)] = (k, k / n_paths, lo, hi)

    t_top = max(ladder)
    eps_lo = min(eps_pair)  # finer proxy is the headline estimate
    k_top, freq, lo, hi = cells[(t_top, eps_lo)]
    gap = max(abs(cells[(t, eps_pair[0])][1] - cells[(t, eps_pair[1])][1])
              for t in ladder)

    if verdict.verdict in ("NoExtinctionEither", "NoExtinctionY"):
        bounds = [cells[(t, e)][3] for t in ladder for e in eps_pair]
        consistent = max(bounds) <= null_threshold
        reason = (f"upper CI bound {max(bounds):.4f} vs null threshold "
                  f"{null_threshold}")
    elif verdict.verdict == "SureExtinctionY":
        freqs = [cells[(t, eps_lo)][1] for t in ladder]
        monotone = all(a <= b for a, b in zip(freqs, freqs[1:]))
        consistent = monotone and freq >= sure_threshold
        reason = (f"frequency {freq:.4f} vs sure threshold {sure_threshold}, "
                  f"ladder {freqs} monotone={monotone}")
    elif verdict.verdict == "PartialExtinctionY":
        consistent = partial_band[0] <= freq <= partial_band[1]
        reason = f"frequency {freq:.4f} vs interior band {partial_band}"
    else:
        consistent = True
        reason = "conjectured/unsettled verdicts are reported, never gated"

    summary = EstimateSummary(
        params_digest=digest(params.as_dict()),
        cfg_digest=digest(cfg.as_dict()),
        n_paths=n_paths,
        extinct_y_count=k_top,
        frequency=freq,
        interval=(lo, hi),
        eps_values=tuple(eps_pair),
        eps_gap=gap,
        verdict=verdict.verdict,
        fired_conditions=verdict.fired_conditions,
        consistent=consistent,
        consistency_reason=reason,
        cells=cells)

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        rows = []
        for eps in eps_pair:
            rows.extend(_record_row(i, eps, r)
                        for i, r in enumerate(all_rows[eps]))
        write_paths_csv(os.path.join(out_dir, "paths.csv"), rows)
        with open(os.path.join(out_dir, "summary.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(summary.to_json())
            fh.write("\n")
    return summary


# ---------------------------------------------------------------------------
# running-supremum tail check
# ---------------------------------------------------------------------------

def run_sup_tail_check(params: ModelParams, x0_grid, eps_levels,
                       n_paths: int, cfg: SimConfig, workers: int = 1) -> dict:
    """Estimate P{sup X >= eps} over the horizon for each initial state.

    Reports monotonicity in x0 (non-decreasing) and in eps
    (non-increasing) within CI half-widths, and the log-log slope of the
    tail probability in x0 for comparison with a power law.
    """
    x0_grid = sorted(x0_grid)
    eps_levels = sorted(eps_levels)
    probs = {}
    for x0 in x0_grid:
        p = params.replace(x0=x0)
        records = run_paths(p, cfg, n_paths, workers=workers)
        sups = np.array([r.sup_x for r in records])
        for e in eps_levels:
            k = int(np.sum(sups >= e))
            lo, hi = wilson_interval(k, n_paths)
            probs[(x0, e)] = (k / n_paths, lo, hi)

    monotone_x0 = all(
        probs[(a, e)][0] <= probs[(b, e)][2] + (probs[(b, e)][2] - probs[(b, e)][1])
        for e in eps_levels for a, b in zip(x0_grid, x0_grid[1:]))
    monotone_eps = all(
        probs[(x0, f)][0] <= probs[(x0, e)][2] + (probs[(x0, e)][2] - probs[(x0, e)][1])
        for x0 in x0_grid for e, f in zip(eps_levels, eps_levels[1:]))

    slopes = {}
    for e in eps_levels:
        pts = [(math.log(x0), math.log(probs[(x0, e)][0]))
               for x0 in x0_grid if 0.0 < probs[(x0, e)][0] < 1.0]
        if len(pts) >= 2:
            xs, ys = zip(*pts)
            slopes[e] = float(np.polyfit(xs, ys, 1)[0])
    return {"probs": probs, "monotone_in_x0": monotone_x0,
            "monotone_in_eps": monotone_eps, "loglog_slopes_in_x0": slopes}


# ---------------------------------------------------------------------------
# martingale consistency check
# ---------------------------------------------------------------------------

def _mart_chunk(args):
    params, cfg, seeds, t_grid, lg, gv = args
    out = []
    t_last = t_grid[-1]
    for s in seeds:
        rec, mart, n_done = simulate_path(
            params, cfg, s, checkpoint_times=t_grid,
            generator_terms=lg, value_terms=gv)
        # the compensated-value identity breaks at the first boundary
        # contact even though the engine keeps evolving the survivor
        contact_times = [t for t in (rec.ext_x_time, rec.ext_y_time)
                         if math.isfinite(t)]
        if rec.event == "Explode":
            contact_times.append(rec.event_time)
        contact = n_done < t_grid.size or (
            contact_times and min(contact_times) <= t_last)
        out.append((s, contact, mart))
    return out


def run_martingale_check(params: ModelParams, g: PowerRatio, t_grid,
                         n_paths: int, cfg: SimConfig,
                         workers: int = 1) -> dict:
    """Mean and standard error of the compensated-value process at each t.

    The per-path statistic is g(X_t, Y_t) - g(X_0, Y_0) minus the running
    integral of the generator along the path; its mean must vanish within
    3 standard errors when the simulation and the generator agree.  Paths
    that stop before the last grid time are excluded and flagged.
    """
    validate(params, strict=True)
    t_grid = np.asarray(sorted(t_grid), dtype=float)
    if t_grid[-1] > cfg.horizon:
        raise ValueError("t grid exceeds the configured horizon")
    lg = power_ratio_generator_terms(params, g)
    gv = power_ratio_value_terms(g)
    g0 = float(g.value(params.x0, params.y0))

    seeds = list(range(n_paths))
    if workers <= 1:
        results = _mart_chunk((params, cfg, seeds, t_grid, lg, gv))
    else:
        chunks = [seeds[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                _mart_chunk,
                [(params, cfg, c, t_grid, lg, gv) for c in chunks]))
        results = [r for part in parts for r in part]
        results.sort(key=lambda r: r[0])

    contact = sum(1 for _, c, _ in results if c)
    M = np.array([m[:, 1] - g0 - m[:, 2] for _, c, m in results if not c])
    if M.shape[0] == 0:
        raise BoundaryContact("every path stopped before the last grid time")
    means = M.mean(axis=0)
    ses = M.std(axis=0, ddof=1) / math.sqrt(M.shape[0])
    ratios = np.abs(means) / ses
    return {
        "t_grid": t_grid.tolist(),
        "means": means.tolist(),
        "ses": ses.tolist(),
        "abs_mean_over_se": ratios.tolist(),
        "n_used": int(M.shape[0]),
        "boundary_contacts": contact,
        "passed": bool(np.all(ratios <= 3.0)) and contact == 0,
    }


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    axes: tuple  # ((param_name, (values...)), ...)
    cfg: SimConfig
    n_paths: int = 400
    ladder: tuple = (10.0, 25.0, 50.0)
    eps_pair: tuple = (1e-6, 1e-8)
    initial_conditions: tuple = ()  # extra (x0, y0) pairs; () keeps base

    def __post_init__(self):
        if not self.axes or any(len(v) == 0 for _, v in self.axes):
            raise ValueError("sweep axes must be non-empty")
        if not all(a < b for a, b in zip(self.ladder, self.ladder[1:])):
            raise ValueError("horizon ladder must be strictly increasing")

    def cells(self):
        """Yield (cell_index, overrides dict, (x0, y0)) in a fixed order."""
        grids = [(name, vals) for name, vals in self.axes]
        idx = [0] * len(grids)
        count = 0
        while True:
            overrides = {name: vals[i] for (name, vals), i in zip(grids, idx)}
            inits = self.initial_conditions or ((self.base.x0, self.base.y0),)
            for x0, y0 in inits:
                yield count, overrides, (x0, y0)
                count += 1
            for pos in range(len(idx) - 1, -1, -1):
                idx[pos] += 1
                if idx[pos] < len(grids[pos][1]):
                    break
                idx[pos] = 0
            else:
                return


def run_sweep(spec: SweepSpec, workers: int = 1,
              out_dir: str | None = None) -> list:
    """One campaign per cell; partial results survive per-cell failures."""
    results = []
    for count, overrides, (x0, y0) in spec.cells():
        params = spec.base.replace(x0=x0, y0=y0, **overrides)
        try:
            summary = run_extinction_campaign(
                params, spec.cfg, spec.n_paths, ladder=spec.ladder,
                eps_pair=spec.eps_pair, workers=workers)
            results.append((count, overrides, (x0, y0), summary, None))
        except Exception as exc:  # per-cell failure must not kill the sweep
            results.append((count, overrides, (x0, y0), None, repr(exc)))

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "sweep.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("cell", "overrides", "x0", "y0", "verdict",
                        "frequency", "ci_lo", "ci_hi", "consistent", "error"))
            for count, overrides, (x0, y0), summary, err in results:
                if summary is None:
                    w.writerow((count, json.dumps(overrides, sort_keys=True),
                                repr(x0), repr(y0), "", "", "", "", "", err))
                else:
                    w.writerow((count, json.dumps(overrides, sort_keys=True),
                                repr(x0), repr(y0), summary.verdict,
                                repr(summary.frequency),
                                repr(summary.interval[0]),
                                repr(summary.interval[1]),
                                summary.consistent, ""))
    return results
