"""Grid certificates for the analytic inequalities behind the regime table.

A certificate is finite evidence, not a proof: it reports the region
actually covered, the resolution, and the worst slack of the inequality
over the grid.  Constant searches follow the constructive recipes of the
positivity lemmas (a band for the ratio exponent, small curvature and
cross exponents) with a coarse log sweep plus golden-section refinement
on the worst margin; everything is deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import make_rng
from .functions import Bump, BumpProduct, ExpRatio, PowerRatio, TestFunction
from .generator import (DEFAULT_QUADRATURE, QuadratureConfig, apply_generator,
                        jump_integral)
from .model import ModelParams, classify, derived_exponents, validate
from .quadrature import gl01_adaptive, singular_head, tail_integral
from .stable_measure import StableMeasure, gamma

__all__ = [
    "SearchFailed",
    "GridCertificate",
    "ConstantsFound",
    "check_young",
    "check_generator_bound",
    "find_bound_constant",
    "bump_jump_ratio",
    "search_bump_left_constants",
    "check_bump_derivative_bound",
    "check_bump_curvature_bounds",
    "check_exp_ratio_domination",
    "htilde_recipe",
    "htilde_min_margin",
    "check_htilde_positivity",
    "hbound_recipe",
    "check_H_lower_bound",
    "check_prop24_bump",
    "check_prop25_conditions",
]


class SearchFailed(RuntimeError):
    """No constants certified the inequality at the maximum resolution."""


@dataclass(frozen=True)
class GridCertificate:
    description: str
    region: dict
    resolution: tuple
    worst_margin: float
    worst_point: tuple
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.worst_margin > 0.0

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.description}: worst margin "
                f"{self.worst_margin:.6g} at {self.worst_point} "
                f"(resolution {self.resolution})")


@dataclass(frozen=True)
class ConstantsFound:
    values: dict

    def __getitem__(self, key):
        return self.values[key]


def _loggrid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.geomspace(lo, hi, n)


# ---------------------------------------------------------------------------
# elementary inequality: two-term weighted AM-GM
# ---------------------------------------------------------------------------

def check_young(n_samples: int = 10000, seed: int = 0) -> GridCertificate:
    """u + v >= p^(1/p) q^(1/q) u^(1/p) v^(1/q) over random draws."""
    rng = make_rng(seed, 101)
    u = 10.0 ** rng.uniform(-3.0, 3.0, n_samples)
    v = 10.0 ** rng.uniform(-3.0, 3.0, n_samples)
    p = 1.0 + 10.0 ** rng.uniform(-2.0, 2.0, n_samples)
    q = p / (p - 1.0)
    rhs = p ** (1.0 / p) * q ** (1.0 / q) * u ** (1.0 / p) * v ** (1.0 / q)
    margin = u + v - rhs
    i = int(np.argmin(margin))
    return GridCertificate(
        description="two-term weighted AM-GM",
        region={"u": "logU(-3,3)", "v": "logU(-3,3)", "p": "1+logU(-2,2)"},
        resolution=(n_samples,),
        worst_margin=float(margin[i]),
        worst_point=(float(u[i]), float(v[i]), float(p[i])))


def young_margin(u: float, v: float, p: float) -> float:
    q = p / (p - 1.0)
    return u + v - p ** (1.0 / p) * q ** (1.0 / q) * u ** (1.0 / p) * v ** (1.0 / q)


# ---------------------------------------------------------------------------
# generator bounds Lg <=/>= d g on a rectangle
# ---------------------------------------------------------------------------

def _rect_grid(region, resolution, spacing):
    x_lo, x_hi, y_lo, y_hi = region
    nx, ny = resolution
    if spacing == "log":
        xs = _loggrid(x_lo, x_hi, nx)
        ys = _loggrid(y_lo, y_hi, ny)
    else:
        xs = np.linspace(x_lo, x_hi, nx)
        ys = np.linspace(y_lo, y_hi, ny)
    return xs, ys


def check_generator_bound(params: ModelParams, g: TestFunction, region,
                          direction: str, d: float,
                          resolution=(24, 24), spacing: str = "linear",
                          cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                          value_floor: float = 0.0) -> GridCertificate:
    """Certify ``Lg <= d g`` (direction "<=") or ``Lg >= d g`` on a grid.

    Nodes where the test function is at or below ``value_floor`` (deep in
    an essential-zero region) are skipped and counted in the metadata.
    """
    if direction not in ("<=", ">="):
        raise ValueError("direction must be '<=' or '>='")
    xs, ys = _rect_grid(region, resolution, spacing)
    worst = math.inf
    worst_pt = (math.nan, math.nan)
    skipped = 0
    for x in xs:
        for y in ys:
            gv = float(g.value(x, y))
            if gv <= value_floor:
                skipped += 1
                continue
            total = apply_generator(params, g, float(x), float(y), cfg).total
            margin = d * gv - total if direction == "<=" else total - d * gv
            if margin < worst:
                worst = margin
                worst_pt = (float(x), float(y))
    return GridCertificate(
        description=f"Lg {direction} {d:g} g on {region}",
        region={"rect": region, "spacing": spacing, "skipped_nodes": skipped,
                "value_floor": value_floor},
        resolution=resolution,
        worst_margin=worst,
        worst_point=worst_pt,
        extra={"d": d, "direction": direction})


def find_bound_constant(params: ModelParams, g: TestFunction, region,
                        direction: str, resolution=(16, 16),
                        spacing: str = "linear",
                        cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                        value_floor: float = 0.0):
    """Extremal d for which the bound can hold on the grid: max (<=) or min (>=) of Lg/g."""
    xs, ys = _rect_grid(region, resolution, spacing)
    ratios = []
    for x in xs:
        for y in ys:
            gv = float(g.value(x, y))
            if gv <= value_floor:
                continue
            total = apply_generator(params, g, float(x), float(y), cfg).total
            ratios.append(total / gv)
    if not ratios:
        raise SearchFailed("no usable grid nodes above the value floor")
    return max(ratios) if direction == "<=" else min(ratios)


# ---------------------------------------------------------------------------
# bump profile inequalities (ratio form, robust to profile underflow)
# ---------------------------------------------------------------------------

def bump_jump_ratio(b: Bump, x: float, alpha: float,
                    cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``h(x)^-1 int_0^inf (h(x+z) - h(x) - h'(x) z) z^(-1-alpha) dz``.

    Evaluated against the raw kernel (no stable normalization) in ratio
    form, so it stays finite where the profile itself underflows.
    """
    if not b.x1 < x < b.x3:
        raise ValueError(f"x={x} outside bump support ({b.x1}, {b.x3})")
    log_h_x = float(b.log_h(x))

    def curvature_ratio(s):
        inside = s < b.x3
        out = np.zeros_like(s)
        if np.any(inside):
            si = s[inside]
            out[inside] = b.ratio_d2(si) * np.exp(b.log_h(si) - log_h_x)
        return out

    def profile(z: float) -> float:
        return gl01_adaptive(lambda v: curvature_ratio(x + z * v) * (1.0 - v),
                             abs_tol=0.01 * cfg.abs_tol,
                             max_depth=cfg.max_refinement_depth)

    head = singular_head(profile, alpha, cfg.split_point, abs_tol=0.5 * cfg.abs_tol)
    tail = tail_integral(
        lambda z: float(b.ratio_increment(x, z)) * z ** (-1.0 - alpha),
        cfg.split_point, abs_tol=0.5 * cfg.abs_tol)
    return head + tail


def search_bump_left_constants(x1: float, x2: float, x3: float, alpha: float,
                               n_grid: int = 200, n_jump: int = 25,
                               cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """Search (lam, lam1) certifying the left-region curvature/jump bounds.

    The profile peak sits at x1 + (x3-x1)/(1+sqrt(lam1)); a positive
    curvature bound on (x1, x2) needs the peak beyond x2, i.e. lam1 below
    ((x3-x2)/(x2-x1))^2, so the sweep starts there and halves.
    """
    lam1_cap = ((x3 - x2) / (x2 - x1)) ** 2
    last = None
    for lam1 in (0.5 * lam1_cap, 0.25 * lam1_cap, 0.1 * lam1_cap):
        for lam in (10.0, 20.0, 40.0, 80.0):
            b = Bump(x1, x3, lam, lam1, x2=x2)
            try:
                constants, cert = check_bump_curvature_bounds(
                    b, alpha, n_grid=n_grid, full_support=False,
                    n_jump=n_jump, cfg=cfg)
            except SearchFailed as exc:
                last = str(exc)
                continue
            if cert.passed:
                return b, constants, cert
            last = cert.summary()
    raise SearchFailed(f"no (lam, lam1) certified the left-region bounds "
                       f"(last: {last})")


def check_bump_derivative_bound(b: Bump, n_grid: int = 200) -> GridCertificate:
    """``h'(x) <= lam h(x) (x - x1)^-2`` across the support."""
    xs = np.linspace(b.x1, b.x3, n_grid + 2)[1:-1]
    margin = b.lam * (xs - b.x1) ** -2.0 - b.ratio_d1(xs)
    i = int(np.argmin(margin))
    return GridCertificate(
        description="bump slope bound h' <= lam h (x-x1)^-2",
        region={"support": (b.x1, b.x3), "lam": b.lam, "lam1": b.lam1},
        resolution=(n_grid,),
        worst_margin=float(margin[i]),
        worst_point=(float(xs[i]),))


def check_bump_curvature_bounds(b: Bump, alpha: float, n_grid: int = 200,
                                full_support: bool = False,
                                n_jump: int = 25,
                                cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """Curvature and jump-integral lower bounds for the bump profile.

    On (x1, x2) (``full_support=False``) certifies
    ``h''/h >= lam^2 c0 (x-x1)^-4`` and the jump-ratio analogue with
    exponent ``-2-alpha``; over the whole support (``full_support=True``)
    the right-hand sides get an additive slack constant c1, following the
    two-regime shape of the inequality.  The constants are searched, then
    returned with grid certificates for both inequalities.
    """
    hi = b.x3 if full_support else b.x2
    xs = np.linspace(b.x1, hi, n_grid + 2)[1:-1]
    lam2 = b.lam ** 2
    curv = b.ratio_d2(xs) / lam2
    shape = (xs - b.x1) ** -4.0

    # jump ratios explode like exp(peak - log h(x)) near the left edge;
    # restrict that grid to where the ratio stays within float range (the
    # bound is trivially dominated beyond, but not float-checkable)
    xj = np.linspace(b.x1, hi, n_jump + 2)[1:-1]
    in_range = b.log_h_max() - b.log_h(xj) <= 500.0
    xj = xj[in_range]
    if xj.size < 3:
        raise SearchFailed("jump-ratio grid empty within float range")
    lam_a = b.lam ** alpha
    jumps = np.array([bump_jump_ratio(b, float(x), alpha, cfg) for x in xj]) / lam_a
    jshape = (xj - b.x1) ** (-2.0 - alpha)

    if not full_support:
        c0 = float(np.min(curv / shape))
        cj = float(np.min(jumps / jshape))
        m1 = curv - c0 * 0.5 * shape
        m2 = jumps - cj * 0.5 * jshape
        constants = ConstantsFound({"c0_curvature": c0, "c0_jump": cj})
        ok = c0 > 0.0 and cj > 0.0
        worst = min(c0, cj)
    else:
        # pick c0 from the left edge (where the shape term dominates), then
        # the smallest slack making both bounds hold everywhere
        c0 = float(np.min((curv / shape)[: n_grid // 4]))
        c0 = min(c0, float(np.min((jumps / jshape)[: max(2, xj.size // 4)])))
        c0 *= 0.5
        if c0 <= 0.0:
            raise SearchFailed("no positive curvature coefficient at the left edge")
        c1 = max(float(np.max(shape - curv / c0)),
                 float(np.max(jshape - jumps / c0))) * (1.0 + 1e-9) + 1e-12
        m1 = curv - c0 * (shape - c1)
        m2 = jumps - c0 * (jshape - c1)
        constants = ConstantsFound({"c0": c0, "c1": c1})
        ok = True
        worst = min(float(np.min(m1)), float(np.min(m2)))
    cert = GridCertificate(
        description=("bump curvature/jump lower bounds on "
                     + ("full support" if full_support else "left region")),
        region={"interval": (b.x1, hi), "lam": b.lam, "lam1": b.lam1,
                "alpha": alpha, "jump_range": (float(xj[0]), float(xj[-1]))},
        resolution=(n_grid, int(xj.size)),
        worst_margin=worst if ok else -math.inf,
        worst_point=(float(xs[int(np.argmin(m1))]),),
        extra=constants.values)
    return constants, cert


# ---------------------------------------------------------------------------
# exp-ratio family: certified lower bounds dominate the true quantities
# ---------------------------------------------------------------------------

def check_exp_ratio_domination(n_draws: int = 100, seed: int = 1,
                               alpha1: float = 1.5, alpha2: float = 1.5,
                               cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> GridCertificate:
    """Curvatures and jump integrals of exp_ratio dominate their bounds."""
    rng = make_rng(seed, 202)
    m1, m2 = StableMeasure(alpha1), StableMeasure(alpha2)
    worst = math.inf
    worst_pt = ()
    for _ in range(n_draws):
        x = 10.0 ** rng.uniform(-1.0, 0.5)
        y = 10.0 ** rng.uniform(-1.0, 0.5)
        lam = 10.0 ** rng.uniform(-0.5, 0.5)
        r = rng.uniform(0.1, 0.9)
        beta = 10.0 ** rng.uniform(-0.5, 0.5)
        g = ExpRatio(lam=lam, r=r, beta=beta)
        bounds = g.bounds(x, y, m1, m2)
        margins = (
            float(g.dxx(x, y)) - bounds["dxx_lower"],
            float(g.dyy(x, y)) - bounds["dyy_lower"],
            jump_integral(g, x, y, "first", m1, cfg) - bounds["jump1_lower"],
            jump_integral(g, x, y, "second", m2, cfg) - bounds["jump2_lower"],
        )
        m = min(margins)
        if m < worst:
            worst = m
            worst_pt = (x, y, lam, r, beta)
    return GridCertificate(
        description="exp_ratio curvature/jump bounds dominated by true values",
        region={"draws": n_draws, "alpha1": alpha1, "alpha2": alpha2},
        resolution=(n_draws, 4),
        worst_margin=worst,
        worst_point=tuple(round(v, 6) for v in worst_pt))


# ---------------------------------------------------------------------------
# ratio-exponent positivity (partial-extinction subcases)
# ---------------------------------------------------------------------------

_SUBCASES_PARTIAL = ("iia", "iib", "iic", "iid")
_SUBCASES_SURE = ("iiia", "iiib")


def _htilde_band(params: ModelParams, subcase: str):
    d = derived_exponents(params)
    th1, th2 = params.theta1, params.theta2
    k1, k2 = params.kappa1, params.kappa2
    if subcase == "iia":
        lo, hi = d.p / d.q, (k2 - d.p) / (1.0 - th2)
    elif subcase == "iib":
        lo, hi = d.b / d.a, k2 / (1.0 - th2)
    elif subcase == "iic":
        lo, hi = (th1 - 1.0) / (d.q - k1), (k2 + 1.0 - th1) / (k1 + 1.0 - th2)
    elif subcase == "iid":
        lo, hi = d.b / params.eta1, k2 / (k1 + 1.0 - th2)
    else:
        raise ValueError(f"unknown subcase {subcase!r}")
    if not lo < hi:
        raise SearchFailed(f"empty exponent band ({lo}, {hi}) for subcase {subcase}")
    return lo, hi


def _rho1_cap(params: ModelParams, subcase: str, beta: float) -> float:
    d = derived_exponents(params)
    th1 = params.theta1
    if subcase == "iia":
        return math.inf if d.p == 0.0 else beta_cap_ratio(beta * d.q, d.p)
    if subcase == "iic":
        return beta_cap_ratio(beta * d.q, th1 - 1.0 + beta * params.kappa1)
    return math.inf


def htilde_recipe(params: ModelParams, subcase: str, sigma: float = 0.02,
                  beta_frac: float = 0.5) -> dict:
    """Constants (beta, delta, rho, sigma) per the constructive recipes.

    beta sits at ``beta_frac`` of the admissible band of its subcase.  rho
    sits just under rho1 * delta with rho1 close to its admissible cap;
    keeping rho1 (1-sigma)/(1+sigma) above 1 makes the large-ratio branch
    positive without demanding astronomically small regions.
    """
    lo, hi = _htilde_band(params, subcase)
    beta = lo + beta_frac * (hi - lo)
    delta = min(0.25 / beta, 0.2)
    rho1 = min(0.95 * _rho1_cap(params, subcase, beta), 3.0)
    if rho1 <= 0.0:
        raise SearchFailed(f"no admissible rho1 for subcase {subcase}")
    rho = min(0.98 * rho1 * delta, 0.9)
    return {"beta": beta, "delta": delta, "rho": rho, "sigma": sigma,
            "rho1": rho1}


def htilde_recipe_variants(params: ModelParams, subcase: str,
                           sigma: float = 0.02) -> list:
    """Primary recipe first, then looser (beta, delta, rho) combinations.

    The positivity functional is certified directly on the grid, so the
    proof-internal coupling rho < rho1 delta is not binding; rho = delta
    and band positions away from the midpoint rescue sets whose
    auxiliary-exponent cap is razor thin.
    """
    variants = [htilde_recipe(params, subcase, sigma=sigma)]
    for beta_frac in (0.5, 0.75, 0.9, 0.25):
        base = htilde_recipe(params, subcase, sigma=sigma, beta_frac=beta_frac)
        for delta_scale in (0.25, 0.3, 0.05):
            delta = min(delta_scale / base["beta"], 0.2)
            for rho in (min(0.9, 0.98 * base["rho1"] * delta), delta,
                        0.05, 0.5):
                cand = dict(base, delta=delta, rho=rho)
                if 0.0 < cand["rho"] < 1.0 and cand not in variants:
                    variants.append(cand)
    return variants


def beta_cap_ratio(num: float, den: float) -> float:
    """Largest admissible auxiliary exponent: num/(1+cap) > den."""
    return num / den - 1.0


def htilde_min_margin(params: ModelParams, c: dict, z_star: float,
                      eps0: float, resolution: int = 200,
                      u_decades: float = 6.0, x_decades: float = 5.0):
    """Minimum over the constrained grid of the positivity functional.

    The region {0 < x, y <= eps0, y x^-beta >= z_star} is parameterized by
    (x, u) with y = u x^beta, sampling u log-spaced above z_star and x
    log-spaced below its admissible ceiling for each u.
    """
    d = derived_exponents(params)
    beta, delta, rho, sigma = c["beta"], c["delta"], c["rho"], c["sigma"]
    th1, th2 = params.theta1, params.theta2
    k1, k2 = params.kappa1, params.kappa2
    us = _loggrid(z_star, z_star * 10.0 ** u_decades, resolution)
    x_hi = np.minimum(eps0, (eps0 / us) ** (1.0 / beta))
    X = x_hi[None, :] * _loggrid(10.0 ** -x_decades, 1.0, resolution)[:, None]
    U = np.broadcast_to(us[None, :], X.shape)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore",
                     under="ignore"):
        Y = U * X ** beta
        bracket = (beta * d.a * (1.0 - sigma) * X ** d.p
                   - (1.0 + sigma) * d.b * Y ** d.q
                   + beta * params.eta1 * X ** (th1 - 1.0) * Y ** k1
                   - params.eta2 * Y ** (th2 - 1.0) * X ** k2)
        val = (delta * U ** -delta * bracket
               + d.b * rho * (1.0 - sigma) * Y ** (rho + d.q)
               + rho * params.eta2 * Y ** (rho + th2 - 1.0) * X ** k2)
    if not np.all(np.isfinite(val)):
        return -math.inf, (math.nan, math.nan, math.nan)
    i = np.unravel_index(int(np.argmin(val)), val.shape)
    return float(val[i]), (float(X[i]), float(Y[i]), float(U[i]))


def _golden_refine(objective, lo: float, hi: float, iters: int = 10):
    """Golden-section maximizer on log-spaced (lo, hi); deterministic."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = math.log(lo), math.log(hi)
    c1 = b - phi * (b - a)
    c2 = a + phi * (b - a)
    f1, f2 = objective(math.exp(c1)), objective(math.exp(c2))
    for _ in range(iters):
        if f1 >= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - phi * (b - a)
            f1 = objective(math.exp(c1))
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + phi * (b - a)
            f2 = objective(math.exp(c2))
    return (math.exp(c1), f1) if f1 >= f2 else (math.exp(c2), f2)


def check_htilde_positivity(params: ModelParams, subcase: str,
                            resolution: int = 200, sigma: float = 0.1):
    """Find constants and certify the positivity functional of the
    partial-extinction proof on its ratio-constrained region.

    Raises SearchFailed when the parameters do not satisfy the subcase (the
    classifier is the cross-check) or when no swept constants certify.
    """
    if subcase not in _SUBCASES_PARTIAL:
        raise ValueError(f"subcase must be one of {_SUBCASES_PARTIAL}")
    verdict = classify(params)
    tag = f"T1.2({subcase})"
    if verdict.verdict != "PartialExtinctionY" or tag not in verdict.fired_conditions:
        raise SearchFailed(
            f"parameters do not satisfy subcase {subcase}: classifier says "
            f"{verdict.verdict} via {verdict.fired_conditions}")

    coarse = max(32, resolution // 4)
    candidates = []
    # near-critical parameter sets need exponentially small regions; the
    # deep end of the ladder is still exactly representable in floats
    eps_ladder = (0.2, 0.05, 0.0125, 3.125e-3, 7.8e-4, 2e-4, 5e-5,
                  1e-6, 1e-8, 1e-12, 1e-18, 1e-26, 1e-38, 1e-50, 1e-80,
                  1e-120, 1e-180)
    for rank, cand in enumerate(htilde_recipe_variants(params, subcase,
                                                       sigma=sigma)):
        for z_star in (1.0, 4.0, 16.0, 64.0):
            for eps0 in eps_ladder:
                margin, _ = htilde_min_margin(params, cand, z_star, eps0, coarse)
                if math.isfinite(margin) and margin > 0.0:
                    candidates.append((rank, -margin, z_star, eps0, cand))
    if not candidates:
        raise SearchFailed(
            f"no (z_star, eps0) in the sweep certified positivity for {subcase}")

    # proof-faithful recipes first, best coarse margin within each; the
    # full-resolution grid may still find a sliver the coarse one missed,
    # so walk down the list
    candidates.sort(key=lambda t: (t[0], t[1]))
    margin = -math.inf
    worst_pt = (math.nan,) * 3
    c = z_star = eps0 = None
    for _, _, z_star, eps0, c in candidates[:16]:
        eps0, _ = _golden_refine(
            lambda e: htilde_min_margin(params, c, z_star, e, coarse)[0],
            eps0 / 4.0, min(4.0 * eps0, 0.5))
        margin, worst_pt = htilde_min_margin(params, c, z_star, eps0, resolution)
        if margin > 0.0:
            break
    if margin <= 0.0:
        raise SearchFailed(
            f"constants failed at full resolution {resolution} for {subcase}")
    constants = ConstantsFound({**c, "z_star": z_star, "eps0": eps0})
    cert = GridCertificate(
        description=f"ratio-functional positivity, subcase {subcase}",
        region={"eps0": eps0, "z_star": z_star, "u_decades": 6.0,
                "x_decades": 5.0, "constraint": "y x^-beta >= z_star"},
        resolution=(resolution, resolution),
        worst_margin=margin,
        worst_point=worst_pt,
        extra=constants.values)
    return constants, cert


# ---------------------------------------------------------------------------
# uniform lower bound (sure-extinction subcases)
# ---------------------------------------------------------------------------

def effective_coefficients(params: ModelParams, r: float, beta: float):
    """The r-dependent effective coefficients of the two components."""
    d = derived_exponents(params)
    a1g = params.alpha1
    a2g = params.alpha2
    a_r = (params.a1 * (params.p1 == d.p)
           + params.a2 * (r * beta + 1.0) * (params.p2 == d.p)
           + params.a3 * (r * beta + 1.0) * gamma(a1g + r * beta)
           / (gamma(a1g) * gamma(2.0 + r * beta)) * (params.p3 == d.p))
    b_r = (params.b1 * (params.q1 == d.q)
           + params.b2 * (1.0 - r) * (params.q2 == d.q)
           + params.b3 * (1.0 - r) * gamma(a2g - r)
           / (gamma(a2g) * gamma(2.0 - r)) * (params.q3 == d.q))
    return a_r, b_r


def hbound_recipe(params: ModelParams, subcase: str) -> list:
    """Candidate (r, beta) pairs, strongest first.

    The curvature exponent r trades sharpness of the effective
    coefficients against the ratio weight, so a short ladder of fractions
    of (1 - theta2) is offered; beta then follows the subcase recipe.
    """
    d = derived_exponents(params)
    th2 = params.theta2
    k2 = params.kappa2
    out = []
    for frac in (0.5, 0.25, 0.1, 0.04, 0.016):
        r = frac * (1.0 - th2)
        if subcase == "iiia":
            floor = k2 * (r + d.q) / (r * (d.q + 1.0 - th2))
            out.append({"r": r, "beta": 1.2 * floor})
            out.append({"r": r, "beta": 2.0 * floor})
        elif subcase == "iiib":
            lo, hi = k2 / (1.0 - th2), d.b / d.a
            if not lo < hi:
                raise SearchFailed(f"empty exponent band ({lo}, {hi}) for {subcase}")
            for pos in (0.5, 0.25, 0.1):
                out.append({"r": r, "beta": lo + pos * (hi - lo)})
        else:
            raise ValueError(f"unknown subcase {subcase!r}")
    return out


def hbound_min(params: ModelParams, r: float, beta: float, eps: float,
               resolution: int = 200, decades: float = 5.0):
    """Minimum of the drift functional over the log-spaced square (0, eps)^2."""
    d = derived_exponents(params)
    a_r, b_r = effective_coefficients(params, r, beta)
    th1, th2 = params.theta1, params.theta2
    k1, k2 = params.kappa1, params.kappa2
    side = eps * _loggrid(10.0 ** -decades, 1.0, resolution)
    X, Y = np.meshgrid(side, side, indexing="ij")
    # u^r with u = y x^-beta folded directly into each power product
    rb = r * beta
    with np.errstate(divide="ignore", invalid="ignore", over="ignore",
                     under="ignore"):
        H = (b_r * X ** -rb * Y ** (r + d.q)
             + params.eta2 * X ** (k2 - rb) * Y ** (r + th2 - 1.0)
             - a_r * beta * X ** (d.p - rb) * Y ** r
             - params.eta1 * beta * X ** (th1 - 1.0 - rb) * Y ** (k1 + r))
    if not np.all(np.isfinite(H)):
        return -math.inf, (math.nan, math.nan)
    i = np.unravel_index(int(np.argmin(H)), H.shape)
    return float(H[i]), (float(X[i]), float(Y[i]))


def check_H_lower_bound(params: ModelParams, subcase: str,
                        resolution: int = 200):
    """Find (r, beta, eps, c0) and certify the uniform drift lower bound.

    The functional must stay above a strictly positive constant on the
    whole small square; c0 is set to half the coarse-grid minimum and the
    certificate reports the full-resolution slack against it.
    """
    if subcase not in _SUBCASES_SURE:
        raise ValueError(f"subcase must be one of {_SUBCASES_SURE}")
    verdict = classify(params)
    tag = f"T1.2({subcase})"
    if verdict.verdict != "SureExtinctionY" or tag not in verdict.fired_conditions:
        raise SearchFailed(
            f"parameters do not satisfy subcase {subcase}: classifier says "
            f"{verdict.verdict} via {verdict.fired_conditions}")
    coarse = max(32, resolution // 4)
    candidates = []
    eps_ladder = (0.25, 0.1, 0.04, 0.016, 0.0064, 1e-3, 1e-4, 1e-6, 1e-9,
                  1e-14, 1e-20, 1e-30, 1e-45, 1e-60)
    for rank, cand in enumerate(hbound_recipe(params, subcase)):
        for eps in eps_ladder:
            margin, _ = hbound_min(params, cand["r"], cand["beta"], eps, coarse)
            if math.isfinite(margin) and margin > 0.0:
                candidates.append((rank, -margin, eps, cand["r"], cand["beta"]))
    if not candidates:
        raise SearchFailed(f"no (r, beta, eps) in the sweep certified the bound "
                           f"for {subcase}")
    candidates.sort(key=lambda t: (t[0], t[1]))
    margin = -math.inf
    worst_pt = (math.nan, math.nan)
    c0 = eps = r = beta = None
    for _, _, eps, r, beta in candidates[:16]:
        eps, coarse_min = _golden_refine(
            lambda e: hbound_min(params, r, beta, e, coarse)[0], eps / 4.0,
            min(4.0 * eps, 0.5))
        c0 = 0.5 * coarse_min
        value, worst_pt = hbound_min(params, r, beta, eps, resolution)
        margin = value - c0
        if margin > 0.0:
            break
    if margin <= 0.0:
        raise SearchFailed(
            f"constants failed at full resolution {resolution} for {subcase}")
    constants = ConstantsFound({"r": r, "beta": beta, "eps": eps, "c0": c0})
    cert = GridCertificate(
        description=f"uniform drift lower bound, subcase {subcase}",
        region={"square": (0.0, eps), "decades": 5.0},
        resolution=(resolution, resolution),
        worst_margin=margin,
        worst_point=worst_pt,
        extra=constants.values)
    return constants, cert


# ---------------------------------------------------------------------------
# reachability bump product (irreducibility)
# ---------------------------------------------------------------------------

def _bump_axis_ratio_terms(b: Bump, coord: float, alpha: float,
                           a1, pw1, a2, pw2, a3, pw3, eta, th, other_pow,
                           cfg: QuadratureConfig):
    """(Lg/g) contribution of one axis of a separable bump product."""
    r1 = float(b.ratio_d1(coord))
    r2 = float(b.ratio_d2(coord))
    out = -a1 * coord ** pw1 * r1 + a2 * coord ** pw2 * r2 \
        - eta * coord ** th * other_pow * r1
    if a3 > 0.0:
        out += a3 * coord ** pw3 * bump_jump_ratio(b, coord, alpha, cfg)
    return out


def prop24_ratio(params: ModelParams, g: BumpProduct, x: float, y: float,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Lg/g for a separable bump product, evaluated per axis in ratio form."""
    gx, gy = g.gx, g.gy
    rx = _bump_axis_ratio_terms(
        gx, x, params.alpha1, params.a1, params.p1 + 1.0, params.a2,
        params.p2 + 2.0, params.a3, params.p3 + params.alpha1,
        params.eta1, params.theta1, y ** params.kappa1, cfg)
    ry = _bump_axis_ratio_terms(
        gy, y, params.alpha2, params.b1, params.q1 + 1.0, params.b2,
        params.q2 + 2.0, params.b3, params.q3 + params.alpha2,
        params.eta2, params.theta2, x ** params.kappa2, cfg)
    return rx + ry


def check_prop24_bump(params: ModelParams, box, envelope, start,
                      lam_sweep=(10.0, 30.0, 100.0), lam1: float = 1.0,
                      resolution=(16, 16), log_floor: float = 550.0,
                      cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """Certify the reachability conditions for a target box.

    ``box`` is (u1, u2, v1, v2); ``envelope`` is (eps1, delta1, eps2,
    delta2) enclosing it; ``start`` must lie inside the envelope, outside
    the box, below it in the second coordinate.  A separable bump product
    supported between the start and the box is swept over the amplitude
    ladder until the generator-to-value ratio is positive on the grid.
    """
    u1, u2, v1, v2 = box
    eps1, delta1, eps2, delta2 = envelope
    x0, y0 = start
    if not (eps1 <= u1 < u2 <= delta1 and eps2 <= v1 < v2 <= delta2):
        raise ValueError("envelope must enclose the box")
    if u1 <= x0 <= u2 and v1 <= y0 <= v2:
        raise ValueError("start point must lie outside the target box")
    if not (eps1 < x0 < delta1 and eps2 < y0 < delta2):
        raise ValueError("start point must lie inside the envelope")
    if not y0 < v1:
        raise ValueError("this construction expects the start below the box")
    if not u1 < x0 < u2:
        raise ValueError("this construction expects the start inside the "
                         "box's first-coordinate interval")

    y3 = 0.5 * (eps2 + y0) if eps2 > 0.0 else 0.5 * y0
    validate(params, strict=True)
    last_fail = None
    for lam in lam_sweep:
        gx = Bump(u1, u2, lam, lam1)
        gy = Bump(y3, v2, lam, lam1)
        g = BumpProduct(gx, gy)
        if g.value(x0, y0) <= 0.0 and (
                float(gx.log_h(x0)) + float(gy.log_h(y0)) < -log_floor):
            last_fail = f"lam={lam}: value underflows at the start point"
            continue
        # structural boundary zeros (condition that the product vanishes on
        # the envelope frame)
        for (bx, by) in ((eps1, y0), (delta1, y0), (x0, eps2), (x0, delta2)):
            if float(g.value(bx, by)) != 0.0:
                raise SearchFailed(f"bump product nonzero at frame point "
                                   f"({bx}, {by})")
        # grid over the positive region outside the box, capped where the
        # log-profile stays within float range
        nx, ny = resolution
        xs = np.linspace(u1, u2, nx + 2)[1:-1]
        ys = np.linspace(y3, v1, ny + 2)[1:-1]
        worst = math.inf
        worst_pt = (math.nan, math.nan)
        used = 0
        for x in xs:
            for y in ys:
                if float(gx.log_h(x)) + float(gy.log_h(y)) < -log_floor:
                    continue
                used += 1
                ratio = prop24_ratio(params, g, float(x), float(y), cfg)
                if ratio < worst:
                    worst = ratio
                    worst_pt = (float(x), float(y))
        if used and worst > 0.0:
            cert = GridCertificate(
                description="reachability bump product: Lg >= d g outside the box",
                region={"box": box, "envelope": envelope, "start": start,
                        "support_y": (y3, v2), "lam": lam, "lam1": lam1,
                        "log_floor": log_floor, "nodes_used": used},
                resolution=resolution,
                worst_margin=worst,
                worst_point=worst_pt,
                extra={"d": worst, "lam": lam})
            return ConstantsFound({"lam": lam, "lam1": lam1, "y3": y3,
                                   "d": worst}), cert
        last_fail = f"lam={lam}: min ratio {worst:.4g} over {used} nodes"
    raise SearchFailed(f"no amplitude in {lam_sweep} certified positivity "
                       f"({last_fail})")


# ---------------------------------------------------------------------------
# small-initial survival conditions (ratio envelope + nonpositive drift)
# ---------------------------------------------------------------------------

def check_prop25_conditions(params: ModelParams, g: PowerRatio,
                            u_star: float, eps0: float,
                            resolution=(48, 48), u_decades: float = 4.0,
                            x_decades: float = 4.0,
                            compact_box=(0.5, 2.0)) -> GridCertificate:
    """Certify the three numerical conditions of the survival criterion.

    (a) the function dominates its ratio envelope u^-delta; (b) the
    generator is nonpositive on {0 < x, y <= eps0, y x^-beta > u_star};
    (c) on a compact box the function is bounded away from 0 and the
    generator is bounded.  Fails hard (SearchFailed) when (b) has a
    positive node, which happens when eps0 is too generous.
    """
    from .generator import power_ratio_generator_terms
    validate(params, strict=True)
    beta, delta = g.beta, g.delta
    nu, nx = resolution
    us = _loggrid(u_star * (1.0 + 1e-9), u_star * 10.0 ** u_decades, nu)
    x_hi = np.minimum(eps0, (eps0 / us) ** (1.0 / beta))
    X = x_hi[None, :] * _loggrid(10.0 ** -x_decades, 1.0, nx)[:, None]
    U = np.broadcast_to(us[None, :], X.shape)
    Y = U * X ** beta

    # (a) envelope domination: g - u^-delta = y^rho > 0
    envelope_margin = Y ** g.rho
    # (b) generator sign on the constrained region (closed power-sum form)
    coef, ex, ey = power_ratio_generator_terms(params, g)
    lg = np.zeros_like(X)
    for c, e1, e2 in zip(coef, ex, ey):
        lg += c * X ** e1 * Y ** e2
    margin_b = -lg
    i = np.unravel_index(int(np.argmin(margin_b)), X.shape)
    worst_b = float(margin_b[i])
    if worst_b <= 0.0:
        raise SearchFailed(
            f"generator positive ({-worst_b:.4g}) at ({X[i]:.4g}, {Y[i]:.4g}) "
            f"with eps0={eps0}; region too generous")

    # (c) compact-box positivity and boundedness
    z1, z2 = compact_box
    side = np.linspace(z1, z2, 16)
    BX, BY = np.meshgrid(side, side, indexing="ij")
    gbox = g.value(BX, BY)
    lg_box = np.zeros_like(BX)
    for c, e1, e2 in zip(coef, ex, ey):
        lg_box += c * BX ** e1 * BY ** e2
    if not (np.all(np.isfinite(lg_box)) and float(gbox.min()) > 0.0):
        raise SearchFailed("compact-box boundedness/positivity failed")

    worst = min(worst_b, float(envelope_margin.min()))
    return GridCertificate(
        description="small-initial survival conditions (envelope, sign, box)",
        region={"eps0": eps0, "u_star": u_star, "u_decades": u_decades,
                "x_decades": x_decades, "compact_box": compact_box,
                "beta": beta, "delta": delta, "rho": g.rho},
        resolution=resolution,
        worst_margin=worst,
        worst_point=(float(X[i]), float(Y[i])),
        extra={"generator_worst": worst_b,
               "envelope_worst": float(envelope_margin.min()),
               "box_generator_max": float(np.abs(lg_box).max()),
               "box_value_min": float(gbox.min())})
